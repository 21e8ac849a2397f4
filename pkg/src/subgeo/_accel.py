"""Backend switch for the compiled kernels.

Set ``SUBGEO_DISABLE_NUMBA=1`` (or ``SUBGEO_BACKEND=numpy``) before import to
force the pure-numpy code paths.  When numba is missing the numpy path is used
automatically.
"""

from __future__ import annotations

import os

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False


def _env_disabled() -> bool:
    flag = os.environ.get("SUBGEO_DISABLE_NUMBA", "").strip().lower()
    if flag in ("1", "true", "yes", "on"):
        return True
    return os.environ.get("SUBGEO_BACKEND", "").strip().lower() == "numpy"


USE_NUMBA = NUMBA_AVAILABLE and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op when numba is unavailable.

    The decorated function is always compiled lazily, so importing the package
    with numba disabled never triggers a compile.
    """
    bare = len(args) == 1 and callable(args[0])
    if not NUMBA_AVAILABLE:
        return args[0] if bare else (lambda f: f)

    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if bare:
        return numba.njit(**kwargs)(args[0])
    return numba.njit(*args, **kwargs)
