"""Line fitting with outliers (1-flats).

The initial line passes through a uniform point and a point drawn from the
far set of that point.  Each later round draws a far point ``p_i`` from the
current line, builds candidate lines in the plane spanned by ``p_i`` and the
line, and keeps the candidate with the smallest (estimated) slab width.
The incumbent is always one of the candidates, so the estimate never grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError, PreconditionError
from .geometry import EvalCounter, RngLike, _tick, as_generator, safe_ceil, top_m
from .mex import ShapeFamily, _coords, adaptive_draw
from .model import BiCriteriaParams, Candidate, OutlierInstance, SamplingPlan, SolutionReport
from .outliers import build_report
from .trials import TrialResult, run_repeats

__all__ = [
    "Flat",
    "FlatParams",
    "SlabFamily",
    "dist_flat",
    "init_line",
    "flat_fit_outliers",
]


@dataclass(frozen=True)
class Flat:
    """``anchor + span(basis)`` with orthonormal rows in ``basis``."""

    anchor: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.anchor, dtype=np.float64).reshape(-1)
        B = np.ascontiguousarray(np.atleast_2d(self.basis), dtype=np.float64)
        if B.shape[1] != a.size:
            raise InputError("basis and anchor dimensions differ")
        if not np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-10, rtol=0):
            raise InputError("flat basis must be orthonormal")
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "basis", B)

    @property
    def j(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.anchor.size

    @classmethod
    def through(cls, p, q) -> "Flat":
        """The line through two distinct points."""
        p = np.asarray(p, dtype=np.float64)
        u = np.asarray(q, dtype=np.float64) - p
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            raise InputError("a line needs two distinct points")
        return cls(p, (u / nu)[None, :])

    @classmethod
    def line(cls, anchor, direction) -> "Flat":
        u = np.asarray(direction, dtype=np.float64)
        return cls(anchor, (u / np.linalg.norm(u))[None, :])


def dist_flat(F: Flat, X, counter: EvalCounter | None = None):
    """Distance from each row of ``X`` (or a single point) to ``F``."""
    A = np.asarray(X, dtype=np.float64)
    single = A.ndim == 1
    A = np.atleast_2d(A)
    if A.shape[1] != F.d:
        raise InputError(f"dimension mismatch: flat in R^{F.d}, points in R^{A.shape[1]}")
    _tick(counter, A.shape[0])
    if F.j == 1:
        out = np.sqrt(kernels.line_sq_dists(np.ascontiguousarray(A), F.anchor[None, :], F.basis)[0])
    else:
        R = A - F.anchor
        R = R - (R @ F.basis.T) @ F.basis
        out = np.sqrt(np.einsum("ij,ij->i", R, R))
    return float(out[0]) if single else out


class SlabFamily(ShapeFamily):
    """Slabs ``{p : dist(F, p) <= r}`` around a flat ``F``."""

    name = "slab"

    def __init__(self, j: int = 1):
        self.j = int(j)

    def f(self, c, X):
        return dist_flat(c, X)

    def min_enclosing_size(self, c, X):
        return dist_flat(c, X)

    def size_from_f(self, c, fvals, X):
        return fvals

    def contains(self, c, size, X):
        return dist_flat(c, X) <= size

    def random_center(self, rng, d):
        B, _ = np.linalg.qr(rng.normal(size=(d, self.j)))
        return Flat(rng.normal(size=d), B.T[: self.j])


@dataclass(frozen=True)
class FlatParams:
    """Round count ``nu = ceil(c5/eps^3 ln(1/eps))``, the per-round slack
    ``delta0 = delta/(nu+1)`` and ``M`` candidate directions per anchor."""

    nu: int
    delta0: float
    M: int
    anchors: tuple = (0.0, 0.5, 1.0)

    @classmethod
    def from_params(cls, params: BiCriteriaParams, c5: float = 4.0, nu: int | None = None,
                    M: int | None = None, anchors=(0.0, 0.5, 1.0)) -> "FlatParams":
        eps = params.epsilon
        if nu is None:
            nu = max(1, safe_ceil(c5 / eps**3 * math.log(1.0 / eps))) if eps < 1 else 1
        if M is None:
            M = max(64, safe_ceil(8 * math.pi / eps))
        return cls(int(nu), params.delta / (int(nu) + 1), int(M), tuple(anchors))

    def __post_init__(self):
        if self.nu < 1 or self.M < 1 or not self.anchors:
            raise InputError("nu, M and anchors must be positive")


def _far_count(n: int, gamma: float, delta0: float) -> int:
    return min(max(safe_ceil((1.0 + delta0) * gamma * n), 1), n)


def init_line(
    P,
    gamma: float,
    delta0: float,
    rng: RngLike = None,
    counter: EvalCounter | None = None,
    *,
    plan: SamplingPlan | None = None,
    return_indices: bool = False,
):
    """Line through a uniform point ``p`` and a uniform member of the
    ``ceil((1+delta0) gamma n)`` points farthest from ``p``.

    With a sampling ``plan`` (built for ``delta0``) that is not in exact
    mode, the far set is taken from a uniform sample of ``n'`` points as in
    uniform-adaptive sampling, so no full scan is needed.  A ``q``
    coinciding with ``p`` is redrawn; after 16 coincident draws
    :class:`PreconditionError` is raised.
    """
    X = _coords(P)
    n = X.shape[0]
    if n < 2:
        raise InputError("init_line needs at least two points")
    g = as_generator(rng)
    ip = int(g.integers(n))
    if plan is not None and not plan.exact_uas:
        A = g.integers(0, n, size=plan.n_prime, dtype=np.int64)
        dA = kernels.sq_dists(np.ascontiguousarray(X[A]), X[ip])
        _tick(counter, A.size)
        pos = top_m(dA, plan.t_prime)
        Q, dQ = A[pos], dA[pos]
    else:
        d2 = kernels.sq_dists(X, X[ip])
        _tick(counter, n)
        Q = top_m(d2, _far_count(n, gamma, delta0))
        dQ = d2[Q]
    for _ in range(16):
        k = int(g.integers(Q.size))
        iq = int(Q[k])
        if dQ[k] > 0.0:
            F = Flat.through(X[ip], X[iq])
            return (F, ip, iq) if return_indices else F
    raise PreconditionError("far point coincides with the base point in 16 draws")


def _candidates(F: Flat, p: np.ndarray, fp: FlatParams):
    """Anchors and directions of the candidate lines in the plane of ``F``
    and ``p``; ``None`` when ``p`` lies on ``F``."""
    u = F.basis[0]
    foot = F.anchor + ((p - F.anchor) @ u) * u
    w = p - foot
    nw = float(np.linalg.norm(w))
    if nw <= 1e-12 * max(1.0, float(np.linalg.norm(p))):
        return None
    w /= nw
    th = np.pi * np.arange(fp.M) / fp.M
    dirs = np.cos(th)[:, None] * u + np.sin(th)[:, None] * w
    anchors = [foot + lam * (p - foot) for lam in fp.anchors]
    A = np.repeat(np.array(anchors), fp.M, axis=0)
    D = np.tile(dirs, (len(anchors), 1))
    return A, D


def _rank_sizes(Y: np.ndarray, A: np.ndarray, D: np.ndarray, m: int) -> np.ndarray:
    """The ``(m+1)``-th largest distance from the rows of ``Y`` to every line."""
    S = kernels.line_sq_dists(np.ascontiguousarray(Y), A, D)
    pos = Y.shape[0] - (m + 1)
    return np.sqrt(np.partition(S, pos, axis=1)[:, pos])


def _trial(X, gamma, params, fp, plan, plan0, mode, rng) -> TrialResult:
    linear = mode == "linear"
    n = X.shape[0]
    g = as_generator(rng)
    counter = EvalCounter()
    res = TrialResult(None, counter=counter)
    res.fallbacks = {
        "uas_exact": (not linear) and plan0.exact_uas,
        "sandwich_exact": (not linear) and plan.exact_sandwich,
        "skipped_rounds": 0,
    }
    F = init_line(X, gamma, fp.delta0, g, counter, plan=None if linear else plan0)
    fam = SlabFamily(1)
    t0 = _far_count(n, gamma, fp.delta0)
    history = []
    size = None
    for i in range(0, fp.nu + 1):
        if i > 0:
            if linear:
                fv = dist_flat(F, X, counter)
                Q = top_m(fv, t0)
                ip = int(Q[g.integers(Q.size)])
            else:
                ip = adaptive_draw(X, F, plan0, fam, g, counter).index
            cand = _candidates(F, X[ip], fp)
        else:
            cand = None
        # candidate set always contains the incumbent in row 0
        A = F.anchor[None, :]
        D = F.basis
        if cand is not None:
            A = np.vstack([A, cand[0]])
            D = np.vstack([D, cand[1]])
        elif i > 0:
            res.fallbacks["skipped_rounds"] += 1
        if linear:
            sizes = _rank_sizes(X, A, D, plan.t)
            _tick(counter, n * A.shape[0])
        elif plan.exact_sandwich:
            sizes = _rank_sizes(X, A, D, plan.t_dprime_exact)
            _tick(counter, n * A.shape[0])
        else:
            B = g.integers(0, n, size=plan.n_dprime)
            sizes = _rank_sizes(X[B], A, D, plan.t_dprime)
            _tick(counter, B.size * A.shape[0], B.size)
        k = int(np.argmin(sizes))  # first minimum: the incumbent wins ties
        if k > 0:
            F = Flat.line(A[k], D[k])
        size = float(sizes[k])
        history.append(size)
        c = Candidate(F, size, i)
        res.candidates.append(c)
        if res.best is None or size < res.best.size:
            res.best = c
    res.extra["history"] = history
    return res


def flat_fit_outliers(
    inst: OutlierInstance,
    params: BiCriteriaParams,
    flat_params: FlatParams | None = None,
    mode: str = "linear",
    rng: RngLike = None,
    *,
    final: bool = True,
    workers: int | None = None,
) -> SolutionReport:
    """Best slab of ``params.repeats`` trials of the line-fitting loop.

    Linear mode draws ``p_i`` from the exact ``ceil((1+delta0) gamma n)``
    farthest points and scores candidates by the exact
    ``(ceil((1+delta) gamma n)+1)``-th largest distance.  Sub-linear mode draws
    ``p_i`` by uniform-adaptive sampling with slack ``delta0`` and scores all
    candidates of a round on one shared sandwich sample.
    """
    if mode not in ("linear", "sublinear"):
        raise InputError(f"mode must be 'linear' or 'sublinear', got {mode!r}")
    if inst.d < 2:
        raise InputError("line fitting needs d >= 2")
    fp = flat_params or FlatParams.from_params(params)
    if not fp.delta0 * (fp.nu + 1) <= params.delta * (1 + 1e-12):
        raise InputError("delta0 * (nu + 1) must not exceed delta")
    X = _coords(inst.P)
    linear = mode == "linear"
    plan = SamplingPlan.build(inst.n, inst.gamma, params, linear_only=linear)
    if not linear and not plan.delta < 1.0 / 3.0:
        raise PreconditionError(f"sandwich estimate needs delta < 1/3, got {plan.delta}")
    plan0 = SamplingPlan.build(inst.n, inst.gamma, params.replace(delta=fp.delta0), linear_only=True)
    win, win_id, total, _ = run_repeats(
        lambda s: _trial(X, inst.gamma, params, fp, plan, plan0, mode, s),
        int(params.repeats),
        rng,
        workers=workers,
    )
    rep = build_report(inst.P, SlabFamily(1), win, total, int(params.repeats), final=final,
                       origin=(win_id,))
    rep.extra["winner_repetition"] = win_id
    rep.extra["trial_counter"] = win.counter.copy()
    rep.extra["flat_params"] = fp
    return rep

