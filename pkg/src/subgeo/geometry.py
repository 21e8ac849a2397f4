"""Point sets, distances, order statistics, seeded randomness and the
distance-evaluation counter used by every solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import kernels
from .errors import InputError

__all__ = [
    "PointSet",
    "RngStream",
    "EvalCounter",
    "as_point",
    "as_generator",
    "dist",
    "kth_largest",
    "top_m",
    "farthest_index",
    "sample_indices",
    "sample_uniform",
    "safe_ceil",
]


def safe_ceil(x: float, tol: float = 1e-9) -> int:
    """Ceiling that ignores floating-point fuzz just above an integer."""
    r = round(x)
    if abs(x - r) <= tol * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


class PointSet:
    """An immutable set of ``n`` points in ``R^d`` stored row-major.

    Index order is the tie-break everywhere: whenever two points compare
    equal the one with the smaller index wins.
    """

    __slots__ = ("_coords",)

    def __init__(self, coords):
        a = np.array(coords, dtype=np.float64, order="C", copy=True)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise InputError(f"point array must be 2-D, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InputError("a point set needs at least one point")
        if a.shape[1] < 1:
            raise InputError("points need dimension d >= 1")
        if not np.all(np.isfinite(a)):
            bad = int(np.flatnonzero(~np.isfinite(a).all(axis=1))[0])
            raise InputError(f"point {bad} has a non-finite coordinate")
        a.setflags(write=False)
        self._coords = a

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "PointSet":
        # trusted internal constructor: no copy, no validation
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        obj._coords = arr
        return obj

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def n(self) -> int:
        return self._coords.shape[0]

    @property
    def d(self) -> int:
        return self._coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self._coords[i]

    def take(self, idx) -> "PointSet":
        return PointSet._wrap(self._coords[np.asarray(idx, dtype=np.int64)])

    def scaled(self, alpha: float) -> "PointSet":
        return PointSet(self._coords * alpha)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self._coords.shape == other._coords.shape and bool(
            np.array_equal(self._coords, other._coords)
        )

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"


def as_point(p, d: int | None = None) -> np.ndarray:
    a = np.ascontiguousarray(p, dtype=np.float64).reshape(-1)
    if a.size < 1:
        raise InputError("a point needs dimension d >= 1")
    if d is not None and a.size != d:
        raise InputError(f"dimension mismatch: expected {d}, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise InputError("point has a non-finite coordinate")
    return a


@dataclass
class EvalCounter:
    """Counts point-to-center distance evaluations and input rows read.

    Not shared between threads: give every worker its own counter and merge
    with ``+=`` afterwards.
    """

    distance_evals: int = 0
    points_touched: int = 0

    def tick(self, evals: int, touched: int | None = None) -> None:
        self.distance_evals += int(evals)
        self.points_touched += int(evals if touched is None else touched)

    def __iadd__(self, other: "EvalCounter") -> "EvalCounter":
        self.distance_evals += other.distance_evals
        self.points_touched += other.points_touched
        return self

    def copy(self) -> "EvalCounter":
        return EvalCounter(self.distance_evals, self.points_touched)


def _tick(counter: EvalCounter | None, evals: int, touched: int | None = None) -> None:
    if counter is not None:
        counter.tick(evals, touched)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id, path)``.

    ``path`` lets callers derive nested sub-streams (e.g. one per branch of an
    enumeration tree) without coordinating counters.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=())

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64) or not (0 <= int(self.stream_id) < 2**64):
            raise InputError("seed and stream id must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            int(self.seed), spawn_key=(int(self.stream_id),) + tuple(int(x) for x in self.path)
        )
        return np.random.Generator(np.random.PCG64(ss))

    def stream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id, self.path)

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))


RngLike = Union[RngStream, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None:
        return RngStream(0).generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise InputError(f"cannot build a random generator from {type(rng).__name__}")


def dist(p, q, counter: EvalCounter | None = None) -> float:
    """Euclidean distance between two points."""
    a = as_point(p)
    b = as_point(q)
    if a.size != b.size:
        raise InputError(f"dimension mismatch: {a.size} vs {b.size}")
    _tick(counter, 1)
    diff = a - b
    return math.sqrt(float(diff @ diff))


def kth_largest(values, k: int) -> float:
    """The ``k``-th largest entry (``k = 1`` is the maximum).

    Uses introselect via :func:`numpy.partition`, expected linear time.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if not 1 <= k <= v.size:
        raise InputError(f"k={k} out of range for {v.size} values")
    pos = v.size - k
    return float(np.partition(v, pos)[pos])


def top_m(values, m: int) -> np.ndarray:
    """Indices of the ``m`` largest values, ties broken by smaller index.

    The result is sorted by index so that it does not depend on how the
    selection was carried out.
    """
    v = np.asarray(values).reshape(-1)
    n = v.size
    if not 0 <= m <= n:
        raise InputError(f"m={m} out of range for {n} values")
    if m == 0:
        return np.empty(0, dtype=np.int64)
    if m == n:
        return np.arange(n, dtype=np.int64)
    thr = np.partition(v, n - m)[n - m]
    above = np.flatnonzero(v > thr)
    ties = np.flatnonzero(v == thr)[: m - above.size]
    out = np.concatenate([above, ties])
    out.sort()
    return out


def farthest_index(P: PointSet, c, counter: EvalCounter | None = None) -> int:
    """Index of the point farthest from ``c`` (smallest index on ties)."""
    if P is None or len(P) == 0:
        raise InputError("empty point set")
    c = as_point(c, P.d)
    d2 = kernels.sq_dists(P.coords, c)
    _tick(counter, P.n)
    return int(np.argmax(d2))


def sample_indices(n: int, m: int, rng: RngLike) -> np.ndarray:
    """``m`` indices drawn uniformly with replacement from ``range(n)``."""
    if m < 1:
        raise InputError("sample size must be >= 1")
    return as_generator(rng).integers(0, n, size=int(m), dtype=np.int64)


def sample_uniform(P: PointSet, m: int, rng: RngLike) -> PointSet:
    """``m`` independent uniform draws (with replacement) from ``P``."""
    return P.take(sample_indices(P.n, m, rng))
