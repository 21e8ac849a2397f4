"""Minimum enclosing "x" with outliers: the shape-family contract and the
generic ranking, threshold, sampling and sandwich operations.

A family supplies a ranking function ``f(c, p)`` and a minimal enclosing
size ``min_enclosing_size(c, p)``.  The shapes ``x(c, l)`` must be nested in
``l``, closed downwards in ``f`` and touched exactly at the minimal size.
All methods are vectorised over the rows of a ``(m, d)`` array.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InputError, PreconditionError
from .geometry import EvalCounter, PointSet, RngLike, _tick, as_generator, top_m
from .model import SamplingPlan

__all__ = [
    "ShapeFamily",
    "BallFamily",
    "MexInstance",
    "AdaptiveSample",
    "SandwichResult",
    "farthest_set",
    "threshold_size",
    "farthest_split",
    "adaptive_draw",
    "sandwich_draw",
    "generalized_uas",
    "generalized_sandwich",
    "LawReport",
    "check_family_laws",
    "mex_trial",
    "final_scan",
]


class ShapeFamily(ABC):
    """Behavioural contract of a shape family.

    Subclasses are stateless apart from fixed configuration (``k`` for
    unions of balls and so on), so one instance can be shared by readers.
    """

    name = "abstract"

    @abstractmethod
    def f(self, c, X: np.ndarray) -> np.ndarray:
        """Ranking distance of every row of ``X`` to the center ``c``."""

    @abstractmethod
    def min_enclosing_size(self, c, X: np.ndarray) -> np.ndarray:
        """Smallest size whose shape around ``c`` contains each row; may be inf."""

    @abstractmethod
    def contains(self, c, size: float, X: np.ndarray) -> np.ndarray:
        """Boolean mask of the rows of ``X`` inside ``x(c, size)``."""

    # generators used by check_family_laws
    @abstractmethod
    def random_center(self, rng: np.random.Generator, d: int):
        ...

    def random_points(self, rng: np.random.Generator, c, m: int, d: int) -> np.ndarray:
        return rng.normal(size=(m, d)) * rng.uniform(0.1, 3.0)

    def size_from_f(self, c, fvals: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Minimal sizes given precomputed ``f`` values (override when cheaper)."""
        return self.min_enclosing_size(c, X)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class BallFamily(ShapeFamily):
    """Euclidean balls: ``f = ||p - c||`` and the minimal size equals ``f``."""

    name = "ball"

    def f(self, c, X):
        return np.sqrt(kernels.sq_dists(X, np.asarray(c, dtype=np.float64)))

    def min_enclosing_size(self, c, X):
        return self.f(c, X)

    def size_from_f(self, c, fvals, X):
        return fvals

    def contains(self, c, size, X):
        return self.f(c, X) <= size

    def random_center(self, rng, d):
        return rng.normal(size=d)


@dataclass
class MexInstance:
    P: PointSet
    gamma: float
    family: ShapeFamily

    def __post_init__(self):
        if not isinstance(self.P, PointSet):
            self.P = PointSet(self.P)
        if not 0.0 < self.gamma < 1.0:
            raise InputError(f"gamma must lie in (0, 1), got {self.gamma}")


def _coords(P) -> np.ndarray:
    return P.coords if isinstance(P, PointSet) else np.asarray(P, dtype=np.float64)


def _split(fvals: np.ndarray, m: int) -> tuple[np.ndarray, int]:
    """``(Q, j0)``: the ``m`` largest positions (sorted) and the position of
    the ``(m+1)``-th largest, all ties by smaller position."""
    n = fvals.size
    if not 0 <= m < n:
        raise InputError(f"need 0 <= m < n, got m={m}, n={n}")
    Q = top_m(fvals, m + 1)
    # among the m+1 largest, the last in (value desc, index asc) order is j0
    sub = fvals[Q]
    low = sub.min()
    j0 = int(Q[np.flatnonzero(sub == low)[-1]])
    Q = Q[Q != j0]
    return Q, j0


def farthest_set(
    P, c, m: int, family: ShapeFamily, counter: EvalCounter | None = None
) -> np.ndarray:
    """Indices of the ``m`` points with the largest ``f`` (sorted, ties by index)."""
    X = _coords(P)
    if not 1 <= m <= X.shape[0]:
        raise InputError(f"m must lie in [1, n], got {m}")
    fv = family.f(c, X)
    _tick(counter, X.shape[0])
    return top_m(fv, m)


def farthest_split(
    P, c, m: int, family: ShapeFamily, counter: EvalCounter | None = None
) -> tuple[np.ndarray, float]:
    """``(Q, l)`` from one scan: the ``m`` farthest points and the size that
    excludes exactly them."""
    Q, l, _ = _farthest_split(_coords(P), c, m, family, counter)
    return Q, l


def _farthest_split(X, c, m, family, counter):
    fv = family.f(c, X)
    _tick(counter, X.shape[0])
    Q, j0 = _split(fv, m)
    l = float(family.size_from_f(c, fv[j0 : j0 + 1], X[j0 : j0 + 1])[0])
    return Q, l, j0


def threshold_size(P, c, m: int, family: ShapeFamily, counter: EvalCounter | None = None) -> float:
    """Size ``l`` of the shape through the ``(m+1)``-th farthest point.

    ``P \\ x(c, l)`` equals :func:`farthest_set` ``(P, c, m)``.  An infinite
    value means no finite shape around ``c`` covers the remaining points.
    """
    if m < 1:
        raise InputError("threshold_size needs m >= 1")
    return farthest_split(P, c, m, family, counter)[1]


@dataclass
class AdaptiveSample:
    """One uniform-adaptive draw.  ``candidates`` are indices into ``P``
    (with multiplicity when sampled); ``index`` is the returned point."""

    index: int
    point: np.ndarray
    candidates: np.ndarray
    exact: bool


@dataclass
class SandwichResult:
    size: float
    exact: bool
    witness: int = -1
    sample: np.ndarray | None = field(default=None, repr=False)


def adaptive_draw(
    P,
    c,
    plan: SamplingPlan,
    family: ShapeFamily,
    rng: RngLike,
    counter: EvalCounter | None = None,
) -> AdaptiveSample:
    """Uniform-adaptive sampling under ``family``.

    Draws ``n'`` points with replacement, keeps the ``t'`` largest under
    ``f`` and returns one of them uniformly.  When ``n' >= n`` the exact
    ``t`` farthest points of ``P`` replace the sampled set.
    """
    X = _coords(P)
    n = X.shape[0]
    if plan.n != n:
        raise PreconditionError(f"sampling plan built for n={plan.n}, got n={n}")
    g = as_generator(rng)
    if plan.exact_uas:
        # t = 0 (no outliers) degenerates to the single farthest point
        Q = farthest_set(X, c, max(plan.t, 1), family, counter)
        q = int(Q[g.integers(Q.size)])
        return AdaptiveSample(q, X[q], Q, True)
    A = g.integers(0, n, size=plan.n_prime, dtype=np.int64)
    fv = family.f(c, X[A])
    _tick(counter, A.size)
    pos = top_m(fv, plan.t_prime)
    cand = A[pos]
    q = int(cand[g.integers(cand.size)])
    return AdaptiveSample(q, X[q], cand, False)


def sandwich_draw(
    P,
    c,
    plan: SamplingPlan,
    family: ShapeFamily,
    rng: RngLike,
    counter: EvalCounter | None = None,
    *,
    check_delta: bool = True,
    keep_sample: bool = False,
) -> SandwichResult:
    """Sandwich estimate of the threshold size at ``c``.

    Samples ``n''`` points and returns the minimal size through the
    ``(t''+1)``-th farthest one.  With ``n'' >= n`` the same rank is taken
    over all of ``P`` using ``t'' = ceil((1+delta)^2 gamma n)``.
    """
    if check_delta and not plan.delta < 1.0 / 3.0:
        raise PreconditionError(f"sandwich estimate needs delta < 1/3, got {plan.delta}")
    X = _coords(P)
    n = X.shape[0]
    if plan.n != n:
        raise PreconditionError(f"sampling plan built for n={plan.n}, got n={n}")
    if plan.exact_sandwich:
        fv = family.f(c, X)
        _tick(counter, n)
        _, j0 = _split(fv, plan.t_dprime_exact)
        l = float(family.size_from_f(c, fv[j0 : j0 + 1], X[j0 : j0 + 1])[0])
        return SandwichResult(l, True, j0)
    B = as_generator(rng).integers(0, n, size=plan.n_dprime, dtype=np.int64)
    XB = X[B]
    fv = family.f(c, XB)
    _tick(counter, B.size)
    _, j0 = _split(fv, plan.t_dprime)
    l = float(family.size_from_f(c, fv[j0 : j0 + 1], XB[j0 : j0 + 1])[0])
    return SandwichResult(l, False, int(B[j0]), B if keep_sample else None)


def generalized_uas(P, c, plan, family, rng, counter=None) -> np.ndarray:
    """Point returned by uniform-adaptive sampling (see :func:`adaptive_draw`)."""
    return adaptive_draw(P, c, plan, family, rng, counter).point


def generalized_sandwich(P, c, plan, family, rng, counter=None) -> float:
    """Estimated threshold size (see :func:`sandwich_draw`); may be ``inf``."""
    return sandwich_draw(P, c, plan, family, rng, counter).size


@dataclass
class LawReport:
    family: str
    triples: int
    violations: dict = field(default_factory=lambda: {"nesting": 0, "order": 0, "touching": 0})
    witnesses: dict = field(default_factory=dict)
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def __bool__(self) -> bool:
        return self.passed


def check_family_laws(
    family: ShapeFamily,
    rng: RngLike = None,
    *,
    triples: int = 10_000,
    d: int = 3,
    per_center: int = 100,
) -> LawReport:
    """Property-test nesting, order consistency and touching minimality.

    For every center a batch of points is drawn; sizes are taken from the
    minimal sizes of other points so that the shapes cut through the batch.
    Points with infinite minimal size lie outside the family's domain and
    are skipped for the touching law.
    """
    g = as_generator(rng)
    rep = LawReport(getattr(family, "name", type(family).__name__), 0)
    done = 0
    while done < triples:
        m = min(per_center, triples - done)
        c = family.random_center(g, d)
        X = family.random_points(g, c, m, d)
        X0 = family.random_points(g, c, m, d)
        fv = family.f(c, X)
        f0 = family.f(c, X0)
        s = family.min_enclosing_size(c, X)
        s0 = family.min_enclosing_size(c, X0)
        fin = np.isfinite(s0)
        pool = s0[fin] if fin.any() else np.array([1.0])
        # nesting: random pair of sizes from the batch
        a = pool[g.integers(pool.size, size=m)]
        b = pool[g.integers(pool.size, size=m)]
        s1, s2 = np.minimum(a, b), np.maximum(a, b)
        in1 = np.array([family.contains(c, s1[i], X[i : i + 1])[0] for i in range(m)])
        in2 = np.array([family.contains(c, s2[i], X[i : i + 1])[0] for i in range(m)])
        bad = in1 & ~in2
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            rep.violations["nesting"] += int(bad.sum())
            rep.witnesses.setdefault("nesting", (c, float(s1[i]), float(s2[i]), X[i].copy()))
        # order consistency with r = the tight size of p0
        r = s0
        in0 = np.array(
            [np.isfinite(r[i]) and family.contains(c, r[i], X0[i : i + 1])[0] for i in range(m)]
        )
        below = fv <= f0
        inp = np.array(
            [np.isfinite(r[i]) and family.contains(c, r[i], X[i : i + 1])[0] for i in range(m)]
        )
        bad = in0 & below & ~inp
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            rep.violations["order"] += int(bad.sum())
            rep.witnesses.setdefault("order", (c, float(r[i]), X[i].copy(), X0[i].copy()))
        # touching minimality
        ok = np.isfinite(s)
        rep.skipped += int((~ok).sum())
        for i in np.flatnonzero(ok):
            si = s[i]
            row = X[i : i + 1]
            if not family.contains(c, si, row)[0]:
                rep.violations["touching"] += 1
                rep.witnesses.setdefault("touching", (c, float(si), X[i].copy(), "outside"))
                continue
            if si > 0.0:
                shrunk = si * (1.0 - 1e-6)
                if family.contains(c, shrunk, row)[0]:
                    rep.violations["touching"] += 1
                    rep.witnesses.setdefault("touching", (c, float(shrunk), X[i].copy(), "inside"))
        done += m
    rep.triples = done
    return rep


def mex_trial(
    P,
    gamma: float,
    params,
    family: ShapeFamily,
    center_fn,
    rng: RngLike,
    *,
    mode: str = "sublinear",
    plan: SamplingPlan | None = None,
    check_delta: bool = True,
):
    """One trial of the generic bi-criteria MEX-with-outliers loop.

    Starts from a uniform point, then for ``params.z`` rounds computes the
    center of the core-set with ``center_fn(core_coords, counter)``, picks a
    far point (exact farthest set in ``"linear"`` mode, uniform-adaptive
    sampling otherwise), records the candidate size (exact threshold or
    sandwich estimate) and grows the core-set.  The smallest size wins,
    earliest round on ties.
    """
    from .model import Candidate
    from .trials import TrialResult

    X = _coords(P)
    n = X.shape[0]
    if mode not in ("linear", "sublinear"):
        raise InputError(f"mode must be 'linear' or 'sublinear', got {mode!r}")
    linear = mode == "linear"
    if plan is None:
        plan = SamplingPlan.build(n, gamma, params, linear_only=linear)
    g = as_generator(rng)
    counter = EvalCounter()
    res = TrialResult(None, counter=counter)
    res.fallbacks = {
        "uas_exact": (not linear) and plan.exact_uas,
        "sandwich_exact": (not linear) and plan.exact_sandwich,
        "infeasible_rounds": 0,
    }
    core = [int(g.integers(n))]
    for i in range(1, int(params.z) + 1):
        c = center_fn(X[core], counter)
        if linear:
            Q, size, j0 = _farthest_split(X, c, plan.t, family, counter)
            if not Q.size:
                Q = np.array([j0])
            q = int(Q[g.integers(Q.size)])
        else:
            q = adaptive_draw(X, c, plan, family, g, counter).index
            size = sandwich_draw(X, c, plan, family, g, counter, check_delta=check_delta).size
        cand = Candidate(c, size, i)
        res.candidates.append(cand)
        if not np.isfinite(size):
            res.fallbacks["infeasible_rounds"] += 1
        elif res.best is None or size < res.best.size:
            res.best = cand
        core.append(q)
    res.extra["core"] = core
    return res


def final_scan(P, family: ShapeFamily, c, size: float) -> tuple[int, int, EvalCounter]:
    """Exact ``(covered, excluded, counter)`` of ``x(c, size)`` over ``P``."""
    X = _coords(P)
    counter = EvalCounter()
    counter.tick(X.shape[0])
    if not np.isfinite(size):
        return 0, X.shape[0], counter
    covered = int(np.count_nonzero(family.contains(c, size, X)))
    return covered, X.shape[0] - covered, counter
