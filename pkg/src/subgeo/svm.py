"""SVM with outliers through polytope distance.

One-class: find a direction ``u`` and a halfspace ``{p : <p,u> >= m}`` that
holds all but a few points, with ``m`` as large as possible.  The solver is
Gilbert's algorithm with the greedy step replaced by a random pick from the
points of smallest projection.  The halfspace family ranks points by
``f(u, p) = -<p, u>`` and measures a shape by ``1 / m``, so the generic
sampling and sandwich operations apply unchanged.

Two-class: Gilbert on the implicit Minkowski difference ``P1 - P2`` with the
same replacement on both classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InputError
from .geometry import EvalCounter, PointSet, RngLike, as_generator
from .mex import ShapeFamily, _coords, _farthest_split, adaptive_draw, sandwich_draw
from .model import BiCriteriaParams, Candidate, OutlierInstance, SamplingPlan, TwoClassInstance
from .trials import TrialResult, run_repeats

__all__ = [
    "GilbertState",
    "gilbert",
    "HalfSpaceFamily",
    "MarginReport",
    "svm1_outliers",
    "svm2_outliers",
    "segment_closest",
]

_EPS = np.finfo(float).eps
_TOUCH = 4 * _EPS


@dataclass
class GilbertState:
    """Final iterate of :func:`gilbert` with its duality bracket.

    ``cert`` is ``min_p <p, v>/||v||`` (a lower bound on the distance) and
    ``norm = ||v||`` an upper bound.  ``E`` is ``D^2/rho^2`` evaluated with
    ``D`` bounded by twice the largest distance from the centroid and ``rho``
    by ``cert``.
    """

    v: np.ndarray
    iter: int
    cert: float
    norm: float
    cert_gap: float
    inseparable: bool = False
    E: float = math.inf
    history_norms: np.ndarray = field(default=None, repr=False)
    history_certs: np.ndarray = field(default=None, repr=False)

    @property
    def bracket(self) -> tuple[float, float]:
        return max(self.cert, 0.0), self.norm


def gilbert(P, epsilon: float = 1e-6, max_iter: int = 100_000, rng: RngLike = None) -> GilbertState:
    """Plain Gilbert iterations for the distance from the origin to ``conv(P)``.

    Starts at the input point closest to the origin and stops once
    ``cert >= (1 - epsilon) ||v||`` or after ``max_iter`` steps.  The method
    is deterministic; ``rng`` is accepted for interface symmetry.  A final
    certificate ``<= 0`` marks the input as inseparable from the origin.
    """
    X = np.ascontiguousarray(_coords(P), dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError("gilbert needs a non-empty (n, d) array")
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    v, it, cert, hn, hc = kernels.polytope_distance(X, float(epsilon), int(max_iter), False, True)
    v = np.asarray(v).copy()
    nv = float(np.linalg.norm(v))
    cert = float(cert)
    insep = not cert > 0.0
    spread = float(np.sqrt(kernels.sq_dists(X, X.mean(axis=0)).max()))
    E = (2.0 * spread) ** 2 / cert**2 if cert > 0 else math.inf
    return GilbertState(v, int(it), cert, nv, max(nv - cert, 0.0), insep, E,
                        np.asarray(hn), np.asarray(hc))


def segment_closest(v: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Point of the segment ``[v, p]`` closest to the origin."""
    d = p - v
    dd = float(d @ d)
    if dd == 0.0:
        return v.copy()
    a = min(max(-float(v @ d) / dd, 0.0), 1.0)
    return v + a * d


class HalfSpaceFamily(ShapeFamily):
    """Halfspaces ``x(u, l) = {p : <p, u> >= 1/l}`` for unit ``u``.

    ``f(u, p) = -<p, u>`` and the minimal size is ``1/<p, u>``, infinite
    when ``<p, u> <= 0``.  Containment allows a few ulps of slack so that the
    shape at a point's own minimal size holds that point.
    """

    name = "halfspace"

    def _u(self, c):
        return np.asarray(c, dtype=np.float64).reshape(-1)

    def f(self, c, X):
        return -(np.asarray(X, dtype=np.float64) @ self._u(c))

    def min_enclosing_size(self, c, X):
        return self.size_from_f(c, self.f(c, X), X)

    def size_from_f(self, c, fvals, X):
        proj = -np.asarray(fvals, dtype=np.float64)
        out = np.full(proj.shape, np.inf)
        pos = proj > 0
        out[pos] = 1.0 / proj[pos]
        return out

    def contains(self, c, size, X):
        X = np.asarray(X, dtype=np.float64)
        u = self._u(c)
        proj = X @ u
        if not np.isfinite(size):
            return proj > 0
        # rounding of the dot product depends on how it was batched; allow
        # its error bound (relative to sum |x_j u_j|) besides a few ulps
        err = X.shape[-1] * _EPS * (np.abs(X) @ np.abs(u))
        return (proj + err) * size >= 1.0 - _TOUCH

    def random_center(self, rng, d):
        u = rng.normal(size=d)
        return u / np.linalg.norm(u)

    def random_points(self, rng, c, m, d):
        # mostly on the positive side, some behind the origin
        return rng.normal(size=(m, d)) + rng.uniform(-0.5, 3.0) * self._u(c)


HALF = HalfSpaceFamily()


@dataclass
class MarginReport:
    """Winner of an SVM run.

    ``margin`` is the estimated separation (one-class: the distance from
    the origin to the halfspace; two-class: ``s_perp + s_top``).  ``excluded``
    holds one count per class from the final scan.  ``offset`` is the
    decision threshold along ``direction`` (two-class: the midpoint).
    """

    direction: np.ndarray | None
    margin: float
    excluded: tuple | None
    covered: tuple | None
    counter: EvalCounter
    repetitions_used: int
    offset: float = 0.0
    feasible: bool = True
    scan_counter: EvalCounter = field(default_factory=EvalCounter)
    fallbacks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> float:
        return 1.0 / self.margin if self.margin > 0 else math.inf


def _unit(v):
    nv = float(np.linalg.norm(v))
    return v / nv if nv > 0 else None


def _check_mode(mode):
    if mode not in ("linear", "sublinear"):
        raise InputError(f"mode must be 'linear' or 'sublinear', got {mode!r}")


def _rounds(params: BiCriteriaParams, rounds):
    r = int(params.z if rounds is None else rounds)
    if r < 1:
        raise InputError("rounds must be >= 1")
    return r


def _trial1(X, plan, mode, rounds, rng) -> TrialResult:
    linear = mode == "linear"
    g = as_generator(rng)
    n = X.shape[0]
    counter = EvalCounter()
    res = TrialResult(None, counter=counter)
    res.fallbacks = {
        "uas_exact": (not linear) and plan.exact_uas,
        "sandwich_exact": (not linear) and plan.exact_sandwich,
        "infeasible_rounds": 0,
    }
    v = X[int(g.integers(n))].copy()
    norms = []
    for i in range(1, rounds + 1):
        u = _unit(v)
        if u is None:
            # v reached the origin: no direction left to try
            res.fallbacks["infeasible_rounds"] += rounds - i + 1
            break
        if linear:
            Q, size, j0 = _farthest_split(X, u, plan.t, HALF, counter)
            if not Q.size:
                Q = np.array([j0])
            q = int(Q[g.integers(Q.size)])
        else:
            q = adaptive_draw(X, u, plan, HALF, g, counter).index
            size = sandwich_draw(X, u, plan, HALF, g, counter).size
        cand = Candidate(u, size, i)
        res.candidates.append(cand)
        if not np.isfinite(size):
            res.fallbacks["infeasible_rounds"] += 1
        elif res.best is None or size < res.best.size:
            res.best = cand
        norms.append(float(np.linalg.norm(v)))
        v = segment_closest(v, X[q])
    res.extra["norms"] = norms
    return res


def svm1_outliers(
    P,
    gamma: float | None,
    params: BiCriteriaParams,
    mode: str = "linear",
    rng: RngLike = None,
    *,
    rounds: int | None = None,
    final: bool = True,
    workers: int | None = None,
) -> MarginReport:
    """One-class SVM with outliers, best of ``params.repeats`` trials.

    Each trial starts ``v`` at a uniform input point and runs ``rounds``
    (default ``params.z``) Gilbert steps whose point comes from the ``t``
    smallest projections on ``v`` (exact set in linear mode,
    uniform-adaptive sampling otherwise).  Every round records the margin
    estimate of the current direction (exact threshold or sandwich).
    Rounds whose estimate is not positive are counted as infeasible.
    """
    _check_mode(mode)
    if isinstance(P, OutlierInstance):
        inst = P if gamma is None else OutlierInstance(P.P, gamma, P.truth)
    else:
        inst = OutlierInstance(P if isinstance(P, PointSet) else PointSet(P), gamma)
    X = _coords(inst.P)
    R = _rounds(params, rounds)
    plan = SamplingPlan.build(inst.n, inst.gamma, params, linear_only=mode == "linear")
    win, win_id, total, _ = run_repeats(
        lambda s: _trial1(X, plan, mode, R, s), int(params.repeats), rng, workers=workers
    )
    fb = dict(win.fallbacks)
    if win.best is None:
        rep = MarginReport(None, 0.0, None, None, total, int(params.repeats), feasible=False,
                           fallbacks=fb)
        if final:
            rep.excluded, rep.covered = (inst.n,), (0,)
            rep.scan_counter.tick(inst.n)
        return rep
    u = win.best.center
    margin = 1.0 / win.best.size
    rep = MarginReport(u, margin, None, None, total, int(params.repeats), offset=margin,
                       fallbacks=fb)
    rep.extra.update(win.extra, winner_repetition=win_id, trial_counter=win.counter.copy(),
                     round=win.best.round)
    if final:
        inside = int(np.count_nonzero(HALF.contains(u, win.best.size, X)))
        rep.covered, rep.excluded = (inside,), (inst.n - inside,)
        rep.scan_counter.tick(inst.n)
    return rep


def _pair_margin(X1, X2, u, plan1, plan2, mode, g, counter):
    """``(s_perp + s_top, offset)`` along ``u``: the threshold projections
    of both classes, measured from the midpoint of their witnesses."""
    fam2_u = -u
    if mode == "linear":
        _, _, j1 = _farthest_split(X1, u, plan1.t, HALF, counter)
        _, _, j2 = _farthest_split(X2, fam2_u, plan2.t, HALF, counter)
        w1, w2 = X1[j1], X2[j2]
    else:
        s1 = sandwich_draw(X1, u, plan1, HALF, g, counter)
        s2 = sandwich_draw(X2, fam2_u, plan2, HALF, g, counter)
        w1, w2 = X1[s1.witness], X2[s2.witness]
    a, b = float(w1 @ u), float(w2 @ u)
    o = 0.5 * (a + b)
    # after translating the origin to the midpoint both halfspaces face away
    s_perp, s_top = a - o, o - b
    if s_perp <= 0.0:
        return math.inf, o, 0.0, 0.0
    size = 1.0 / (s_perp + s_top)
    return size, o, s_perp, s_top


def _trial2(X1, X2, plan1, plan2, mode, rounds, convention, rng) -> TrialResult:
    linear = mode == "linear"
    g = as_generator(rng)
    counter = EvalCounter()
    res = TrialResult(None, counter=counter)
    res.fallbacks = {
        "uas_exact": (not linear) and (plan1.exact_uas or plan2.exact_uas),
        "sandwich_exact": (not linear) and (plan1.exact_sandwich or plan2.exact_sandwich),
        "infeasible_rounds": 0,
    }
    v = X1[int(g.integers(X1.shape[0]))] - X2[int(g.integers(X2.shape[0]))]
    sign = 1.0 if convention == "p1-p2" else -1.0
    for i in range(1, rounds + 1):
        u = _unit(v)
        if u is None:
            res.fallbacks["infeasible_rounds"] += rounds - i + 1
            break
        size, o, sp, st = _pair_margin(X1, X2, u, plan1, plan2, mode, g, counter)
        cand = Candidate(u, size, i, (o, sp, st))
        res.candidates.append(cand)
        if not np.isfinite(size):
            res.fallbacks["infeasible_rounds"] += 1
        elif res.best is None or size < res.best.size:
            res.best = cand
        if linear:
            Q1, _, j1 = _farthest_split(X1, u, plan1.t, HALF, counter)
            Q2, _, j2 = _farthest_split(X2, -u, plan2.t, HALF, counter)
            Q1 = Q1 if Q1.size else np.array([j1])
            Q2 = Q2 if Q2.size else np.array([j2])
            q1 = int(Q1[g.integers(Q1.size)])
            q2 = int(Q2[g.integers(Q2.size)])
        else:
            q1 = adaptive_draw(X1, u, plan1, HALF, g, counter).index
            q2 = adaptive_draw(X2, -u, plan2, HALF, g, counter).index
        v = segment_closest(v, sign * (X1[q1] - X2[q2]))
    return res


def svm2_outliers(
    inst: TwoClassInstance,
    params: BiCriteriaParams,
    mode: str = "linear",
    rng: RngLike = None,
    *,
    rounds: int | None = None,
    convention: str = "p1-p2",
    final: bool = True,
    workers: int | None = None,
) -> MarginReport:
    """Two-class SVM with outliers, best of ``params.repeats`` trials.

    Each round picks ``p1`` among the smallest projections of ``P1`` and
    ``p2`` among the largest projections of ``P2`` on ``v`` and moves ``v``
    toward ``p1 - p2``.  ``convention="p2-p1"`` flips the difference.  The
    margin is ``s_perp + s_top``, the two threshold distances measured from
    the midpoint between the classes' witnesses.
    """
    _check_mode(mode)
    if convention not in ("p1-p2", "p2-p1"):
        raise InputError("convention must be 'p1-p2' or 'p2-p1'")
    X1, X2 = _coords(inst.P1), _coords(inst.P2)
    R = _rounds(params, rounds)
    lin = mode == "linear"
    plan1 = SamplingPlan.build(X1.shape[0], inst.gamma1, params, linear_only=lin)
    plan2 = SamplingPlan.build(X2.shape[0], inst.gamma2, params, linear_only=lin)
    win, win_id, total, _ = run_repeats(
        lambda s: _trial2(X1, X2, plan1, plan2, mode, R, convention, s),
        int(params.repeats),
        rng,
        workers=workers,
    )
    fb = dict(win.fallbacks)
    n1, n2 = X1.shape[0], X2.shape[0]
    if win.best is None:
        rep = MarginReport(None, 0.0, None, None, total, int(params.repeats), feasible=False,
                           fallbacks=fb)
        if final:
            rep.excluded, rep.covered = (n1, n2), (0, 0)
            rep.scan_counter.tick(n1 + n2)
        return rep
    u = win.best.center
    o, sp, st = win.best.origin
    rep = MarginReport(u, sp + st, None, None, total, int(params.repeats), offset=o,
                       fallbacks=fb)
    rep.extra.update(winner_repetition=win_id, trial_counter=win.counter.copy(),
                     round=win.best.round, s_perp=sp, s_top=st)
    if final:
        p1 = X1 @ u - o
        p2 = o - X2 @ u
        c1 = int(np.count_nonzero(p1 * (1.0 / sp) >= 1.0 - _TOUCH))
        c2 = int(np.count_nonzero(p2 * (1.0 / st) >= 1.0 - _TOUCH))
        rep.covered, rep.excluded = (c1, c2), (n1 - c1, n2 - c2)
        rep.scan_counter.tick(n1 + n2)
    return rep
