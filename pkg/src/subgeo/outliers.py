"""Minimum enclosing ball with outliers.

``algorithm1_linear`` scans the input every round; ``algorithm2_sublinear``
replaces the scan by uniform-adaptive sampling and the sandwich estimate so
that one trial touches a number of points independent of ``n``.
``repeat_best`` boosts either trial by independent repetitions.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .geometry import EvalCounter, PointSet, RngLike, safe_ceil
from .meb import approx_center
from .mex import BallFamily, adaptive_draw, final_scan, mex_trial, sandwich_draw
from .model import (
    BiCriteriaParams,
    Candidate,
    OutlierInstance,
    SamplingPlan,
    SolutionReport,
)
from .trials import TrialResult, check_budget, run_repeats

__all__ = [
    "BiCriteriaParams",
    "SamplingPlan",
    "OutlierInstance",
    "Candidate",
    "SolutionReport",
    "uniform_adaptive_sample",
    "sandwich_estimate",
    "algorithm1_linear",
    "algorithm2_sublinear",
    "repeat_best",
    "theory_repeats",
    "ball_center_fn",
    "build_report",
]

BALL = BallFamily()


def _points(P) -> PointSet:
    return P if isinstance(P, PointSet) else PointSet(P)


def uniform_adaptive_sample(
    P, o, plan: SamplingPlan, rng: RngLike, counter: EvalCounter | None = None
) -> np.ndarray:
    """Sample ``n'`` points, keep the ``t'`` farthest from ``o`` and return
    one of those uniformly.  Falls back to the exact ``t`` farthest points
    of ``P`` when ``n' >= n``."""
    return adaptive_draw(_points(P), o, plan, BALL, rng, counter).point


def sandwich_estimate(
    P, o, plan: SamplingPlan, rng: RngLike, counter: EvalCounter | None = None, *, check_delta=True
) -> float:
    """The ``(t''+1)``-th largest distance from a sample of ``n''`` points to ``o``.

    In exact mode (``n'' >= n``) the rank ``ceil((1+delta)^2 gamma n) + 1`` is
    taken over all of ``P``.
    """
    return sandwich_draw(_points(P), o, plan, BALL, rng, counter, check_delta=check_delta).size


def ball_center_fn(params: BiCriteriaParams):
    ap = params.approx

    def center(Xc, counter):
        return approx_center(Xc, ap.xi, counter=counter, max_iters=ap.inner_iter_cap)

    return center


def _trial(inst: OutlierInstance, params: BiCriteriaParams, rng, mode: str) -> TrialResult:
    res = mex_trial(inst.P, inst.gamma, params, BALL, ball_center_fn(params), rng, mode=mode)
    res.fallbacks["inner_capped"] = params.approx.inner_capped
    return res


def _trial_linear(inst, params, rng):
    return _trial(inst, params, rng, "linear")


def _trial_sublinear(inst, params, rng):
    return _trial(inst, params, rng, "sublinear")


def build_report(
    P,
    family,
    win: TrialResult,
    counter: EvalCounter,
    repetitions: int,
    *,
    final: bool = True,
    origin: tuple = (),
) -> SolutionReport:
    """Wrap a winning trial into a :class:`SolutionReport`, optionally
    scanning ``P`` once for the exact coverage of the winner."""
    best = win.best
    if best is None:
        rep = SolutionReport(None, math.inf, None, None, counter, repetitions, None)
        rep.fallbacks = dict(win.fallbacks)
        rep.family = family.name
        if final:
            rep.covered, rep.excluded = 0, _points(P).n
        return rep
    best.origin = origin + (best.round,)
    rep = SolutionReport(best.center, best.size, None, None, counter, repetitions, best)
    rep.fallbacks = dict(win.fallbacks)
    rep.family = family.name
    rep.extra = dict(win.extra)
    if final:
        rep.covered, rep.excluded, rep.scan_counter = final_scan(P, family, best.center, best.size)
    return rep


def algorithm1_linear(
    inst: OutlierInstance, params: BiCriteriaParams, rng: RngLike = None, *, final: bool = True
) -> SolutionReport:
    """One trial of the linear-time bi-criteria algorithm.

    Each of the ``z`` rounds computes the approximate center ``o_i`` of the
    core-set, the ``t = ceil((1+delta) gamma n)`` farthest points ``Q`` and
    the ``(t+1)``-th largest distance ``l_i``, then moves a uniform member of
    ``Q`` into the core-set.  Returns ``B(o_i, l_i)`` for the smallest
    ``l_i``.
    """
    res = _trial_linear(inst, params, rng)
    return build_report(inst.P, BALL, res, res.counter.copy(), 1, final=final, origin=(0,))


def algorithm2_sublinear(
    inst: OutlierInstance, params: BiCriteriaParams, rng: RngLike = None, *, final: bool = True
) -> SolutionReport:
    """One trial of the sub-linear bi-criteria algorithm.

    Same loop as :func:`algorithm1_linear` with the far point drawn by
    uniform-adaptive sampling and ``l_i`` replaced by the sandwich estimate.
    The trial-phase counter depends only on the sample sizes, ``z`` and the
    inner solver, never on ``n``; ``final=False`` skips the coverage scan.
    """
    res = _trial_sublinear(inst, params, rng)
    return build_report(inst.P, BALL, res, res.counter.copy(), 1, final=final, origin=(0,))


algorithm1_linear.trial = _trial_linear
algorithm1_linear.kind = "linear"
algorithm2_sublinear.trial = _trial_sublinear
algorithm2_sublinear.kind = "sublinear"


def theory_repeats(kind: str, gamma: float, params: BiCriteriaParams) -> tuple[int, float | None]:
    """Repetition count from the success-probability analysis.

    ``"linear"``: ``ceil(c3/(1-gamma) (1+1/delta)^z)``.  ``"sublinear"``:
    ``N = ceil(c3/(1-gamma) ((3+3/delta)/(1-eta1))^z)`` together with the
    matching ``eta2 = 1/(4 z N)``.  Computed in log space so huge counts do
    not overflow.
    """
    z, d, c3 = int(params.z), params.delta, params.c3
    if kind == "linear":
        lg = math.log(c3 / (1.0 - gamma)) + z * math.log(1.0 + 1.0 / d)
        eta2 = None
    elif kind == "sublinear":
        lg = math.log(c3 / (1.0 - gamma)) + z * math.log((3.0 + 3.0 / d) / (1.0 - params.eta1))
    else:
        raise InputError(f"unknown solver kind {kind!r}")
    N = safe_ceil(math.exp(lg)) if lg < 700 else 10**300
    if kind == "sublinear":
        eta2 = 1.0 / (4.0 * z * N)
    return N, eta2


def repeat_best(
    solver,
    inst: OutlierInstance,
    params: BiCriteriaParams,
    rng: RngLike = None,
    *,
    final: bool = True,
    workers: int | None = None,
) -> SolutionReport:
    """Best of ``params.repeats`` independent trials of ``solver``.

    Repetition ``r`` uses stream id ``base + r``.  With ``params.theory`` the
    count comes from :func:`theory_repeats`; counts above ``params.budget``
    raise :class:`BudgetError` before any work.  The winner is the smallest
    (estimated) size, smaller repetition id on ties.
    """
    kind = getattr(solver, "kind", None)
    trial = getattr(solver, "trial", None)
    if trial is None:
        raise InputError("solver must be algorithm1_linear or algorithm2_sublinear")
    repeats = int(params.repeats)
    if params.theory:
        repeats, eta2 = theory_repeats(kind, inst.gamma, params)
        check_budget(repeats, params.budget)
        if eta2 is not None:
            params = params.replace(eta2=eta2)
    win, win_id, total, _ = run_repeats(lambda s: trial(inst, params, s), repeats, rng, workers=workers)
    rep = build_report(inst.P, BALL, win, total, repeats, final=final, origin=(win_id,))
    rep.extra["winner_repetition"] = win_id
    rep.extra["trial_counter"] = win.counter.copy()
    return rep
