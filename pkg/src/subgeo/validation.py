"""Monte-Carlo checks of the two sampling lemmas.

Both lemmas are statements about a fixed center and a fixed optimal subset.
The harness fixes a handful of centers on a planted instance, precomputes
``f`` over the whole input once per center and then replays the sampling
step many times using index arithmetic only.  The planted inlier set stands
in for the optimal subset.

* Uniform-adaptive sampling: the event is
  ``|Q' & (P_opt & Q)| / |Q'| >= delta / (3 (1 + delta))``, expected with
  probability at least ``1 - eta1``.
* Sandwich estimate: the event is ``l~ <= l`` together with an exclusion of
  at most ``((1+delta)^2/(1-delta)) gamma n`` points, expected with
  probability at least ``1 - eta2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geometry import RngLike, as_generator
from .mex import BallFamily, ShapeFamily, _coords, _split
from .model import BiCriteriaParams, SamplingPlan, sandwich_exclusion_factor

__all__ = [
    "MonteCarloResult",
    "DEFAULT_GRID",
    "lemma1_montecarlo",
    "lemma2_montecarlo",
    "planted_setting",
    "run_suite",
    "format_table",
]

DEFAULT_GRID = ((0.1, 0.5, 0.1), (0.05, 0.25, 0.1), (0.2, 0.3, 0.2))
_CHUNK = 256


@dataclass
class MonteCarloResult:
    lemma: str
    family: str
    gamma: float
    delta: float
    eta: float
    trials: int
    successes: int
    bound: float
    margin: float
    extra: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def passed(self) -> bool:
        return self.rate >= self.bound - self.margin


def _prep(P, centers, family):
    X = _coords(P)
    if not len(centers):
        raise InputError("need at least one center")
    F = [np.asarray(family.f(c, X), dtype=np.float64) for c in centers]
    return X, F


def _per_center(trials: int, k: int):
    base, rem = divmod(int(trials), k)
    return [base + (i < rem) for i in range(k)]


def lemma1_montecarlo(
    P,
    inliers,
    gamma: float,
    params: BiCriteriaParams,
    centers,
    trials: int = 10_000,
    *,
    family: ShapeFamily | None = None,
    rng: RngLike = None,
    margin: float = 0.03,
) -> MonteCarloResult:
    """Empirical frequency of the uniform-adaptive sampling event.

    Also records ``hit_rate``, how often the returned point lies in
    ``P_opt & Q``, next to its bound ``(1 - eta1) delta / (3 (1 + delta))``.
    """
    family = family or BallFamily()
    X, F = _prep(P, centers, family)
    n = X.shape[0]
    plan = SamplingPlan.build(n, gamma, params)
    if plan.exact_uas:
        raise InputError(f"n' = {plan.n_prime} >= n = {n}: the lemma is vacuous in exact mode")
    good = np.zeros(n, dtype=bool)
    good[np.asarray(inliers, dtype=np.int64)] = True
    g = as_generator(rng)
    thr = params.delta / (3.0 * (1.0 + params.delta))
    tp = plan.t_prime
    ok = hits = 0
    ratios = []
    for fv, cnt in zip(F, _per_center(trials, len(F))):
        Q, _ = _split(fv, plan.t)
        inQ = np.zeros(n, dtype=bool)
        inQ[Q] = True
        target = good & inQ
        done = 0
        while done < cnt:
            m = min(_CHUNK, cnt - done)
            A = g.integers(0, n, size=(m, plan.n_prime))
            fa = fv[A]
            pos = np.argpartition(-fa, tp - 1, axis=1)[:, :tp]
            sel = np.take_along_axis(A, pos, axis=1)
            frac = target[sel].sum(axis=1) / tp
            ok += int(np.count_nonzero(frac >= thr))
            pick = sel[np.arange(m), g.integers(0, tp, size=m)]
            hits += int(np.count_nonzero(target[pick]))
            ratios.append(frac)
            done += m
    r = np.concatenate(ratios)
    return MonteCarloResult(
        "1", family.name, gamma, params.delta, params.eta1, int(trials), ok, 1.0 - params.eta1, margin,
        {
            "threshold": thr,
            "hit_rate": hits / trials,
            "hit_bound": (1.0 - params.eta1) * thr,
            "mean_fraction": float(r.mean()),
            "n_prime": plan.n_prime,
            "t_prime": tp,
        },
    )


def lemma2_montecarlo(
    P,
    gamma: float,
    params: BiCriteriaParams,
    centers,
    trials: int = 10_000,
    *,
    family: ShapeFamily | None = None,
    rng: RngLike = None,
    margin: float = 0.03,
) -> MonteCarloResult:
    """Empirical frequency of the sandwich event.

    Exclusion is counted as the number of points ranked strictly above the
    witness under ``f``; this equals ``|P \\ x(c, l~)|`` for families whose
    minimal size is monotone in ``f`` (all shipped families).  Settings
    with ``delta >= 1/3`` lie outside the lemma's precondition and are
    flagged in ``extra``.
    """
    family = family or BallFamily()
    X, F = _prep(P, centers, family)
    n = X.shape[0]
    plan = SamplingPlan.build(n, gamma, params)
    if plan.exact_sandwich:
        raise InputError(f"n'' = {plan.n_dprime} >= n = {n}: the lemma is vacuous in exact mode")
    g = as_generator(rng)
    cap = sandwich_exclusion_factor(params.delta) * gamma * n
    n2, t2 = plan.n_dprime, plan.t_dprime
    kth = n2 - (t2 + 1)
    ok = under = within = 0
    for c, fv, cnt in zip(centers, F, _per_center(trials, len(F))):
        _, j0 = _split(fv, plan.t)
        l = float(family.size_from_f(c, fv[j0 : j0 + 1], X[j0 : j0 + 1])[0])
        srt = np.sort(fv)
        done = 0
        while done < cnt:
            m = min(_CHUNK, cnt - done)
            B = g.integers(0, n, size=(m, n2))
            fb = fv[B]
            pos = np.argpartition(fb, kth, axis=1)[:, kth]
            w = B[np.arange(m), pos]
            fw = fv[w]
            lt = family.size_from_f(c, fw, X[w])
            excl = n - np.searchsorted(srt, fw, side="right")
            a = lt <= l
            b = excl <= cap
            under += int(a.sum())
            within += int(b.sum())
            ok += int(np.count_nonzero(a & b))
            done += m
    return MonteCarloResult(
        "2", family.name, gamma, params.delta, params.eta2, int(trials), ok, 1.0 - params.eta2, margin,
        {
            "under_rate": under / trials,
            "exclusion_rate": within / trials,
            "exclusion_cap": cap,
            "n_dprime": n2,
            "t_dprime": t2,
            "outside_precondition": not params.delta < 1.0 / 3.0,
        },
    )


def planted_setting(kind: str, n: int, gamma: float, *, seed: int = 0, d: int = 10, n_centers: int = 8):
    """``(inst, family, centers)`` for a planted instance of ``kind``.

    Centers are built from random inliers (and, for balls, the planted
    center) so that they resemble the centers a trial actually visits.
    """
    from .flat import Flat, SlabFamily
    from .instances import gen_planted_kcenter, gen_planted_line, gen_planted_meb
    from .kcenter import KBallFamily

    g = as_generator(seed + 1)
    if kind == "ball":
        inst = gen_planted_meb(n, d, gamma, seed=seed)
        fam = BallFamily()
        X = inst.P.coords
        pick = g.choice(inst.truth.inliers, size=n_centers - 1, replace=False)
        centers = [inst.truth.params["center"]] + [X[i].copy() for i in pick]
    elif kind == "kball":
        inst = gen_planted_kcenter(n, d, 2, gamma, seed=seed)
        fam = KBallFamily(2)
        X = inst.P.coords
        centers = [X[g.choice(inst.truth.inliers, size=2, replace=False)] for _ in range(n_centers)]
    elif kind == "slab":
        inst = gen_planted_line(n, d, gamma, seed=seed)
        fam = SlabFamily(1)
        X = inst.P.coords
        centers = []
        while len(centers) < n_centers:
            i, j = g.choice(inst.truth.inliers, size=2, replace=False)
            if np.any(X[i] != X[j]):
                centers.append(Flat.through(X[i], X[j]))
    else:
        raise InputError(f"unknown setting {kind!r}; use ball, kball or slab")
    return inst, fam, centers


def run_suite(
    lemma: int,
    grid=DEFAULT_GRID,
    trials: int = 10_000,
    *,
    n: int = 100_000,
    kind: str = "ball",
    seed: int = 0,
    d: int = 10,
    margin: float = 0.03,
) -> list[MonteCarloResult]:
    """Run one lemma over a grid of ``(gamma, delta, eta)`` settings."""
    if lemma not in (1, 2):
        raise InputError("lemma must be 1 or 2")
    out = []
    for k, (gamma, delta, eta) in enumerate(grid):
        inst, fam, centers = planted_setting(kind, n, gamma, seed=seed + k, d=d)
        if lemma == 1:
            p = BiCriteriaParams(0.5, delta, eta1=eta)
            r = lemma1_montecarlo(inst.P, inst.truth.inliers, gamma, p, centers, trials,
                                  family=fam, rng=seed + 1000 + k, margin=margin)
        else:
            p = BiCriteriaParams(0.5, delta, eta2=eta)
            r = lemma2_montecarlo(inst.P, gamma, p, centers, trials, family=fam,
                                  rng=seed + 1000 + k, margin=margin)
        out.append(r)
    return out


def format_table(results) -> str:
    """Plain-text table: one row per setting with empirical rate and bound."""
    head = f"{'lemma':>5} {'family':>9} {'gamma':>6} {'delta':>6} {'eta':>5} {'trials':>7} " \
           f"{'rate':>7} {'bound':>7} {'pass':>5}"
    rows = [head]
    for r in results:
        rows.append(
            f"{r.lemma:>5} {r.family:>9} {r.gamma:>6.3g} {r.delta:>6.3g} {r.eta:>5.3g} {r.trials:>7d} "
            f"{r.rate:>7.4f} {r.bound - r.margin:>7.4f} {'yes' if r.passed else 'no':>5}"
        )
    return "\n".join(rows)
