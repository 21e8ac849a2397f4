"""k-center clustering with outliers.

The trial keeps one core-set per cluster.  Every round ranks the input by
the distance to the nearest current center, records the candidate
threshold radius and assigns a far point to a cluster chosen by a label
sequence.  Labels are either enumerated depth-first (all ``k^z_k``
sequences) or drawn at random.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import InputError
from .geometry import EvalCounter, RngLike, as_generator, safe_ceil
from .meb import approx_center
from .mex import ShapeFamily, _coords, _farthest_split, adaptive_draw, sandwich_draw
from .model import BiCriteriaParams, Candidate, OutlierInstance, SamplingPlan, SolutionReport
from .outliers import build_report
from .trials import TrialResult, check_budget, run_repeats

__all__ = [
    "KBallFamily",
    "kcenter_rounds",
    "kcenter_branches",
    "kcenter_trial",
    "kcenter_solve",
    "kcenter_theory_repeats",
]


class KBallFamily(ShapeFamily):
    """Unions of at most ``k`` equal-radius balls.  The center is an
    ``(m, d)`` array of ball centers with ``1 <= m <= k``."""

    name = "kball"

    def __init__(self, k: int):
        if k < 1:
            raise InputError("k must be >= 1")
        self.k = int(k)

    def _C(self, c) -> np.ndarray:
        C = np.atleast_2d(np.asarray(c, dtype=np.float64))
        if not 1 <= C.shape[0] <= self.k:
            raise InputError(f"need between 1 and {self.k} centers, got {C.shape[0]}")
        return np.ascontiguousarray(C)

    def f(self, c, X):
        return np.sqrt(kernels.min_sq_dists(X, self._C(c)))

    def min_enclosing_size(self, c, X):
        return self.f(c, X)

    def size_from_f(self, c, fvals, X):
        return fvals

    def contains(self, c, size, X):
        return self.f(c, X) <= size

    def random_center(self, rng, d):
        return rng.normal(size=(int(rng.integers(1, self.k + 1)), d)) * 3.0

    def __repr__(self):
        return f"KBallFamily(k={self.k})"


def kcenter_rounds(k: int, params: BiCriteriaParams) -> int:
    """``z_k = k (ceil(2/eps) + 1)``."""
    return int(k) * int(params.z)


def kcenter_branches(k: int, params: BiCriteriaParams) -> int:
    """Number of label sequences in enumerate mode, ``k^z_k``."""
    return int(k) ** kcenter_rounds(k, params)


def _copy_gen(g: np.random.Generator) -> np.random.Generator:
    h = np.random.Generator(type(g.bit_generator)())
    h.bit_generator.state = g.bit_generator.state
    return h


def _trial(
    X: np.ndarray,
    k: int,
    params: BiCriteriaParams,
    plan: SamplingPlan,
    mode: str,
    guess,
    rng: RngLike,
) -> TrialResult:
    ap = params.approx
    fam = KBallFamily(k)
    linear = mode == "linear"
    zk = kcenter_rounds(k, params)
    g = as_generator(rng)
    counter = EvalCounter()
    res = TrialResult(None, counter=counter)
    res.fallbacks = {
        "uas_exact": (not linear) and plan.exact_uas,
        "sandwich_exact": (not linear) and plan.exact_sandwich,
        "inner_capped": ap.inner_capped,
    }
    n = X.shape[0]
    if isinstance(guess, str):
        if guess not in ("enumerate", "random"):
            raise InputError(f"guess must be 'enumerate', 'random' or a label sequence, got {guess!r}")
    else:
        guess = [int(x) for x in guess]
        if len(guess) < zk - 1 or any(not 0 <= x < k for x in guess):
            raise InputError(f"a label sequence needs {zk - 1} labels in [0, {k})")
    start = int(g.integers(n))
    slots = [[start]] + [[] for _ in range(k - 1)]
    cents = [X[start].copy()] + [None] * (k - 1)

    def node(slots, cents, depth, g, path):
        C = np.vstack([c for c in cents if c is not None])
        if linear:
            Q, size, j0 = _farthest_split(X, C, plan.t, fam, counter)
            if not Q.size:
                Q = np.array([j0])
            q = int(Q[g.integers(Q.size)])
        else:
            q = adaptive_draw(X, C, plan, fam, g, counter).index
            size = sandwich_draw(X, C, plan, fam, g, counter).size
        cand = Candidate(C, size, depth + 1, tuple(path))
        res.candidates.append(cand)
        if res.best is None or size < res.best.size:
            res.best = cand
        if depth + 1 == zk:
            return  # the label of the last added point has no effect
        if guess == "enumerate":
            labels = range(k)
        elif guess == "random":
            labels = [int(g.integers(k))] if k > 1 else [0]
        else:
            labels = [guess[depth]]
        for lab in labels:
            gc = _copy_gen(g) if len(labels) > 1 else g
            j = lab if cents[lab] is not None else next(i for i, c in enumerate(cents) if c is None)
            s2 = list(slots)
            s2[j] = slots[j] + [q]
            c2 = list(cents)
            c2[j] = approx_center(X[s2[j]], ap.xi, counter=counter, max_iters=ap.inner_iter_cap)
            node(s2, c2, depth + 1, gc, path + [lab])

    node(slots, cents, 0, g, [])
    res.extra["branches"] = kcenter_branches(k, params) if guess == "enumerate" else 1
    return res


def kcenter_trial(
    inst: OutlierInstance,
    k: int,
    params: BiCriteriaParams,
    guess="enumerate",
    rng: RngLike = None,
    *,
    mode: str = "linear",
    final: bool = True,
) -> SolutionReport:
    """One randomized trial (all branches in enumerate mode).

    ``guess`` is ``"enumerate"``, ``"random"`` or an explicit label
    sequence.  A label that points at an empty slot opens the lowest empty
    slot, so clusters are created first-come.  Returns the candidate with
    the smallest (estimated) threshold radius over all rounds and branches.
    """
    if mode not in ("linear", "sublinear"):
        raise InputError(f"mode must be 'linear' or 'sublinear', got {mode!r}")
    if guess == "enumerate":
        check_budget(kcenter_branches(k, params), params.budget, "branches")
    X = _coords(inst.P)
    plan = SamplingPlan.build(inst.n, inst.gamma, params, linear_only=mode == "linear")
    res = _trial(X, k, params, plan, mode, guess, rng)
    rep = build_report(inst.P, KBallFamily(k), res, res.counter.copy(), 1, final=final, origin=(0,))
    rep.extra["branches"] = res.extra["branches"]
    return rep


def kcenter_theory_repeats(k: int, gamma: float, params: BiCriteriaParams, mode: str = "linear",
                           guess: str = "enumerate") -> int:
    """Theory-mode repetition count ``ceil(c3/(1-gamma) b^z_k)`` (times
    ``k^z_k`` for random guessing), computed in log space."""
    zk = kcenter_rounds(k, params)
    if mode == "linear":
        per = 1.0 + 1.0 / params.delta
    else:
        per = (3.0 + 3.0 / params.delta) / (1.0 - params.eta1)
    lg = math.log(params.c3 / (1.0 - gamma)) + zk * math.log(per)
    if guess == "random":
        lg += zk * math.log(k)
    return safe_ceil(math.exp(lg)) if lg < 700 else 10**300


def kcenter_solve(
    inst: OutlierInstance,
    k: int,
    params: BiCriteriaParams,
    mode: str = "linear",
    guess: str = "enumerate",
    rng: RngLike = None,
    *,
    final: bool = True,
    workers: int | None = None,
) -> SolutionReport:
    """Best of ``params.repeats`` trials.

    Theory mode uses ``ceil(c3/(1-gamma) b^z_k)`` repetitions with
    ``b = 1 + 1/delta`` (linear) or ``(3 + 3/delta)/(1 - eta1)``
    (sub-linear), times ``k^z_k`` for random guessing.  Budget errors are
    raised before any work.
    """
    if mode not in ("linear", "sublinear"):
        raise InputError(f"mode must be 'linear' or 'sublinear', got {mode!r}")
    if guess not in ("enumerate", "random"):
        raise InputError("guess must be 'enumerate' or 'random'")
    branches = kcenter_branches(k, params) if guess == "enumerate" else 1
    repeats = int(params.repeats)
    if params.theory:
        repeats = kcenter_theory_repeats(k, inst.gamma, params, mode, guess)
    check_budget(repeats * branches, params.budget, "branches")
    X = _coords(inst.P)
    plan = SamplingPlan.build(inst.n, inst.gamma, params, linear_only=mode == "linear")
    win, win_id, total, _ = run_repeats(
        lambda s: _trial(X, k, params, plan, mode, guess, s), repeats, rng, workers=workers
    )
    rep = build_report(inst.P, KBallFamily(k), win, total, repeats, final=final, origin=(win_id,))
    rep.extra["branches"] = branches
    rep.extra["winner_repetition"] = win_id
    rep.extra["trial_counter"] = win.counter.copy()
    return rep
