"""Core-set minimum enclosing ball with an approximate inner solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InputError
from .geometry import EvalCounter, PointSet, RngLike, as_generator, safe_ceil

__all__ = ["ApproxParams", "Ball", "CoreSetResult", "approx_center", "coreset_meb"]

INNER_ITER_CAP = 10**6


@dataclass(frozen=True)
class ApproxParams:
    """Accuracy knobs for the core-set construction.

    ``s`` trades inner-solver accuracy against core-set size; the default
    ``eps / (2 + eps)`` gives ``z = ceil(2/eps) + 1``.
    """

    epsilon: float
    s: float | None = None
    inner_iter_cap: int = INNER_ITER_CAP

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.s is None:
            object.__setattr__(self, "s", self.epsilon / (2.0 + self.epsilon))
        if not 0.0 < self.s < 1.0:
            raise InputError(f"s must lie in (0, 1), got {self.s}")
        if self.inner_iter_cap < 1:
            raise InputError("inner_iter_cap must be positive")

    @property
    def xi(self) -> float:
        return self.s * self.epsilon / (1.0 + self.epsilon)

    @property
    def z(self) -> int:
        return safe_ceil(2.0 / ((1.0 - self.s) * self.epsilon))

    @property
    def required_inner_iters(self) -> int:
        return safe_ceil(1.0 / self.xi**2)

    @property
    def inner_iters(self) -> int:
        return min(self.required_inner_iters, self.inner_iter_cap)

    @property
    def inner_capped(self) -> bool:
        return self.required_inner_iters > self.inner_iter_cap


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise InputError(f"ball radius must be non-negative, got {self.radius}")

    def contains(self, P: PointSet, rtol: float = 0.0) -> np.ndarray:
        d = np.sqrt(kernels.sq_dists(P.coords, self.center))
        return d <= self.radius * (1.0 + rtol)


def approx_center(
    T,
    xi: float,
    *,
    counter: EvalCounter | None = None,
    max_iters: int = INNER_ITER_CAP,
) -> np.ndarray:
    """Approximate MEB center of ``T`` within ``xi * Rad(T)`` of the exact one.

    Runs ``ceil(1/xi^2)`` steps of ``c <- c + (p_far - c) / (i + 1)`` starting
    from ``T[0]``.  Each step scans all of ``T``.
    """
    X = T.coords if isinstance(T, PointSet) else np.ascontiguousarray(T, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError("approx_center needs at least one point")
    if not 0.0 < xi < 1.0:
        raise InputError(f"xi must lie in (0, 1), got {xi}")
    iters = min(safe_ceil(1.0 / xi**2), int(max_iters))
    if X.shape[0] == 1:
        return X[0].copy()
    if counter is not None:
        counter.tick(iters * X.shape[0], 0)
    return kernels.bc_center(X, iters)


@dataclass
class CoreSetResult:
    """Output of :func:`coreset_meb`.  Unpacks as ``(ball, core)``."""

    ball: Ball
    core: list[int]
    rounds: int
    core_radii: list[float] = field(default_factory=list)
    stopped_early: bool = False
    inner_capped: bool = False

    def __iter__(self):
        return iter((self.ball, self.core))


def coreset_meb(
    P: PointSet,
    params: ApproxParams,
    rng: RngLike = None,
    *,
    randomized: bool = False,
    counter: EvalCounter | None = None,
) -> CoreSetResult:
    """(1+eps)-approximate MEB of ``P`` through a greedy core-set.

    Each round computes the approximate center ``o`` of the core-set, finds
    the farthest input point ``q`` and stops once ``|q - o|`` is within
    ``(1+eps)`` of a lower bound on ``Rad(T)``; otherwise ``q`` joins the
    core-set.  At most ``params.z`` rounds run, so ``|core| <= z``.
    """
    if not isinstance(P, PointSet):
        P = PointSet(P)
    X = P.coords
    eps, xi = params.epsilon, params.xi
    start = int(as_generator(rng).integers(P.n)) if randomized else 0
    core = [start]
    radii: list[float] = []
    stopped = False
    best: Ball | None = None
    for rnd in range(1, params.z + 1):
        o = approx_center(X[core], xi, counter=counter, max_iters=params.inner_iter_cap)
        d2 = kernels.sq_dists(X, o)
        if counter is not None:
            counter.tick(P.n)
        q = int(np.argmax(d2))
        dq = math.sqrt(d2[q])
        r_core = math.sqrt(float(np.max(d2[core])))
        radii.append(r_core)
        # every round yields an enclosing ball; some round within z is (1+eps)-good
        if best is None or dq < best.radius:
            best = Ball(o, dq)
        # r_core <= (1 + xi) Rad(T) <= (1 + xi) Rad(P): a valid lower bound on Rad(P)
        r_low = r_core / (1.0 + xi)
        if dq <= (1.0 + eps) * r_low or dq == 0.0:
            stopped = True
            break
        if rnd == params.z:
            break
        core.append(q)
    return CoreSetResult(
        ball=best,
        core=core,
        rounds=len(radii),
        core_radii=radii,
        stopped_early=stopped,
        inner_capped=params.inner_capped,
    )
