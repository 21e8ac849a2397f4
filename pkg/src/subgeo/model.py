"""Parameter records, sampling plans, instances and solver reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InputError
from .geometry import EvalCounter, PointSet, safe_ceil
from .meb import ApproxParams, Ball

__all__ = [
    "BiCriteriaParams",
    "SamplingPlan",
    "PlantedTruth",
    "OutlierInstance",
    "Candidate",
    "SolutionReport",
    "sandwich_exclusion_factor",
    "TwoClassInstance",
]


def _open_unit(name: str, x: float) -> None:
    if not 0.0 < x < 1.0:
        raise InputError(f"{name} must lie in (0, 1), got {x}")


def sandwich_exclusion_factor(delta: float) -> float:
    """``(1+delta)^2 / (1-delta)``: the exclusion blow-up the sandwich
    estimate can cause."""
    return (1.0 + delta) ** 2 / (1.0 - delta)


@dataclass(frozen=True)
class BiCriteriaParams:
    """Inputs of the bi-criteria solvers.

    ``c1``/``c2`` are the constants in the uniform and sandwich sample sizes,
    ``c3`` the constant in the theory-mode repetition counts.  ``z`` defaults
    to ``ceil(2/eps) + 1``.
    """

    epsilon: float
    delta: float
    eta1: float = 0.1
    eta2: float = 0.1
    z: int | None = None
    repeats: int = 1
    c1: float = 24.0
    c2: float = 24.0
    c3: float = 3.0
    theory: bool = False
    budget: int = 10**5

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        _open_unit("delta", self.delta)
        _open_unit("eta1", self.eta1)
        _open_unit("eta2", self.eta2)
        if self.z is None:
            object.__setattr__(self, "z", self.approx.z)
        if int(self.z) < 1:
            raise InputError("z must be a positive integer")
        if int(self.repeats) < 1:
            raise InputError("repeats must be >= 1")
        if min(self.c1, self.c2, self.c3) <= 0:
            raise InputError("sample-size constants must be positive")

    @property
    def approx(self) -> ApproxParams:
        return ApproxParams(self.epsilon)

    @property
    def xi(self) -> float:
        return self.approx.xi

    def replace(self, **kw) -> "BiCriteriaParams":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass(frozen=True)
class SamplingPlan:
    n: int
    gamma: float
    delta: float
    n_prime: int
    n_dprime: int
    t: int
    t_prime: int
    t_dprime: int
    t_dprime_exact: int

    @property
    def exact_uas(self) -> bool:
        return self.n_prime >= self.n

    @property
    def exact_sandwich(self) -> bool:
        return self.n_dprime >= self.n

    @classmethod
    def build(
        cls, n: int, gamma: float, params: BiCriteriaParams, *, linear_only: bool = False
    ) -> "SamplingPlan":
        """Derive the sample sizes for ``n`` points.

        ``linear_only`` skips the checks on the sampled ranks, which the
        linear-time solvers never use.
        """
        if not 0.0 <= gamma < 1.0:
            raise InputError(f"gamma must lie in [0, 1), got {gamma}")
        d = params.delta
        if gamma == 0.0:
            # no outliers: every sample size degenerates to the exact scan
            return cls(n, gamma, d, n, n, 0, 0, 0, 0)
        n1 = safe_ceil(params.c1 / (d * gamma) * math.log(1.0 / params.eta1))
        n2 = safe_ceil(params.c2 / (d * d * gamma) * math.log(1.0 / params.eta2))
        t = safe_ceil((1.0 + d) * gamma * n)
        t1 = safe_ceil(1.5 * (1.0 + d) * gamma * n1)
        t2 = safe_ceil((1.0 + d) ** 2 * gamma * n2)
        t2x = safe_ceil((1.0 + d) ** 2 * gamma * n)
        if t >= n:
            raise InputError(f"t = ceil((1+delta)*gamma*n) = {t} must be < n = {n}")
        if linear_only:
            return cls(n, gamma, d, n1, n2, t, min(t1, n1), min(t2, n2 - 1), min(t2x, n - 1))
        if t1 > n1:
            raise InputError(f"t' = {t1} exceeds n' = {n1}; gamma too large for delta")
        if t2 >= n2:
            raise InputError(f"t'' = {t2} must be < n'' = {n2}")
        return cls(n, gamma, d, n1, n2, t, t1, t2, min(t2x, n - 1))


@dataclass(frozen=True)
class PlantedTruth:
    """Known feasible structure of a synthetic instance.

    ``size`` is a feasibility upper bound on the optimum (radius, width) or,
    for the SVM kinds, a margin lower bound.
    """

    kind: str
    params: dict
    inliers: np.ndarray
    size: float

    def __post_init__(self):
        object.__setattr__(self, "inliers", np.asarray(self.inliers, dtype=np.int64))


@dataclass
class OutlierInstance:
    P: PointSet
    gamma: float
    truth: PlantedTruth | None = None

    def __post_init__(self):
        if not isinstance(self.P, PointSet):
            self.P = PointSet(self.P)
        if not 0.0 <= self.gamma < 1.0:
            raise InputError(f"gamma must lie in [0, 1), got {self.gamma}")
        if safe_ceil((1.0 - self.gamma) * self.P.n) < 1:
            raise InputError("instance must keep at least one inlier")
        if self.truth is not None:
            expected = self.P.n - round(self.gamma * self.P.n)
            if self.truth.inliers.size != expected:
                raise InputError(
                    f"planted inlier count {self.truth.inliers.size} != (1-gamma)n = {expected}"
                )

    @property
    def n(self) -> int:
        return self.P.n

    @property
    def d(self) -> int:
        return self.P.d


@dataclass
class Candidate:
    center: Any
    size: float
    round: int
    origin: tuple = ()


@dataclass
class SolutionReport:
    """Winner of a solver run plus telemetry.

    ``counter`` covers the trial phase only; ``scan_counter`` the optional
    final full scan that fills ``covered``/``excluded``.
    """

    center: Any
    size: float
    covered: int | None
    excluded: int | None
    counter: EvalCounter
    repetitions_used: int
    candidate: Candidate | None = None
    scan_counter: EvalCounter = field(default_factory=EvalCounter)
    fallbacks: dict = field(default_factory=dict)
    family: str = "ball"
    extra: dict = field(default_factory=dict)

    @property
    def ball(self) -> Ball:
        return Ball(np.asarray(self.center), float(self.size))

    @property
    def n(self) -> int | None:
        if self.covered is None:
            return None
        return self.covered + self.excluded


@dataclass
class TwoClassInstance:
    """Two labelled point sets with per-class outlier fractions."""

    P1: PointSet
    P2: PointSet
    gamma1: float
    gamma2: float
    truth1: PlantedTruth | None = None
    truth2: PlantedTruth | None = None
    margin: float | None = None

    def __post_init__(self):
        if not isinstance(self.P1, PointSet):
            self.P1 = PointSet(self.P1)
        if not isinstance(self.P2, PointSet):
            self.P2 = PointSet(self.P2)
        if self.P1.d != self.P2.d:
            raise InputError(f"class dimensions differ: {self.P1.d} vs {self.P2.d}")
        for name, g in (("gamma1", self.gamma1), ("gamma2", self.gamma2)):
            if not 0.0 <= g < 1.0:
                raise InputError(f"{name} must lie in [0, 1), got {g}")
