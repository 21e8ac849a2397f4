"""Sub-linear bi-criteria algorithms for geometric optimization with outliers.

Minimum enclosing ball (core-set and with outliers), the generic shape
framework and its k-center, line-fitting and SVM instantiations, reference
oracles, planted generators and a Monte-Carlo harness for the sampling
lemmas.
"""

from ._accel import BACKEND
from .errors import BudgetError, FormatError, InfeasibleError, InputError, PreconditionError, SubgeoError
from .flat import Flat, FlatParams, SlabFamily, dist_flat, flat_fit_outliers, init_line
from .geometry import EvalCounter, PointSet, RngStream, dist, kth_largest
from .kcenter import KBallFamily, kcenter_solve, kcenter_trial
from .meb import ApproxParams, Ball, approx_center, coreset_meb
from .mex import (
    BallFamily,
    ShapeFamily,
    check_family_laws,
    farthest_set,
    generalized_sandwich,
    generalized_uas,
    threshold_size,
)
from .model import (
    BiCriteriaParams,
    Candidate,
    OutlierInstance,
    SamplingPlan,
    SolutionReport,
    TwoClassInstance,
)
from .outliers import (
    algorithm1_linear,
    algorithm2_sublinear,
    repeat_best,
    sandwich_estimate,
    theory_repeats,
    uniform_adaptive_sample,
)
from .svm import HalfSpaceFamily, MarginReport, gilbert, svm1_outliers, svm2_outliers

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ApproxParams",
    "Ball",
    "BallFamily",
    "BiCriteriaParams",
    "BudgetError",
    "Candidate",
    "EvalCounter",
    "Flat",
    "FlatParams",
    "FormatError",
    "HalfSpaceFamily",
    "InfeasibleError",
    "InputError",
    "KBallFamily",
    "MarginReport",
    "OutlierInstance",
    "PointSet",
    "PreconditionError",
    "RngStream",
    "SamplingPlan",
    "ShapeFamily",
    "SlabFamily",
    "SolutionReport",
    "SubgeoError",
    "TwoClassInstance",
    "algorithm1_linear",
    "algorithm2_sublinear",
    "approx_center",
    "check_family_laws",
    "coreset_meb",
    "dist",
    "dist_flat",
    "farthest_set",
    "flat_fit_outliers",
    "generalized_sandwich",
    "generalized_uas",
    "gilbert",
    "init_line",
    "kcenter_solve",
    "kcenter_trial",
    "kth_largest",
    "repeat_best",
    "sandwich_estimate",
    "svm1_outliers",
    "svm2_outliers",
    "theory_repeats",
    "threshold_size",
    "uniform_adaptive_sample",
]
