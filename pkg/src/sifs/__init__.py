"""Suzuki iterated function systems: contraction checks, the Hausdorff
metric on finite compact sets, and attractor iteration."""

__version__ = "0.1.0"

from .engine import (
    SIFS,
    AttractorCertificate,
    attract,
    check_suzuki_hyperspace,
    estimate_hyperspace_factor,
    hutchinson_apply,
    iterate_attractor,
)
from .hyperspace import (
    CompactSet,
    directed_distance,
    hausdorff,
    hausdorff_accelerated,
    union,
)
from .maps import AffineMap, ContractionMap, PiecewiseMap, TableMap
from .metric import MetricSpace, distance, validate_metric
from .suzuki import (
    ClassificationReport,
    check_banach,
    check_suzuki,
    classify,
    fixed_point_iterate,
    q_of,
)
from .trace import ConvergenceTrace

__all__ = [
    "AffineMap",
    "AttractorCertificate",
    "ClassificationReport",
    "CompactSet",
    "ContractionMap",
    "ConvergenceTrace",
    "MetricSpace",
    "PiecewiseMap",
    "SIFS",
    "TableMap",
    "attract",
    "check_banach",
    "check_suzuki",
    "check_suzuki_hyperspace",
    "classify",
    "directed_distance",
    "distance",
    "estimate_hyperspace_factor",
    "fixed_point_iterate",
    "hausdorff",
    "hausdorff_accelerated",
    "hutchinson_apply",
    "iterate_attractor",
    "q_of",
    "union",
    "validate_metric",
]
