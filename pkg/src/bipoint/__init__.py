"""Bi-point rounding algorithms for k-median, with certified factor bounds."""

from .instances import (
    BiPointSolution,
    MetricInstance,
    OpenSet,
    ValidationReport,
    connection_cost,
    read_instance,
    synthesize_random_bipoint,
    validate_bipoint,
    write_instance,
)
from .partition import (
    FacilityPartition,
    StarForest,
    build_partition,
    build_stars,
    classify_clients,
    class_aggregates,
    g_value,
)
from .rounding import fractional_budget, srdr, star_round, sr_cost_bound

__all__ = [
    "BiPointSolution",
    "MetricInstance",
    "OpenSet",
    "ValidationReport",
    "connection_cost",
    "read_instance",
    "synthesize_random_bipoint",
    "validate_bipoint",
    "write_instance",
    "FacilityPartition",
    "StarForest",
    "build_partition",
    "build_stars",
    "classify_clients",
    "class_aggregates",
    "g_value",
    "fractional_budget",
    "srdr",
    "star_round",
    "sr_cost_bound",
]

__version__ = "0.1.0"
