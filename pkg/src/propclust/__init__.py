"""Proportionally fair non-centroid clustering."""

from .audit import (
    AuditReport,
    DeviationWitness,
    Kind,
    audit_fjr,
    bicriteria_core_check,
    core_ratio,
    exact_core_approximation,
    exact_fjr_approximation,
    fjr_ratio,
    symmetry_reduced_core_emptiness,
)
from .baselines import SeededRun, kmeans_pp, kmedoids, objective_cost, objective_kmeans, objective_kmedoids
from .cohesive import (
    Subroutine,
    greedy_capture,
    greedy_cohesive_clustering,
    most_cohesive_cluster_exact,
    smallest_agent_ball,
    smallest_diameter,
)
from .metric import (
    INF,
    Clustering,
    LossKind,
    LossModel,
    MetricInstance,
    ProblemSpec,
    loss,
    metric_from_points,
    validate_metric,
)

__version__ = "0.1.0"
