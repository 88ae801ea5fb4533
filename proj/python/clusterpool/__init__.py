"""Cluster-based data pooling for many small data-driven problems."""

from ._core import (
    MseCost,
    NewsvendorCost,
    apriori_params,
    bisect_cluster,
    data_driven_params,
    default_grid,
    expected_cost_mse,
    gamma_within_cluster_d0,
    gen_newsvendor,
    gen_two_cluster,
    loo_scores,
    loo_select_alpha,
    misclassification_bound,
    no_benefit_predicate,
    run_cli,
    shrunken_decision,
    shrunken_solution,
)

__all__ = [
    "MseCost",
    "NewsvendorCost",
    "apriori_params",
    "bisect_cluster",
    "data_driven_params",
    "default_grid",
    "expected_cost_mse",
    "gamma_within_cluster_d0",
    "gen_newsvendor",
    "gen_two_cluster",
    "loo_scores",
    "loo_select_alpha",
    "misclassification_bound",
    "no_benefit_predicate",
    "run_cli",
    "shrunken_decision",
    "shrunken_solution",
]
