"""Chance-constrained monotone submodular maximization toolkit."""

from .algorithms import (AlgoConfig, Archive, RunRecord, greedy_run, gsemo_run,
                         max_safe_cardinality, max_safe_expected_weight,
                         nsga2_run)
from .fitness import (Dominance, Formulation, ObjectivePair, Subset, dominates,
                      eval_g1, eval_g1_hat, eval_g2)
from .oracle import OracleResult, brute_force_optimum, empirical_violation_probability
from .problems import (CoverageInstance, InfluenceInstance, coverage_value,
                       generate_im_graph, graph_to_coverage, influence_spread,
                       parse_dimacs_edges, random_coverage_instance)
from .weights import (BoundKind, WeightModel, chebyshev_bound, chernoff_bound,
                      expected_weight, sample_weight,
                      surrogate_violation_probability)

__all__ = [
    "AlgoConfig", "Archive", "BoundKind", "CoverageInstance", "Dominance",
    "Formulation", "InfluenceInstance", "ObjectivePair", "OracleResult",
    "RunRecord", "Subset", "WeightModel", "brute_force_optimum",
    "chebyshev_bound", "chernoff_bound", "coverage_value", "dominates",
    "empirical_violation_probability", "eval_g1", "eval_g1_hat", "eval_g2",
    "expected_weight", "generate_im_graph", "graph_to_coverage", "greedy_run",
    "gsemo_run", "influence_spread", "max_safe_cardinality",
    "max_safe_expected_weight", "nsga2_run", "parse_dimacs_edges",
    "random_coverage_instance", "sample_weight",
    "surrogate_violation_probability",
]

__version__ = "0.1.0"
