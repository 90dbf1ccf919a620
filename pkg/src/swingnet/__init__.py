"""Bipartite configuration model, validated projections and a swing-state tweet pipeline."""
from .bicm import BicmSolution, SolverConfig, link_probability, log_likelihood, solve_bicm
from .bigraph import BipartiteGraph, DegreeSequence, WeightedGraph, build_bipartite, degrees
from .community import CommunityAssignment, louvain, normalized_mutual_info, propagate_labels
from .projval import ValidatedProjection, bh_fdr, pvalue_poisson_binomial, validate_projection

__version__ = "0.1.0"

__all__ = [
    "BicmSolution", "BipartiteGraph", "CommunityAssignment", "DegreeSequence", "SolverConfig",
    "ValidatedProjection", "WeightedGraph", "bh_fdr", "build_bipartite", "degrees", "link_probability",
    "log_likelihood", "louvain", "normalized_mutual_info", "propagate_labels", "pvalue_poisson_binomial",
    "solve_bicm", "validate_projection",
]
