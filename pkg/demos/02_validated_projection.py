"""
Validating the projection on verified accounts
==============================================

Two verified accounts are linked when they share more retweeters than the
null model predicts. Each pair gets a Poisson-binomial tail probability and
the whole set of tests is corrected with Benjamini-Hochberg.
"""
import numpy as np

from swingnet.bicm import solve_bicm
from swingnet.bigraph import degrees
from swingnet.projval import bh_fdr, pvalue_poisson_binomial, validate_projection
from swingnet.synthgen import PlantedBipartiteSpec, gen_planted_bipartite

###############################################################################
# The tail probability for a handful of heterogeneous Bernoulli draws.
print("P(V >= 2) for (0.1, 0.2, 0.7):", round(pvalue_poisson_binomial([0.1, 0.2, 0.7], 2), 12))

###############################################################################
# Benjamini-Hochberg on four p-values at level 0.05 keeps the first two.
accepted, threshold = bh_fdr([0.01, 0.02, 0.04, 0.5], 0.05)
print("accepted:", accepted.tolist(), "threshold:", threshold)

###############################################################################
# Two planted blocks: the validated edges fall inside the blocks.
planted = gen_planted_bipartite(PlantedBipartiteSpec(((40, 400), (40, 400)), 0.3, 0.02, rng_seed=1))
g = planted.graph
proj = validate_projection(g, solve_bicm(degrees(g)), fdr_level=0.05)
blk = planted.top_block
intra = sum(blk[i] == blk[j] for i, j in proj.edge_set())
print(f"{len(proj.edges)} of {proj.tested} tested pairs validated, {intra} inside a block")
print(f"BH threshold {proj.bh_threshold:.3g}")
