"""
Fitting the bipartite configuration model
=========================================

A bipartite graph of verified accounts (top) and the unverified accounts
that retweet them (bottom) is summarised by its two degree sequences. The
maximum-entropy ensemble constrained on those degrees assigns every
(top, bottom) pair an independent link probability.
"""
import numpy as np

from swingnet.bicm import expected_degrees, log_likelihood, solve_bicm
from swingnet.bigraph import build_bipartite, degrees

###############################################################################
# A small random incidence, built from opaque account names.
rng = np.random.default_rng(0)
pairs = [(f"v{i}", f"u{a}") for i in range(30) for a in range(300) if rng.random() < 0.05 + 0.01 * (i % 5)]
g, top_ids, bottom_ids = build_bipartite(pairs)
d = degrees(g)
print(f"{g.top_count} verified, {g.bottom_count} unverified, {g.n_edges} edges")

###############################################################################
# Solve for the multipliers. Expected degrees reproduce the observed ones.
sol = solve_bicm(d)
top, bottom = expected_degrees(sol)
print(f"converged in {sol.iterations} iterations, residual {sol.residual:.1e}")
print("largest degree error:", max(np.abs(top - d.top).max(), np.abs(bottom - d.bottom).max()))

###############################################################################
# Accounts with more retweets get larger link probabilities.
p = sol.probabilities()
busiest = int(np.argmax(d.top))
print(f"top node {top_ids.ids[busiest]} (degree {d.top[busiest]}): mean link probability {p[busiest].mean():.3f}")
print(f"log-likelihood of the observed graph: {log_likelihood(sol, g):.2f}")
