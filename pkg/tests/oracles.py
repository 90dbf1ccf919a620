"""Independent reference computations used as test oracles.

Each one takes a different route from the library code: brute-force
enumeration or the textbook definition, never the optimised algorithm.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize


def random_bipartite_edges(rng, n_top, n_bottom, density):
    adj = rng.random((n_top, n_bottom)) < density
    return adj, np.argwhere(adj)


def poisson_binomial_tail_enum(probs, k) -> float:
    """P(V >= k) by summing over all 2**n outcomes."""
    p = np.asarray(probs, dtype=float)
    n = p.size
    if n == 0:
        return 1.0 if k <= 0 else 0.0
    bits = ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
    weight = np.prod(np.where(bits, p[None, :], 1.0 - p[None, :]), axis=1)
    return float(math.fsum(weight[bits.sum(axis=1) >= k]))


def bh_direct(p_values, q):
    """Benjamini-Hochberg straight from the definition (loop over ranks)."""
    p = list(p_values)
    m = len(p)
    if m == 0:
        return set(), 0.0
    order = sorted(range(m), key=lambda i: p[i])
    cutoff = None
    for r in range(m, 0, -1):
        if p[order[r - 1]] <= r * q / m:
            cutoff = p[order[r - 1]]
            break
    if cutoff is None:
        return set(), 0.0
    return {i for i in range(m) if p[i] <= cutoff}, cutoff


def cooccurrence_brute(adj) -> dict:
    adj = np.asarray(adj, dtype=bool)
    out = {}
    nbrs = [set(np.flatnonzero(row)) for row in adj]
    for i in range(len(nbrs)):
        for j in range(i + 1, len(nbrs)):
            c = len(nbrs[i] & nbrs[j])
            if c:
                out[(i, j)] = c
    return out


def ergm_enumeration(sol, n_top, n_bottom):
    """Sum over every binary matrix of its ERGM weight.

    Free pairs carry ``exp(a * (ln x + ln y)) / (1 + x y)``; pairs fixed by
    peeling carry an indicator of agreement with the forced value. Returns
    ``(total probability, mean top degrees, mean bottom degrees, marginals)``.
    """
    lx, ly = np.asarray(sol.log_x), np.asarray(sol.log_y)
    to, bo = np.asarray(sol.top_order), np.asarray(sol.bottom_order)
    total = 0.0
    mean_top = np.zeros(n_top)
    mean_bottom = np.zeros(n_bottom)
    marg = np.zeros((n_top, n_bottom))
    for bits in itertools.product((0, 1), repeat=n_top * n_bottom):
        a = np.array(bits).reshape(n_top, n_bottom)
        w = 1.0
        for i in range(n_top):
            for j in range(n_bottom):
                if to[i] == -1 and bo[j] == -1:
                    z = lx[i] + ly[j]
                    w *= math.exp(a[i, j] * z) / (1.0 + math.exp(z))
                else:
                    # the node peeled first decides
                    top_first = to[i] != -1 and (bo[j] == -1 or to[i] < bo[j])
                    forced = np.isposinf(lx[i]) if top_first else np.isposinf(ly[j])
                    w *= 1.0 if a[i, j] == int(forced) else 0.0
        total += w
        mean_top += w * a.sum(axis=1)
        mean_bottom += w * a.sum(axis=0)
        marg += w * a
    return total, mean_top, mean_bottom, marg


def bicm_convex_oracle(top, bottom):
    """Fit the BiCM by minimising the convex negative log-likelihood with BFGS.

    Works on the full (unreduced, unpeeled) system, so only degree
    sequences without zero or full degrees are meaningful here.
    """
    top = np.asarray(top, float)
    bottom = np.asarray(bottom, float)
    m, n = top.size, bottom.size

    def f(t):
        u, v = t[:m], t[m:]
        z = u[:, None] + v[None, :]
        val = -(top @ u + bottom @ v) + np.logaddexp(0.0, z).sum()
        p = 1.0 / (1.0 + np.exp(-z))
        grad = np.concatenate([p.sum(axis=1) - top, p.sum(axis=0) - bottom])
        return val, grad

    e = top.sum()
    t0 = np.concatenate([np.log(top / math.sqrt(e)), np.log(bottom / math.sqrt(e))])
    res = minimize(f, t0, jac=True, method="BFGS", options={"gtol": 1e-11, "maxiter": 20000})
    u, v = res.x[:m], res.x[m:]
    return 1.0 / (1.0 + np.exp(-(u[:, None] + v[None, :])))


def modularity_direct(edges, labels, resolution=1.0) -> float:
    """Q = sum_c [w_c / W - resolution * (s_c / 2W)**2] over undirected weighted edges."""
    W = sum(w for _, _, w in edges)
    intra, strength = {}, {}
    for u, v, w in edges:
        strength[labels[u]] = strength.get(labels[u], 0.0) + w
        strength[labels[v]] = strength.get(labels[v], 0.0) + w
        if labels[u] == labels[v]:
            intra[labels[u]] = intra.get(labels[u], 0.0) + w
    return sum(intra.get(c, 0.0) / W - resolution * (s / (2 * W)) ** 2 for c, s in strength.items())
