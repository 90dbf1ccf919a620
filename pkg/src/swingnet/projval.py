"""Statistically validated projection of a bipartite graph onto its top layer.

For every pair of top nodes sharing at least one bottom neighbour, the
observed number of shared neighbours is compared with its distribution under
the BiCM. Under the null model each bottom node ``a`` is a common neighbour
of ``i`` and ``j`` independently with probability ``p[i, a] * p[j, a]``, so
the count is Poisson-binomial. One-sided p-values are then corrected with
Benjamini-Hochberg and the accepted pairs form the validated projection.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .bicm import BicmSolution
from .bigraph import BipartiteGraph, WeightedGraph

EXACT_CUTOFF = 4096


@dataclass(frozen=True)
class CooccurrenceTable:
    """Observed shared-neighbour counts for top pairs ``i < j`` with count >= 1."""

    i: np.ndarray
    j: np.ndarray
    count: np.ndarray

    def __len__(self):
        return len(self.count)

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(c) for a, b, c in zip(self.i, self.j, self.count)}


@dataclass(frozen=True)
class ValidatedProjection:
    node_count: int
    edges: tuple  # (i, j, cooccurrence, p_value) with i < j, sorted
    fdr_level: float
    bh_threshold: float
    tested: int

    def edge_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _, _ in self.edges}

    def to_graph(self) -> WeightedGraph:
        """Unweighted undirected graph over all top nodes."""
        return WeightedGraph(self.node_count, ((i, j, 1.0) for i, j, _, _ in self.edges))


def cooccurrence_counts(g: BipartiteGraph) -> CooccurrenceTable:
    """Shared bottom-neighbour counts for every top pair with at least one."""
    a = g.biadjacency.astype(np.int64)
    v = (a @ a.T).tocoo()
    keep = v.row < v.col
    i, j, c = v.row[keep], v.col[keep], v.data[keep]
    order = np.lexsort((j, i))
    return CooccurrenceTable(i[order].astype(np.int64), j[order].astype(np.int64), c[order].astype(np.int64))


def _check_observed(observed: int, n: int) -> int:
    observed = int(observed)
    if observed < 0 or observed > n:
        raise ValueError(f"observed count {observed} outside support [0, {n}]")
    return observed


def pvalue_poisson_binomial(pair_probs, observed: int, exact_cutoff: int = EXACT_CUTOFF) -> float:
    """One-sided tail ``P(V >= observed)`` of a Poisson-binomial variable.

    The exact path is a dynamic program over outcome counts ``0..observed-1``
    with an absorbing bucket for ``>= observed``. The tail is therefore built
    from non-negative increments only and never formed as ``1 - cdf``.
    Above ``exact_cutoff`` non-zero entries a Poisson tail with rate
    ``sum(pair_probs)`` is used instead.
    """
    probs = np.asarray(pair_probs, dtype=float).ravel()
    if probs.size and (probs.min() < 0 or probs.max() > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    k = _check_observed(observed, probs.size)
    if k == 0:
        return 1.0
    probs = probs[probs > 0]
    if probs.size < k:
        return 0.0
    if probs.size > exact_cutoff:
        return float(poisson.sf(k - 1, math.fsum(probs)))
    s = np.zeros(k + 1)
    s[0] = 1.0
    for p in probs:
        moved = s[:k] * p
        s[:k] *= 1.0 - p
        s[1:] += moved
    return float(min(s[k], 1.0))


def _binom_pmf(m: int, q: float) -> np.ndarray:
    t = np.arange(m + 1)
    if q >= 1.0:
        out = np.zeros(m + 1)
        out[m] = 1.0
        return out
    log_c = gammaln(m + 1) - gammaln(t + 1) - gammaln(m - t + 1)
    return np.exp(log_c + t * math.log(q) + (m - t) * math.log1p(-q))


def pvalue_grouped(probs, counts, observed: int, exact_cutoff: int = EXACT_CUTOFF) -> float:
    """Same tail as :func:`pvalue_poisson_binomial` for repeated probabilities.

    ``probs[g]`` is shared by ``counts[g]`` independent trials, so the
    variable is a sum of binomials. Each binomial is folded into the
    truncated distribution in one step.
    """
    probs = np.asarray(probs, dtype=float).ravel()
    counts = np.asarray(counts, dtype=np.int64).ravel()
    k = _check_observed(observed, int(counts.sum()))
    if k == 0:
        return 1.0
    keep = (probs > 0) & (counts > 0)
    probs, counts = probs[keep], counts[keep]
    n = int(counts.sum())
    if n < k:
        return 0.0
    if n > exact_cutoff:
        return float(poisson.sf(k - 1, math.fsum(probs * counts)))
    s = np.zeros(k + 1)
    s[0] = 1.0
    for q, m in zip(probs, counts):
        pmf = _binom_pmf(int(m), float(q))
        # tail[t] = P(B >= t), accumulated from the top of the support down
        tail = np.cumsum(pmf[::-1])[::-1]
        head = np.convolve(s[:k], pmf[:k])[:k]
        # mass that crosses into the absorbing bucket from state j needs B >= k - j
        need = k - np.arange(k)
        crossing = np.where(need <= m, tail[np.minimum(need, m)], 0.0)
        s_k = s[k] + float(s[:k] @ crossing)
        s[:k] = head
        s[k] = s_k
    return float(min(s[k], 1.0))


def bh_fdr(p_values, fdr_level: float) -> tuple[np.ndarray, float]:
    """Benjamini-Hochberg step-up procedure.

    Returns
    -------
    accepted : ndarray of int
        Indices (into ``p_values``) of accepted hypotheses, ascending.
    threshold : float
        Largest accepted p-value, or 0 when nothing is accepted.
    """
    if not 0 < fdr_level < 1:
        raise ValueError("fdr_level must lie in (0, 1)")
    p = np.asarray(p_values, dtype=float).ravel()
    m = p.size
    if m == 0:
        return np.array([], dtype=np.int64), 0.0
    if p.min() < 0 or p.max() > 1:
        raise ValueError("p-values must lie in [0, 1]")
    ps = np.sort(p, kind="stable")
    ranks = np.arange(1, m + 1)
    ok = np.flatnonzero(ps <= ranks * fdr_level / m)
    if ok.size == 0:
        return np.array([], dtype=np.int64), 0.0
    threshold = float(ps[ok[-1]])
    return np.flatnonzero(p <= threshold), threshold


def validate_projection(g: BipartiteGraph, sol: BicmSolution, fdr_level: float = 0.05,
                        exact_cutoff: int = EXACT_CUTOFF, threads: int = 1) -> ValidatedProjection:
    """Project ``g`` on its top layer keeping only significant co-occurrences.

    P-values depend on a pair only through the two top degrees and the
    observed count, so they are computed once per distinct key. ``threads``
    only changes how keys are scheduled, never the result.
    """
    if (g.top_count, g.bottom_count) != (sol.top_count, sol.bottom_count):
        raise ValueError("graph and solution dimensions differ")
    if not 0 < fdr_level < 1:
        raise ValueError("fdr_level must lie in (0, 1)")
    table = cooccurrence_counts(g)
    _, rep, group_sizes = sol.bottom_groups()
    prob = sol.probabilities(None, rep)
    deg = sol.top_degrees

    # one representative pair per (degree_i, degree_j, observed)
    reps: dict[tuple[int, int, int], tuple[int, int]] = {}
    for i, j, c in zip(table.i.tolist(), table.j.tolist(), table.count.tolist()):
        key = (min(deg[i], deg[j]), max(deg[i], deg[j]), c)
        reps.setdefault(key, (i, j))
    keys = sorted(reps)

    def tail(key):
        i, j = reps[key]
        return pvalue_grouped(prob[i] * prob[j], group_sizes, key[2], exact_cutoff)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(tail, keys))
    else:
        values = [tail(k) for k in keys]
    lookup = dict(zip(keys, values))

    pvals = np.array([lookup[(min(deg[i], deg[j]), max(deg[i], deg[j]), c)]
                      for i, j, c in zip(table.i.tolist(), table.j.tolist(), table.count.tolist())])
    accepted, threshold = bh_fdr(pvals, fdr_level) if len(pvals) else (np.array([], int), 0.0)
    edges = tuple((int(table.i[k]), int(table.j[k]), int(table.count[k]), float(pvals[k])) for k in accepted)
    return ValidatedProjection(g.top_count, edges, float(fdr_level), threshold, int(len(pvals)))


def write_projection(path, proj: ValidatedProjection, node_ids=None) -> None:
    """Write a JSON header line followed by ``i<TAB>j<TAB>cooccurrence<TAB>p_value`` rows."""
    ids = list(node_ids) if node_ids is not None else list(range(proj.node_count))
    header = {"node_count": proj.node_count, "fdr_level": proj.fdr_level,
              "bh_threshold": proj.bh_threshold, "tested_pairs": proj.tested,
              "validated_edges": len(proj.edges)}
    if node_ids is not None:
        # every node, so isolated ones survive a round trip
        header["node_ids"] = [str(v) for v in ids]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        for i, j, c, p in proj.edges:
            fh.write(f"{ids[i]}\t{ids[j]}\t{c}\t{p!r}\n")


def read_projection(path, node_ids=None) -> ValidatedProjection:
    """Inverse of :func:`write_projection`; node names come from the header unless given."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing JSON header line")
    header = json.loads(lines[0][2:])
    if node_ids is None:
        node_ids = header.get("node_ids")
    index = {str(v): k for k, v in enumerate(node_ids)} if node_ids is not None else None
    edges = []
    for line in lines[1:]:
        if not line.strip():
            continue
        a, b, c, p = line.split("\t")
        i, j = (index[a], index[b]) if index is not None else (int(a), int(b))
        edges.append((i, j, int(c), float(p)))
    return ValidatedProjection(header["node_count"], tuple(edges), header["fdr_level"],
                               header["bh_threshold"], header["tested_pairs"])
