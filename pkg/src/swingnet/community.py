"""Community detection: Louvain modularity optimisation and seeded label propagation."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Mapping, Sequence

import numpy as np

from .bigraph import WeightedGraph

UNLABELED_MARK = "<unlabeled>"


class EmptyGraphError(ValueError):
    pass


class NoSeedsError(ValueError):
    pass


@dataclass(frozen=True)
class CommunityAssignment:
    """Label per node ``0..n-1``; ``None`` marks an unlabeled node."""

    labels: tuple
    sweeps: int = 0
    converged: bool = True

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, node):
        return self.labels[node]

    @property
    def unlabeled(self) -> list[int]:
        return [u for u, lab in enumerate(self.labels) if lab is None]

    def communities(self) -> dict[Hashable, list[int]]:
        out: dict[Hashable, list[int]] = {}
        for u, lab in enumerate(self.labels):
            if lab is not None:
                out.setdefault(lab, []).append(u)
        return out

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[int, Hashable]) -> "CommunityAssignment":
        return cls(tuple(mapping.get(u) for u in range(n)))


@dataclass(frozen=True)
class PropagationConfig:
    max_sweeps: int = 100
    seed_frozen: bool = True
    rng_seed: int = 0
    update_mode: str = "asynchronous-random-order"

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.update_mode != "asynchronous-random-order":
            raise ValueError(f"unsupported update mode {self.update_mode!r}")


# -- modularity ---------------------------------------------------------------

def modularity(g: WeightedGraph, a: CommunityAssignment | Sequence, resolution: float = 1.0) -> float:
    """Weighted modularity ``sum_c [w_c / W - resolution * (s_c / 2W)^2]``.

    ``W`` is the total edge weight, ``w_c`` the weight inside community ``c``
    and ``s_c`` the summed strength of its nodes. Directed graphs are
    collapsed to undirected.
    """
    labels = a.labels if isinstance(a, CommunityAssignment) else tuple(a)
    if len(labels) != g.node_count or any(lab is None for lab in labels):
        raise ValueError("assignment must label every node of the graph")
    total = g.total_weight
    if total == 0:
        raise EmptyGraphError("modularity is undefined on a graph without edges")
    inside: dict = {}
    strength: dict = {}
    for (u, v), w in g.edges.items():
        cu, cv = labels[u], labels[v]
        if cu == cv:
            inside[cu] = inside.get(cu, 0.0) + w
        strength[cu] = strength.get(cu, 0.0) + w
        strength[cv] = strength.get(cv, 0.0) + w
    q = [inside.get(c, 0.0) / total - resolution * (s / (2 * total)) ** 2
         for c, s in sorted(strength.items(), key=lambda kv: str(kv[0]))]
    return math.fsum(q)


# -- Louvain ------------------------------------------------------------------

def _one_level(adj, loops, resolution, total, rng):
    """Local-move phase. Returns community per node and whether anything moved."""
    n = len(adj)
    strength = [sum(nb.values()) + 2 * loops[u] for u, nb in enumerate(adj)]
    comm = list(range(n))
    tot = strength[:]
    order = rng.permutation(n).tolist()
    moved_any = False
    improved = True
    while improved:
        improved = False
        for u in order:
            ku = strength[u]
            links: dict[int, float] = {}
            for v, w in adj[u].items():
                links[comm[v]] = links.get(comm[v], 0.0) + w
            old = comm[u]
            tot[old] -= ku
            best = old
            best_gain = links.get(old, 0.0) - resolution * tot[old] * ku / (2 * total)
            for c in sorted(links):
                gain = links[c] - resolution * tot[c] * ku / (2 * total)
                if gain > best_gain + 1e-12:
                    best, best_gain = c, gain
            tot[best] += ku
            if best != old:
                comm[u] = best
                improved = moved_any = True
    return comm, moved_any


def _canonical(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel communities 0..K-1 by decreasing size, ties by smallest member."""
    members: dict[int, list[int]] = {}
    for u, c in enumerate(labels):
        members.setdefault(c, []).append(u)
    ranked = sorted(members.values(), key=lambda m: (-len(m), m[0]))
    out = [0] * len(labels)
    for rank, m in enumerate(ranked):
        for u in m:
            out[u] = rank
    return tuple(out)


def louvain(g: WeightedGraph, resolution: float = 1.0, rng_seed: int = 0) -> CommunityAssignment:
    """Greedy modularity maximisation with local moves and aggregation.

    Node visiting order at each level is a permutation drawn from a generator
    seeded with ``rng_seed``. Community ids are canonical: 0 is the largest
    community, ties broken by the smallest member index.
    """
    if g.n_edges == 0:
        raise EmptyGraphError("Louvain needs at least one edge")
    und = g.to_undirected()
    rng = np.random.default_rng(rng_seed)
    total = und.total_weight
    adj = [dict() for _ in range(und.node_count)]
    loops = [0.0] * und.node_count
    for (u, v), w in und.edges.items():
        if u == v:
            loops[u] += w
        else:
            adj[u][v] = adj[u].get(v, 0.0) + w
            adj[v][u] = adj[v].get(u, 0.0) + w
    membership = list(range(und.node_count))
    while True:
        comm, moved = _one_level(adj, loops, resolution, total, rng)
        if not moved:
            break
        renum = {c: k for k, c in enumerate(dict.fromkeys(comm))}
        comm = [renum[c] for c in comm]
        membership = [comm[m] for m in membership]
        k = len(renum)
        new_adj = [dict() for _ in range(k)]
        new_loops = [0.0] * k
        for u in range(len(adj)):
            cu = comm[u]
            new_loops[cu] += loops[u]
            for v, w in adj[u].items():
                cv = comm[v]
                if cu == cv:
                    if u < v:
                        new_loops[cu] += w
                else:
                    new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
        adj, loops = new_adj, new_loops
    return CommunityAssignment(_canonical(membership))


# -- label propagation ---------------------------------------------------------

def propagate_labels(g: WeightedGraph, seeds: CommunityAssignment | Mapping[int, Hashable],
                     cfg: PropagationConfig | None = None) -> CommunityAssignment:
    """Seeded asynchronous label propagation on the undirected weighted graph.

    Each updatable node takes the label carrying the largest total edge
    weight among its labelled neighbours; ties go to the smallest label.
    Sweeps visit nodes in an order drawn from the seeded generator and stop
    after a sweep without changes or after ``max_sweeps``. Nodes that never
    see a label stay unlabeled.
    """
    cfg = cfg or PropagationConfig()
    if isinstance(seeds, CommunityAssignment):
        seed_map = {u: lab for u, lab in enumerate(seeds.labels) if lab is not None}
    else:
        seed_map = {int(u): lab for u, lab in seeds.items() if lab is not None}
    if not seed_map:
        raise NoSeedsError("label propagation needs at least one seeded node")
    adj = g.neighbors()
    labels: list = [None] * g.node_count
    for u, lab in seed_map.items():
        labels[u] = lab
    updatable = np.array([u for u in range(g.node_count)
                          if not (cfg.seed_frozen and u in seed_map) and adj[u]], dtype=np.int64)
    rng = np.random.default_rng(cfg.rng_seed)
    sweeps, converged = 0, False
    while sweeps < cfg.max_sweeps:
        sweeps += 1
        changed = False
        for u in rng.permutation(updatable).tolist():
            votes: dict = {}
            for v, w in adj[u].items():
                lab = labels[v]
                if lab is not None:
                    votes[lab] = votes.get(lab, 0.0) + w
            if not votes:
                continue
            top = max(votes.values())
            new = min(lab for lab, w in votes.items() if w == top)
            if new != labels[u]:
                labels[u] = new
                changed = True
        if not changed:
            converged = True
            break
    return CommunityAssignment(tuple(labels), sweeps=sweeps, converged=converged)


# -- comparison ---------------------------------------------------------------

def normalized_mutual_info(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """NMI with arithmetic-mean normalisation; 1.0 when both partitions are trivial."""
    if len(a) != len(b):
        raise ValueError("partitions must have the same length")
    n = len(a)
    if n == 0:
        return 1.0
    joint = Counter(zip(a, b))
    ca, cb = Counter(a), Counter(b)

    def entropy(counts):
        return -math.fsum(c / n * math.log(c / n) for c in counts.values())

    ha, hb = entropy(ca), entropy(cb)
    if ha == 0 and hb == 0:
        return 1.0
    mi = math.fsum(c / n * math.log(c * n / (ca[x] * cb[y])) for (x, y), c in joint.items())
    return max(0.0, min(1.0, mi / (0.5 * (ha + hb))))


# -- text format --------------------------------------------------------------

def write_assignment(path, a: CommunityAssignment, node_ids: Sequence) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for node, lab in zip(node_ids, a.labels):
            fh.write(f"{node}\t{UNLABELED_MARK if lab is None else lab}\n")


def read_assignment(path) -> dict[str, str | None]:
    """Read ``node_id<TAB>label`` rows into a dict (unlabeled rows map to ``None``)."""
    out: dict[str, str | None] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        node, lab = line.split("\t")
        out[node] = None if lab == UNLABELED_MARK else lab
    return out
