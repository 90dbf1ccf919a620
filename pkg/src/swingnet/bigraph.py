"""Sparse graph containers shared by the rest of the package.

Two structures are used throughout:

* :class:`BipartiteGraph` -- binary incidence between a *top* layer (verified
  accounts) and a *bottom* layer (unverified accounts).
* :class:`WeightedGraph` -- weighted monopartite graph, directed or not, used
  for the retweet network and the validated projection.

Both are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class EmptyInputError(ValueError):
    """Raised when a graph is requested from an empty edge list."""


class GraphValidationError(ValueError):
    """Raised on invalid edges (bad weights, forbidden self-loops, bad indices)."""


@dataclass(frozen=True)
class DegreeSequence:
    top: np.ndarray
    bottom: np.ndarray

    def __post_init__(self):
        top = np.asarray(self.top, dtype=np.int64)
        bottom = np.asarray(self.bottom, dtype=np.int64)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)

    @property
    def n_edges(self) -> int:
        return int(self.top.sum())


class BipartiteGraph:
    """Binary bipartite graph stored as a set of ``(top, bottom)`` index pairs.

    The incidence is kept in CSR (row-major, per top node) and CSC
    (column-major, per bottom node) views.

    Parameters
    ----------
    top_count, bottom_count : int
        Layer sizes.
    edges : array_like of shape (m, 2)
        Integer ``(top_index, bottom_index)`` pairs. Duplicates are collapsed.
    """

    def __init__(self, top_count: int, bottom_count: int, edges=()):
        self.top_count = int(top_count)
        self.bottom_count = int(bottom_count)
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr[:, 0].max() >= self.top_count or arr[:, 1].max() >= self.bottom_count:
                raise GraphValidationError("edge index outside layer bounds")
            # dedup keeping first occurrence so dumps rebuild with the same indices
            _, first = np.unique(arr, axis=0, return_index=True)
            arr = arr[np.sort(first)]
        self._edges = arr
        data = np.ones(len(arr), dtype=np.int64)
        self._csr = sp.csr_matrix(
            (data, (arr[:, 0], arr[:, 1])), shape=(self.top_count, self.bottom_count)
        )
        self._csr.sort_indices()
        self._csc = self._csr.tocsc()
        self._csc.sort_indices()

    @property
    def n_edges(self) -> int:
        return int(self._csr.nnz)

    @property
    def biadjacency(self) -> sp.csr_matrix:
        """Binary incidence as a CSR matrix (top rows, bottom columns)."""
        return self._csr

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array in first-insertion order."""
        return self._edges.copy()

    def top_neighbors(self, i: int) -> np.ndarray:
        return self._csr.indices[self._csr.indptr[i]:self._csr.indptr[i + 1]]

    def bottom_neighbors(self, a: int) -> np.ndarray:
        return self._csc.indices[self._csc.indptr[a]:self._csc.indptr[a + 1]]

    def has_edge(self, i: int, a: int) -> bool:
        return bool(np.isin(a, self.top_neighbors(i)))

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.top_count == other.top_count
            and self.bottom_count == other.bottom_count
            and (self._csr != other._csr).nnz == 0
        )

    def __repr__(self):
        return f"BipartiteGraph(top={self.top_count}, bottom={self.bottom_count}, edges={self.n_edges})"


@dataclass(frozen=True)
class IndexMap:
    """Bijection between opaque identifiers and ``0..n-1``."""

    ids: tuple
    index: dict = field(repr=False)

    @classmethod
    def from_ids(cls, ids: Iterable[Hashable]) -> "IndexMap":
        ids = tuple(ids)
        return cls(ids, {v: k for k, v in enumerate(ids)})

    def __len__(self):
        return len(self.ids)

    def __getitem__(self, key):
        return self.index[key]

    def __contains__(self, key):
        return key in self.index


def _first_seen(values: Iterable[Hashable]) -> IndexMap:
    return IndexMap.from_ids(dict.fromkeys(values))


def build_bipartite(edge_list: Sequence[tuple]) -> tuple[BipartiteGraph, IndexMap, IndexMap]:
    """Build a binary bipartite graph from ``(top_id, bottom_id)`` pairs.

    Indices are assigned in first-seen order on each layer. Repeated pairs
    collapse to a single edge.

    Returns
    -------
    graph, top_map, bottom_map
    """
    edge_list = list(edge_list)
    if not edge_list:
        raise EmptyInputError("cannot build a bipartite graph from an empty edge list")
    top_map = _first_seen(t for t, _ in edge_list)
    bottom_map = _first_seen(b for _, b in edge_list)
    idx = [(top_map[t], bottom_map[b]) for t, b in edge_list]
    return BipartiteGraph(len(top_map), len(bottom_map), idx), top_map, bottom_map


def degrees(g: BipartiteGraph) -> DegreeSequence:
    a = g.biadjacency
    return DegreeSequence(
        np.asarray(a.sum(axis=1)).ravel().astype(np.int64),
        np.asarray(a.sum(axis=0)).ravel().astype(np.int64),
    )


class WeightedGraph:
    """Weighted graph over ``0..node_count-1``.

    Undirected edges are stored once with ``u <= v``. Parallel edges are merged
    by summing their weights; edge order is first-insertion order.
    """

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int, float]] = (),
                 directed: bool = False, allow_self_loops: bool = False):
        self.node_count = int(node_count)
        self.directed = bool(directed)
        self.allow_self_loops = bool(allow_self_loops)
        merged: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not w > 0 or not np.isfinite(w):
                raise GraphValidationError(f"edge ({u}, {v}) has non-positive weight {w}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise GraphValidationError(f"edge ({u}, {v}) outside node range")
            if u == v and not self.allow_self_loops:
                raise GraphValidationError(f"self-loop on node {u}")
            key = (u, v) if self.directed or u <= v else (v, u)
            merged[key] = merged.get(key, 0.0) + w
        self._edges = merged
        self._adj: list[dict[int, float]] | None = None

    @property
    def edges(self) -> dict[tuple[int, int], float]:
        return self._edges

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    @property
    def total_weight(self) -> float:
        return float(sum(self._edges.values()))

    def weight(self, u: int, v: int) -> float:
        if not self.directed and u > v:
            u, v = v, u
        return self._edges.get((u, v), 0.0)

    def neighbors(self) -> list[dict[int, float]]:
        """Undirected weighted adjacency; direction is collapsed and weights summed."""
        if self._adj is None:
            adj: list[dict[int, float]] = [dict() for _ in range(self.node_count)]
            for (u, v), w in self._edges.items():
                adj[u][v] = adj[u].get(v, 0.0) + w
                if u != v:
                    adj[v][u] = adj[v].get(u, 0.0) + w
            self._adj = adj
        return self._adj

    def to_undirected(self) -> "WeightedGraph":
        if not self.directed:
            return self
        return WeightedGraph(self.node_count, ((u, v, w) for (u, v), w in self._edges.items()),
                             directed=False, allow_self_loops=self.allow_self_loops)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.node_count, self.directed, self._edges) == (other.node_count, other.directed, other._edges)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"WeightedGraph({kind}, nodes={self.node_count}, edges={self.n_edges})"


def build_weighted_graph(edge_list: Sequence[tuple], directed: bool = False,
                         allow_self_loops: bool = False) -> tuple[WeightedGraph, IndexMap]:
    """Build a :class:`WeightedGraph` from ``(u_id, v_id, weight)`` triples.

    Node indices follow first-seen order over ``u, v`` of each triple.
    """
    edge_list = list(edge_list)
    nodes = _first_seen(x for u, v, _ in edge_list for x in (u, v))
    g = WeightedGraph(len(nodes), ((nodes[u], nodes[v], w) for u, v, w in edge_list),
                      directed=directed, allow_self_loops=allow_self_loops)
    return g, nodes


# -- text formats -----------------------------------------------------------

def write_bipartite_edgelist(path, g: BipartiteGraph, top_map: IndexMap, bottom_map: IndexMap) -> None:
    """Write ``top_id<TAB>bottom_id`` lines in edge insertion order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, a in g.edges():
            fh.write(f"{top_map.ids[i]}\t{bottom_map.ids[a]}\n")


def read_bipartite_edgelist(path) -> tuple[BipartiteGraph, IndexMap, IndexMap]:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise GraphValidationError(f"{path}:{lineno}: expected 2 tab-separated fields")
        pairs.append((parts[0], parts[1]))
    return build_bipartite(pairs)


def write_weighted_edgelist(path, g: WeightedGraph, nodes: IndexMap) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (u, v), w in g.edges.items():
            fh.write(f"{nodes.ids[u]}\t{nodes.ids[v]}\t{w!r}\n")


def read_weighted_edgelist(path, directed: bool = False) -> tuple[WeightedGraph, IndexMap]:
    triples = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise GraphValidationError(f"{path}:{lineno}: expected 3 tab-separated fields")
        triples.append((parts[0], parts[1], float(parts[2])))
    return build_weighted_graph(triples, directed=directed)
