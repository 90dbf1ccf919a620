"""Retweet networks from tweet records, community seeding and the political filter."""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..bigraph import BipartiteGraph, IndexMap, WeightedGraph, build_bipartite, build_weighted_graph
from ..community import CommunityAssignment


class NoRetweetsError(ValueError):
    pass


@dataclass(frozen=True)
class Networks:
    bipartite: BipartiteGraph
    verified: IndexMap
    unverified: IndexMap
    retweets: WeightedGraph  # directed retweeter -> retweeted, weight = count
    users: IndexMap
    self_retweets: int = 0


def verified_accounts(records: Iterable) -> set[str]:
    out = set()
    for r in records:
        if r.author_verified:
            out.add(r.author_id)
        if r.retweeted_author_id is not None and r.retweeted_verified:
            out.add(r.retweeted_author_id)
    return out


def build_networks(records) -> Networks:
    """Verified x unverified bipartite graph and the weighted retweet graph.

    A bipartite edge joins a verified account to each unverified account
    that retweeted it at least once. The retweet graph counts every retweet
    between two distinct accounts.
    """
    records = list(records)
    verified = verified_accounts(records)
    pairs: Counter = Counter()
    bip = []
    self_rt = 0
    for r in records:
        if r.retweeted_author_id is None:
            continue
        src, dst = r.author_id, r.retweeted_author_id
        if src == dst:
            self_rt += 1
            continue
        pairs[(src, dst)] += 1
        if dst in verified and src not in verified:
            bip.append((dst, src))
    if not pairs:
        raise NoRetweetsError("no retweet records: nothing to validate")
    if not bip:
        raise NoRetweetsError("no retweets of verified accounts by unverified accounts")
    g, top_map, bottom_map = build_bipartite(bip)
    rt, users = build_weighted_graph(((u, v, w) for (u, v), w in pairs.items()), directed=True)
    return Networks(g, top_map, bottom_map, rt, users, self_rt)


@dataclass(frozen=True)
class LabelMap:
    """Community id -> (label, political flag) from the user-supplied config."""

    labels: dict = field(default_factory=dict)
    political: frozenset = frozenset()

    @property
    def political_labels(self) -> frozenset:
        return self.political


def read_label_map(path) -> LabelMap:
    labels, political = {}, set()
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "community_id":
                continue
            cid, label, flag = (c.strip() for c in row[:3])
            labels[cid] = label
            if flag.lower() in ("1", "true", "yes", "y"):
                political.add(label)
    return LabelMap(labels, frozenset(political))


def seeds_from_communities(communities: Mapping[str, str], label_map: LabelMap | None,
                           min_size: int = 2) -> dict[str, str]:
    """Seed labels for verified accounts.

    With a label map, only communities listed in it are seeded. Without one,
    every community of at least ``min_size`` members is seeded with its own id.
    """
    if label_map is not None:
        return {u: label_map.labels[c] for u, c in communities.items() if c in label_map.labels}
    sizes = Counter(communities.values())
    return {u: c for u, c in communities.items() if sizes[c] >= min_size}


@dataclass
class FilterReport:
    kept: int = 0
    dropped_label: int = 0
    dropped_absent: int = 0
    dropped_unlabeled: int = 0


def filter_validated(records, assignment: Mapping[str, str | None],
                     political_labels) -> tuple[list, FilterReport]:
    """Keep records whose author's propagated label is political."""
    political_labels = set(political_labels)
    kept, rep = [], FilterReport()
    for r in records:
        if r.author_id not in assignment:
            rep.dropped_absent += 1
            continue
        lab = assignment[r.author_id]
        if lab is None:
            rep.dropped_unlabeled += 1
        elif lab in political_labels:
            kept.append(r)
        else:
            rep.dropped_label += 1
    rep.kept = len(kept)
    return kept, rep


def assignment_by_id(a: CommunityAssignment, ids: IndexMap) -> dict:
    return {ids.ids[u]: lab for u, lab in enumerate(a.labels)}
