import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import normalized_mutual_info_score

from swingnet.bigraph import WeightedGraph
from swingnet.community import (CommunityAssignment, EmptyGraphError, NoSeedsError, PropagationConfig, louvain,
                                modularity, normalized_mutual_info, propagate_labels, read_assignment,
                                write_assignment)

from .oracles import modularity_direct

TRIANGLES = [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)]


def random_graph(rng, n, p):
    edges = [(u, v, float(rng.integers(1, 5))) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return edges


def test_two_triangles():
    a = louvain(WeightedGraph(6, TRIANGLES))
    assert a.labels == (0, 0, 0, 1, 1, 1)
    assert modularity(WeightedGraph(6, TRIANGLES), a) == pytest.approx(0.5, abs=1e-15)


def test_single_clique():
    edges = [(u, v, 1) for u in range(5) for v in range(u + 1, 5)]
    a = louvain(WeightedGraph(5, edges))
    assert len(a.communities()) == 1
    assert modularity(WeightedGraph(5, edges), a) == pytest.approx(0.0, abs=1e-15)


def test_empty_graph_rejected():
    with pytest.raises(EmptyGraphError):
        louvain(WeightedGraph(3))


def test_modularity_requires_full_assignment():
    with pytest.raises(ValueError):
        modularity(WeightedGraph(6, TRIANGLES), [0, 0, 0, 1, 1])


@pytest.mark.parametrize("resolution", [0.5, 1.0, 2.0])
def test_modularity_matches_oracles(rng, resolution):
    edges = random_graph(rng, 30, 0.15)
    labels = rng.integers(0, 4, 30).tolist()
    g = WeightedGraph(30, edges)
    ours = modularity(g, labels, resolution)
    assert ours == pytest.approx(modularity_direct(edges, labels, resolution), abs=1e-12)
    G = nx.Graph()
    G.add_nodes_from(range(30))
    G.add_weighted_edges_from(edges)
    parts = [set(np.flatnonzero(np.array(labels) == c).tolist()) for c in set(labels)]
    assert ours == pytest.approx(nx.community.modularity(G, parts, resolution=resolution), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(4, 40), st.floats(0.05, 0.5))
def test_louvain_not_worse_than_singletons(seed, n, p):
    r = np.random.default_rng(seed)
    edges = random_graph(r, n, p)
    if not edges:
        return
    g = WeightedGraph(n, edges)
    a = louvain(g, rng_seed=seed)
    assert modularity(g, a) >= modularity(g, list(range(n))) - 1e-12
    assert louvain(g, rng_seed=seed) == a


def test_louvain_planted_blocks(rng):
    blocks = np.repeat(np.arange(3), 15)
    edges = [(u, v, 1) for u in range(45) for v in range(u + 1, 45)
             if rng.random() < (0.6 if blocks[u] == blocks[v] else 0.03)]
    a = louvain(WeightedGraph(45, edges), rng_seed=2)
    assert normalized_mutual_info(a.labels, blocks.tolist()) == pytest.approx(1.0)


def test_path_tie_goes_to_smallest_label():
    g = WeightedGraph(3, [(0, 1, 1), (1, 2, 1)])
    out = propagate_labels(g, {0: "red", 2: "blue"})
    assert out.labels == ("red", "blue", "blue")
    assert out.converged


def test_star_takes_center_label():
    g = WeightedGraph(6, [(0, k, 1) for k in range(1, 6)])
    out = propagate_labels(g, {0: "red"})
    assert set(out.labels) == {"red"}


def test_seedless_component_stays_unlabeled():
    g = WeightedGraph(5, [(0, 1, 1), (2, 3, 1)])
    out = propagate_labels(g, {0: "a"})
    assert out.labels == ("a", "a", None, None, None)
    assert out.unlabeled == [2, 3, 4]


def test_no_seeds_rejected():
    with pytest.raises(NoSeedsError):
        propagate_labels(WeightedGraph(2, [(0, 1, 1)]), {})


def test_weights_decide_the_vote():
    g = WeightedGraph(3, [(0, 2, 1), (1, 2, 3)])
    assert propagate_labels(g, {0: "a", 1: "b"})[2] == "b"


def test_directed_edges_are_collapsed():
    g = WeightedGraph(3, [(2, 0, 1), (1, 2, 2), (2, 1, 2)], directed=True)
    assert propagate_labels(g, {0: "a", 1: "b"})[2] == "b"


def test_unfrozen_seeds_may_change():
    g = WeightedGraph(4, [(0, 1, 5), (0, 2, 5), (1, 2, 10), (0, 3, 1)])
    frozen = propagate_labels(g, {0: "x", 1: "y", 2: "y"})
    free = propagate_labels(g, {0: "x", 1: "y", 2: "y"}, PropagationConfig(seed_frozen=False))
    assert frozen[0] == "x" and free[0] == "y"


def test_planted_camps_recovered(rng):
    n = 400
    camp = np.repeat([0, 1], n // 2)
    edges = []
    for u in range(n):
        for _ in range(6):
            same = rng.random() < 0.9
            pool = np.flatnonzero((camp == camp[u]) if same else (camp != camp[u]))
            v = int(rng.choice(pool))
            if v != u:
                edges.append((u, v, 1))
    g = WeightedGraph(n, edges, directed=True)
    seeds = {int(u): f"c{camp[u]}" for u in rng.choice(n, size=n // 20, replace=False)}
    out = propagate_labels(g, seeds, PropagationConfig(rng_seed=7))
    correct = sum(out[u] == f"c{camp[u]}" for u in range(n))
    assert correct / n >= 0.95


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_propagation_invariants(seed):
    r = np.random.default_rng(seed)
    edges = random_graph(r, 25, 0.12)
    if not edges:
        return
    g = WeightedGraph(25, edges)
    seeds = {int(u): str(r.integers(3)) for u in r.choice(25, size=4, replace=False)}
    cfg = PropagationConfig(rng_seed=seed, max_sweeps=50)
    out = propagate_labels(g, seeds, cfg)
    assert all(out[u] == lab for u, lab in seeds.items())
    assert {lab for lab in out.labels if lab is not None} <= set(seeds.values())
    assert out.converged or out.sweeps == cfg.max_sweeps
    assert propagate_labels(g, seeds, cfg) == out


def test_propagation_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(max_sweeps=0)


def test_nmi_matches_sklearn(rng):
    for _ in range(20):
        a = rng.integers(0, 4, 50).tolist()
        b = rng.integers(0, 3, 50).tolist()
        ref = normalized_mutual_info_score(a, b, average_method="arithmetic")
        assert normalized_mutual_info(a, b) == pytest.approx(ref, abs=1e-12)
    assert normalized_mutual_info([0, 0, 1, 1], ["x", "x", "y", "y"]) == 1.0


def test_assignment_round_trip(tmp_path):
    a = CommunityAssignment(("a", None, "b"))
    write_assignment(tmp_path / "a.tsv", a, ["n1", "n2", "n3"])
    assert read_assignment(tmp_path / "a.tsv") == {"n1": "a", "n2": None, "n3": "b"}
