import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swingnet.bicm import (BicmSolution, ConvergenceError, DegreeSequenceError, LikelihoodInconsistencyError,
                           SolverConfig, expected_degrees, link_probability, load_solution, log_likelihood,
                           save_solution, solve_bicm)
from swingnet.bigraph import BipartiteGraph, DegreeSequence, degrees

from .oracles import bicm_convex_oracle, ergm_enumeration, random_bipartite_edges


def seq(top, bottom):
    return DegreeSequence(np.array(top), np.array(bottom))


def test_symmetric_two_by_two_is_one_half():
    sol = solve_bicm(seq([1, 1], [1, 1]))
    # exact up to the solver tolerance on the degrees
    assert np.allclose(sol.probabilities(), 0.5, atol=1e-8)
    assert link_probability(sol, 1, 0) == pytest.approx(0.5, abs=1e-8)
    tight = solve_bicm(seq([1, 1], [1, 1]), SolverConfig(tolerance=1e-14))
    assert np.allclose(tight.probabilities(), 0.5, atol=1e-14)
    top, bottom = expected_degrees(sol)
    assert np.allclose(top, 1) and np.allclose(bottom, 1)


def test_complete_graph_saturates():
    sol = solve_bicm(seq([2, 2], [2, 2]))
    assert np.array_equal(sol.probabilities(), np.ones((2, 2)))
    assert sol.saturated_top == {0, 1} and sol.saturated_bottom == {0, 1}
    top, bottom = expected_degrees(sol)
    assert top.tolist() == [2, 2] and bottom.tolist() == [2, 2]


def test_zero_degree_node_never_links():
    sol = solve_bicm(seq([0, 2, 1], [2, 1]))
    assert 0 in sol.isolated_top
    assert link_probability(sol, 0, 0) == 0.0 and link_probability(sol, 0, 1) == 0.0


def test_forced_two_by_two():
    # degrees (2,1)/(2,1) admit exactly one graph; peeling pins it down
    sol = solve_bicm(seq([2, 1], [2, 1]))
    assert sol.probabilities().tolist() == [[1.0, 1.0], [1.0, 0.0]]
    top, bottom = expected_degrees(sol)
    assert top.tolist() == [2, 1] and bottom.tolist() == [2, 1]
    # a convex optimiser can only approach this boundary point, never beat it
    p = bicm_convex_oracle([2, 1], [2, 1])
    assert np.max(np.abs(p - sol.probabilities())) < 1e-3


def test_matches_convex_oracle_small():
    sol = solve_bicm(seq([2, 1], [1, 1, 1]), SolverConfig(tolerance=1e-12))
    p = bicm_convex_oracle([2, 1], [1, 1, 1])
    assert np.max(np.abs(sol.probabilities() - p)) < 1e-8
    assert np.allclose(sol.probabilities(), [[2 / 3] * 3, [1 / 3] * 3], atol=1e-12)


def test_matches_convex_oracle_random(rng):
    adj, edges = random_bipartite_edges(rng, 8, 15, 0.4)
    g = BipartiteGraph(8, 15, edges)
    d = degrees(g)
    if d.top.min() == 0 or d.bottom.min() == 0 or d.top.max() == 15 or d.bottom.max() == 8:
        pytest.skip("oracle needs an interior degree sequence")
    sol = solve_bicm(d, SolverConfig(tolerance=1e-12))
    p = bicm_convex_oracle(d.top, d.bottom)
    assert np.max(np.abs(sol.probabilities() - p)) < 1e-7
    assert np.max(np.abs(p.sum(axis=1) - d.top)) < 1e-6  # the oracle itself converged


def test_enumeration_marginal_2x3():
    sol = solve_bicm(seq([2, 1], [1, 1, 1]), SolverConfig(tolerance=1e-13))
    total, mt, mb, marg = ergm_enumeration(sol, 2, 3)
    assert abs(total - 1) < 1e-10
    assert np.max(np.abs(marg - sol.probabilities())) < 1e-10
    assert link_probability(sol, 0, 0) == pytest.approx(math.exp(sol.log_x[0] + sol.log_y[0])
                                                        / (1 + math.exp(sol.log_x[0] + sol.log_y[0])), abs=1e-15)


def test_random_50x200_reproduces_degrees(rng):
    _, edges = random_bipartite_edges(rng, 50, 200, 0.1)
    g = BipartiteGraph(50, 200, edges)
    d = degrees(g)
    sol = solve_bicm(d)
    top, bottom = expected_degrees(sol)
    assert max(np.max(np.abs(top - d.top)), np.max(np.abs(bottom - d.bottom))) <= 1e-8
    assert sol.residual <= 1e-8


def test_reduced_equals_full(rng):
    _, edges = random_bipartite_edges(rng, 30, 80, 0.15)
    d = degrees(BipartiteGraph(30, 80, edges))
    cfg = SolverConfig(tolerance=1e-13)
    reduced = solve_bicm(d, cfg).probabilities()
    full = solve_bicm(d, SolverConfig(tolerance=1e-13, reduce=False)).probabilities()
    assert np.max(np.abs(reduced - full)) <= 1e-12


def test_newton_and_fixed_point_agree(rng):
    _, edges = random_bipartite_edges(rng, 20, 60, 0.2)
    d = degrees(BipartiteGraph(20, 60, edges))
    a = solve_bicm(d, SolverConfig(tolerance=1e-12, method="newton")).probabilities()
    b = solve_bicm(d, SolverConfig(tolerance=1e-12, newton_refine=False)).probabilities()
    assert np.max(np.abs(a - b)) < 1e-10


def test_gauge_invariance(rng):
    _, edges = random_bipartite_edges(rng, 10, 30, 0.3)
    sol = solve_bicm(degrees(BipartiteGraph(10, 30, edges)))
    c = 2.7
    shifted = sol.with_multipliers(sol.log_x + c, sol.log_y - c)
    assert np.max(np.abs(shifted.probabilities() - sol.probabilities())) < 1e-14


def test_monotone_in_x(rng):
    _, edges = random_bipartite_edges(rng, 6, 12, 0.4)
    sol = solve_bicm(degrees(BipartiteGraph(6, 12, edges)))
    free = sol.top_order == -1
    i = int(np.flatnonzero(free)[0])
    up = sol.log_x.copy()
    up[i] += 0.1
    p0 = sol.probabilities()[i]
    p1 = sol.with_multipliers(up, sol.log_y).probabilities()[i]
    free_cols = sol.bottom_order == -1
    assert np.all(p1[free_cols] > p0[free_cols])


def test_non_graphical_rejected():
    with pytest.raises(DegreeSequenceError):
        solve_bicm(seq([2, 2], [1, 1]))  # sums differ
    with pytest.raises(DegreeSequenceError):
        solve_bicm(seq([3, 0], [1, 1]))  # degree exceeds opposite layer
    with pytest.raises(DegreeSequenceError):
        solve_bicm(seq([2, 2, 0], [3, 1]))  # Gale-Ryser fails


def test_convergence_error_carries_residual(rng):
    _, edges = random_bipartite_edges(rng, 30, 60, 0.2)
    d = degrees(BipartiteGraph(30, 60, edges))
    with pytest.raises(ConvergenceError) as exc:
        solve_bicm(d, SolverConfig(tolerance=1e-14, max_iterations=1, newton_refine=False))
    assert exc.value.residual > 1e-14 and exc.value.iterations == 1


def test_config_validation():
    for kw in ({"tolerance": 0}, {"max_iterations": 0}, {"method": "magic"}, {"damping": 0}):
        with pytest.raises(ValueError):
            SolverConfig(**kw)


def test_link_probability_range_checked():
    sol = solve_bicm(seq([1, 1], [1, 1]))
    with pytest.raises(IndexError):
        link_probability(sol, 2, 0)


def test_log_likelihood_examples():
    sol = solve_bicm(seq([1, 1], [1, 1]))
    g = BipartiteGraph(2, 2, [(0, 0), (1, 1)])
    assert log_likelihood(sol, g) == pytest.approx(4 * math.log(0.5), abs=1e-12)
    empty = solve_bicm(seq([0, 0], [0, 0]))
    assert log_likelihood(empty, BipartiteGraph(2, 2)) == 0.0


def test_log_likelihood_inconsistency():
    sol = solve_bicm(seq([2, 1], [2, 1]))
    with pytest.raises(LikelihoodInconsistencyError):
        log_likelihood(sol, BipartiteGraph(2, 2, [(0, 0), (0, 1), (1, 1)]))


def test_likelihood_maximal_under_perturbation(rng):
    _, edges = random_bipartite_edges(rng, 10, 20, 0.3)
    g = BipartiteGraph(10, 20, edges)
    sol = solve_bicm(degrees(g), SolverConfig(tolerance=1e-12))
    best = log_likelihood(sol, g)
    free_t, free_b = sol.top_order == -1, sol.bottom_order == -1
    for _ in range(100):
        lx = sol.log_x + np.where(free_t, rng.normal(0, 0.05, 10), 0.0)
        ly = sol.log_y + np.where(free_b, rng.normal(0, 0.05, 20), 0.0)
        assert log_likelihood(sol.with_multipliers(lx, ly), g) <= best + 1e-12


def test_solution_round_trip(tmp_path, rng):
    _, edges = random_bipartite_edges(rng, 12, 25, 0.3)
    sol = solve_bicm(degrees(BipartiteGraph(12, 25, edges + 0)))
    save_solution(tmp_path / "s.json", sol)
    back = load_solution(tmp_path / "s.json")
    assert back == sol
    assert np.array_equal(back.probabilities(), sol.probabilities())
    save_solution(tmp_path / "t.json", back)
    assert (tmp_path / "s.json").read_bytes() == (tmp_path / "t.json").read_bytes()


def all_degree_sequences(m, n):
    seen = {}
    for bits in itertools.product((0, 1), repeat=m * n):
        a = np.array(bits).reshape(m, n)
        key = (tuple(a.sum(axis=1)), tuple(a.sum(axis=0)))
        seen.setdefault(key, a)
    return sorted(seen)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
def test_ensemble_exactness_all_sequences(shape):
    m, n = shape
    for top, bottom in all_degree_sequences(m, n):
        sol = solve_bicm(seq(top, bottom), SolverConfig(tolerance=1e-13))
        total, mt, mb, _ = ergm_enumeration(sol, m, n)
        assert abs(total - 1) < 1e-10
        assert np.max(np.abs(mt - np.array(top))) < 1e-8
        assert np.max(np.abs(mb - np.array(bottom))) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(2, 25), st.floats(0.05, 0.95), st.integers(0, 2 ** 31))
def test_degree_reproduction_property(m, n, density, seed):
    r = np.random.default_rng(seed)
    _, edges = random_bipartite_edges(r, m, n, density)
    d = degrees(BipartiteGraph(m, n, edges))
    sol = solve_bicm(d)
    top, bottom = expected_degrees(sol)
    assert max(np.max(np.abs(top - d.top)), np.max(np.abs(bottom - d.bottom))) <= 1e-8
    p = sol.probabilities()
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.isfinite(sol.x[sol.top_order == -1]))
