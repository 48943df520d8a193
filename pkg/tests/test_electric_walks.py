import numpy as np
import pytest

from adversarium.electric_walks import (
    WeightedGraph, bipartite_double, commute_identity_check, effective_resistance,
    electric_walk_run, hitting_time, lg_as_walk, lg_marked, lg_resistance_bound, lg_walk_graph,
    read_edge_list, read_sidecar, stationary, stationary_identity_check, walk_eigenvector,
    walk_operator, write_edge_list)
from adversarium.errors import InfeasibleError, ParseError
from adversarium.functions import make_named
from adversarium.learning_graphs import adaptive_threshold_lg, or_lg

from oracles import (hitting_value_iteration, random_connected_graph, resistance_pinv,
                     series_parallel_path)


def path_graph(n, w=1.0):
    return WeightedGraph(n, [(i, i + 1, w) for i in range(n - 1)])


def random_bipartite(rng, na, nb, p=0.6):
    edges = []
    for a in range(na):
        edges.append((a, na + int(rng.integers(0, nb)), float(rng.uniform(0.5, 2.0))))
    for b in range(nb):
        edges.append((int(rng.integers(0, na)), na + b, float(rng.uniform(0.5, 2.0))))
    for a in range(na):
        for b in range(nb):
            if rng.random() < p:
                edges.append((a, na + b, float(rng.uniform(0.5, 2.0))))
    return WeightedGraph(na + nb, edges, part=[0] * na + [1] * nb)


def test_path_values():
    g = path_graph(3)
    assert effective_resistance(g, 0, 2)[0] == pytest.approx(2.0)
    assert hitting_time(g, 0, 2) == pytest.approx(4.0)
    assert commute_identity_check(g, 0, 2) == pytest.approx((8.0, 8.0))


def test_series_weights():
    ws = [0.5, 2.0, 3.0, 1.0]
    g = WeightedGraph(5, [(i, i + 1, w) for i, w in enumerate(ws)])
    assert effective_resistance(g, 0, 4)[0] == pytest.approx(series_parallel_path(ws))


def test_triangle_resistance():
    g = WeightedGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    assert effective_resistance(g, 0, 1)[0] == pytest.approx(2 / 3)


def test_parallel_edges_merge():
    g = WeightedGraph(2, [(0, 1, 1.0), (1, 0, 2.0)])
    assert g.edges == [(0, 1, 3.0)]
    assert effective_resistance(g, 0, 1)[0] == pytest.approx(1 / 3)


@pytest.mark.parametrize("seed", range(8))
def test_resistance_against_pseudoinverse(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 10))
    edges = random_connected_graph(rng, n)
    g = WeightedGraph(n, edges)
    s, t = 0, n - 1
    r, flow = effective_resistance(g, s, t)
    assert r == pytest.approx(resistance_pinv(n, edges, s, t), rel=1e-9)
    sigma = np.zeros(n)
    sigma[s] = 1.0
    assert flow.energy() == pytest.approx(r, rel=1e-9)
    assert flow.conservation_residual(sigma, {t}, n) < 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_hitting_time_against_value_iteration(seed):
    rng = np.random.default_rng(50 + seed)
    n = int(rng.integers(3, 8))
    edges = random_connected_graph(rng, n)
    g = WeightedGraph(n, edges)
    marked = {n - 1}
    pi = stationary(g)
    assert hitting_time(g, pi, marked) == pytest.approx(
        hitting_value_iteration(n, edges, pi, marked), rel=1e-7)
    lhs, rhs = stationary_identity_check(g, marked)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_k4_stationary_identity():
    g = WeightedGraph(4, [(u, v, 1.0) for u in range(4) for v in range(u + 1, 4)])
    assert stationary_identity_check(g, {0}) == pytest.approx((2.25, 2.25))


def test_unreachable_marked_set():
    g = WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(InfeasibleError):
        effective_resistance(g, 0, 3)
    with pytest.raises(InfeasibleError):
        hitting_time(g, 0, 3)
    with pytest.raises(InfeasibleError):
        effective_resistance(g, 0, set())


def test_graph_validation():
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 1, 0.0)])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 2, 1.0)])
    with pytest.raises(ValueError):
        WeightedGraph(3, [(0, 1, 1.0)], part=[0, 0, 1])
    with pytest.raises(ValueError):
        effective_resistance(path_graph(3), [0.5, 0.2, 0.0], 2)


def test_edge_list_round_trip_and_sidecar():
    text = "# path\na b 1.0\nb c 2.5\n"
    g = read_edge_list(text)
    assert g.labels == ["a", "b", "c"]
    assert read_edge_list(write_edge_list(g)).edges == g.edges
    sigma, marked = read_sidecar(g, '{"sigma": {"a": 1.0}, "marked": ["c"]}')
    assert list(sigma) == [1.0, 0.0, 0.0] and marked == {2}
    for bad in ("a b\n", "a b x\n", "a a 1\n"):
        with pytest.raises(ParseError):
            read_edge_list(bad)
    with pytest.raises(ParseError):
        read_sidecar(g, '{"marked": ["z"]}')


def test_bipartite_double_halves_resistance_structure():
    g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    g2, s2, m2 = bipartite_double(g, 0, {2})
    assert g2.n == 6 and len(g2.edges) == 6
    assert s2[0] == 1.0 and m2 == {4, 5}
    # the cover of a path-like walk: resistance in the cover is at least the original
    r2 = effective_resistance(g2, s2, m2)[0]
    assert r2 >= effective_resistance(g, 0, {2})[0] - 1e-12
    with pytest.raises(ValueError):
        bipartite_double(WeightedGraph(2, []), 0, {1})


def test_walk_eigenvector_on_random_bipartite():
    rng = np.random.default_rng(9)
    g = random_bipartite(rng, 3, 4)
    sigma = np.array([0.5, 0.5, 0, 0, 0, 0, 0])
    marked = {5}
    r = effective_resistance(g, sigma, marked)[0]
    u, _ = walk_operator(g, sigma, marked, r)
    phi = walk_eigenvector(g, sigma, marked, r)
    assert np.linalg.norm(u @ phi - phi) < 1e-10


def test_walk_requires_bipartition_and_side_a():
    g = path_graph(3)
    with pytest.raises(ValueError):
        walk_operator(g, 0, {2}, 1.0)
    gb = WeightedGraph(2, [(0, 1, 1.0)], part=[0, 1])
    with pytest.raises(ValueError):
        walk_operator(gb, 1, {0}, 1.0)


def test_star_walk_detects_and_rejects():
    # star with centre on side A, four leaves on side B
    g = WeightedGraph(5, [(0, k, 1.0) for k in range(1, 5)], part=[0, 1, 1, 1, 1])
    r = effective_resistance(g, 0, {3})[0]
    pos = electric_walk_run(g, 0, {3}, r)
    neg = electric_walk_run(g, 0, set(), r)
    assert pos.p_accept >= 0.75
    assert neg.p_accept < 0.01


def test_pre_measurement_sees_marked_mass():
    g = WeightedGraph(2, [(0, 1, 1.0)], part=[0, 1])
    res = electric_walk_run(g, 0, {0}, 1.0)
    assert res.bit == 1 and res.queries == 0


def test_lg_walk_graph_and_marking():
    lg, _ = or_lg(3)
    g, subsets = lg_walk_graph(lg)
    assert g.n == 4 and subsets[0] == frozenset()
    f = make_named("or", n=3)
    assert lg_marked(subsets, f, (0, 1, 0)) == {subsets.index(frozenset({1}))}
    assert lg_resistance_bound(lg, f) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lg_walk_graph(adaptive_threshold_lg(3, 1, 1)[0])


def test_lg_as_walk_or_three():
    lg, _ = or_lg(3)
    f = make_named("or", n=3)
    for z in f.domain:
        res = lg_as_walk(lg, f, z)
        if f(z):
            assert res.p_accept >= 2 / 3
        else:
            assert res.p_accept < 1 / 3
        assert res.queries % 2 == 0
