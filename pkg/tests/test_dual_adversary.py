import itertools
from math import sqrt

import numpy as np
import pytest

from adversarium.dual_adversary import (
    DualAdversarySolution, ambainis_decision_tree, ambainis_positive_dual, barrier_solution,
    decision_tree_dual, from_canonical_span_program, from_gram, graph_collision_dual,
    independence_number, threshold_dual, to_span_program)
from adversarium.errors import InfeasibleError, ParseError
from adversarium.functions import make_named

from oracles import power_norm


def brute_constraints(s):
    """Pairwise constraint sums recomputed from scratch with per-pair loops."""
    f = s.f
    out = {}
    for x in f.positives:
        for y in f.negatives:
            out[x, y] = sum(float(s.psi(j, x) @ s.psi(j, y)) for j in range(f.n) if x[j] != y[j])
    return out


@pytest.mark.parametrize("k,n", [(1, 3), (2, 3), (2, 4), (3, 5), (1, 5), (5, 5)])
def test_threshold_dual_is_feasible_with_closed_form_objective(k, n):
    s = threshold_dual(k, n)
    ok, worst = s.check_feasible()
    assert ok, worst
    assert s.objective() == pytest.approx(sqrt(k * (n - k + 1)), abs=1e-9)
    assert all(v == pytest.approx(1.0, abs=1e-9) for v in brute_constraints(s).values())


def test_threshold_dual_rejects_bad_parameters():
    with pytest.raises(ValueError):
        threshold_dual(0, 3)
    with pytest.raises(ValueError):
        threshold_dual(4, 3)


def test_decision_tree_dual_objective_is_tree_depth():
    f = make_named("ambainis")
    s = decision_tree_dual(f, ambainis_decision_tree())
    assert s.objective() == pytest.approx(3.0)
    assert s.check_feasible()[0]


def test_decision_tree_dual_detects_wrong_tree():
    f = make_named("or", n=2)
    with pytest.raises(InfeasibleError):
        decision_tree_dual(f, (0, {0: 0, 1: 1}))


def test_decision_tree_dual_for_or_by_full_scan():
    f = make_named("or", n=3)
    tree = (0, {1: 1, 0: (1, {1: 1, 0: (2, {0: 0, 1: 1})})})
    s = decision_tree_dual(f, tree)
    assert s.objective() == pytest.approx(3.0)
    assert s.check_feasible()[0]


def test_ambainis_positive_dual_value():
    s = ambainis_positive_dual()
    assert s.relaxed
    assert s.objective() == pytest.approx(2.5)
    ok, worst = s.check_feasible()
    assert ok, worst


@pytest.mark.parametrize("variant,expected", [("a", 2.0), ("b", 2.0), ("c", 4.0)])
def test_barrier_solutions_for_or(variant, expected):
    f = make_named("or", n=4)
    s = barrier_solution(f, variant)
    assert s.check_feasible()[0]
    assert s.objective() == pytest.approx(expected)


def test_barrier_c_on_promise_threshold_uses_gap():
    f = make_named("promise_threshold", n=4, k=0, d=2)
    s = barrier_solution(f, "c")
    assert s.objective() == pytest.approx(2.0)
    assert s.check_feasible()[0]
    with pytest.raises(ValueError):
        barrier_solution(f, "c", eps=0.75)


def test_barrier_b_needs_total_function():
    f = make_named("promise_threshold", n=4, k=1, d=2)
    with pytest.raises(ValueError):
        barrier_solution(f, "b")


def test_barrier_a_for_threshold_two_of_four():
    # C0 = 3, C1 = 2: objective sqrt(n * min) = sqrt(8)
    f = make_named("threshold", k=2, n=4)
    s = barrier_solution(f, "a")
    assert s.check_feasible()[0]
    assert s.objective() == pytest.approx(sqrt(8))


def test_independence_number_small_graphs():
    assert independence_number(4, [(0, 1), (1, 2), (2, 3)]) == 2
    assert independence_number(3, [(0, 1), (1, 2), (0, 2)]) == 1
    assert independence_number(5, []) == 5


@pytest.mark.parametrize("nv,edges", [(4, [(0, 1), (1, 2), (2, 3)]), (3, [(0, 1), (1, 2), (0, 2)])])
def test_graph_collision_sums_equal_p(nv, edges):
    for r in range(nv - 1):
        gc = graph_collision_dual(nv, edges, r)
        f = gc.solution.f
        for x in f.positives:
            a, b = gc.certificate(x)
            for R in itertools.combinations([i for i in range(nv) if i not in (a, b)], r):
                for y in f.negatives:
                    assert gc.collision_sum(x, y, R) == pytest.approx(gc.p, abs=1e-12)


@pytest.mark.parametrize("r", [0, 1, 2])
def test_graph_collision_dual_is_feasible_on_path(r):
    gc = graph_collision_dual(4, [(0, 1), (1, 2), (2, 3)], r)
    ok, worst = gc.solution.check_feasible()
    assert ok, worst


def test_graph_collision_randomness_must_avoid_certificate():
    gc = graph_collision_dual(3, [(0, 1), (1, 2), (0, 2)], 1)
    with pytest.raises(ValueError):
        gc.taken_arcs((1, 1, 0), (0,))


def test_graph_collision_rejects_large_r():
    with pytest.raises(ValueError):
        graph_collision_dual(3, [(0, 1)], 2)


def test_serialization_round_trip_and_hash_check():
    s = threshold_dual(2, 3)
    back = DualAdversarySolution.from_json(s.to_json(), s.f)
    for a, b in zip(s.factors, back.factors):
        assert np.allclose(a, b)
    with pytest.raises(ParseError):
        DualAdversarySolution.from_json(s.to_json(), make_named("or", n=3))
    with pytest.raises(ParseError):
        DualAdversarySolution.from_json("{not json", s.f)


def test_factor_shape_is_validated():
    f = make_named("or", n=2)
    with pytest.raises(ValueError):
        DualAdversarySolution(f, (np.ones((4, 1)),))
    with pytest.raises(ValueError):
        DualAdversarySolution(f, (np.ones((3, 1)), np.ones((4, 1))))


def test_from_gram_recovers_gram_matrices():
    s = threshold_dual(2, 4)
    back = from_gram(s.f, [s.gram(j) for j in range(4)])
    for j in range(4):
        assert np.allclose(back.gram(j), s.gram(j), atol=1e-9)
    assert back.objective() == pytest.approx(s.objective())


def test_span_program_of_dual_matches_objective():
    s = threshold_dual(2, 3)
    p = to_span_program(s)
    assert p.is_canonical()
    w0, w1, _ = p.witness_size(s.f)
    # stored witnesses realize sum_j ||psi_{j,z}||^2 on both sides
    d = s.diagonal_sums()
    pos = [s.f.index(x) for x in s.f.positives]
    neg = [s.f.index(y) for y in s.f.negatives]
    assert w1 == pytest.approx(np.max(d[pos]))
    assert w0 == pytest.approx(np.max(d[neg]))


def test_canonical_round_trip_preserves_feasibility():
    s = threshold_dual(2, 4)
    back = from_canonical_span_program(to_span_program(s), s.f)
    assert back.check_feasible()[0]
    assert back.objective() == pytest.approx(s.objective())


def test_non_canonical_program_is_rejected():
    from adversarium.span_programs import or_program
    f = make_named("or", n=3)
    with pytest.raises(InfeasibleError):
        from_canonical_span_program(or_program(3), f)


def test_threshold_dual_bound_matches_adversary_norm():
    # the dual objective is at least the adversary ratio of a simple Γ; here
    # the all-ones Γ on Hamming-one pairs of OR gives sqrt(n)
    n = 4
    f = make_named("or", n=n)
    pos, neg = f.positives, f.negatives
    g = np.array([[1.0 if sum(a != b for a, b in zip(x, y)) == 1 else 0.0 for y in neg] for x in pos])
    masked = max(power_norm(g * np.array([[float(x[j] != y[j]) for y in neg] for x in pos]))
                 for j in range(n))
    assert power_norm(g) / masked <= threshold_dual(1, n).objective() + 1e-9
