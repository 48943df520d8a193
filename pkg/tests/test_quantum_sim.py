from math import ceil, log2, pi, sqrt

import numpy as np
import pytest

from adversarium.dual_adversary import threshold_dual
from adversarium.errors import BudgetError
from adversarium.functions import make_named
from adversarium.quantum_sim import (
    QuantumState, QueryOracle, amplitude_amplification, deutsch_jozsa, detection_probability,
    dual_eigenvector, effective_gap_check, grover, make_mu_nu, phase_detection,
    reflection_spectrum_check, run_dual_adversary, run_span_program, span_eigenvector,
    span_walk_matrix)
from adversarium.span_programs import SpanProgram, or_program

from oracles import grover_success, random_isometry


def fejer(theta, K):
    """``|K^{-1} Σ_k e^{ikθ}|²`` in closed form."""
    if abs(np.sin(theta / 2)) < 1e-15:
        return 1.0
    return float((np.sin(K * theta / 2) / (K * np.sin(theta / 2))) ** 2)


def test_state_normalisation_and_measurement():
    with pytest.raises(ValueError):
        QuantumState(np.array([1.0, 1.0]))
    s = QuantumState.basis(4, 2)
    assert s.measure(np.random.default_rng(0)) == 2
    assert QuantumState.uniform(4).probabilities() == pytest.approx([0.25] * 4)


def test_oracle_counts_every_access():
    o = QueryOracle((0, 1, 1))
    v = o.phase(np.ones(3))
    assert list(v) == [1, -1, -1]
    assert o.classical(1) == 1
    assert o.queries == 2
    with pytest.raises(ValueError):
        QueryOracle((0, 2))


def test_register_oracle_and_inverse():
    o = QueryOracle((2, 0), q=3)
    v = np.zeros(6)
    v[0] = 1.0  # |j=0, b=0>
    w = o.register(v)
    assert np.argmax(w) == 2
    assert np.allclose(o.register(w, inverse=True), v)
    assert o.queries == 2
    with pytest.raises(ValueError):
        o.phase(v)


def test_reflection_costs_two_queries():
    o = QueryOracle((1, 0))
    r = o.make_reflection(lambda z: np.diag(np.array(z, float)))
    assert np.allclose(r(np.array([1.0, 1.0])), [1.0, -1.0])
    assert o.queries == 2


def test_detection_on_eigenvectors_matches_fejer_kernel():
    rng = np.random.default_rng(1)
    for _ in range(20):
        theta = rng.uniform(-pi, pi)
        K = int(rng.integers(2, 40))
        p0, _, apps = detection_probability(lambda v: np.exp(1j * theta) * v, 0.1, np.array([1.0]), K)
        assert p0 == pytest.approx(fejer(theta, K), abs=1e-12)
        assert apps == K - 1


def test_detection_examples():
    p0, _, _ = detection_probability(lambda v: v, 0.5, np.array([1.0]))
    assert p0 == pytest.approx(1.0)
    p0, _, _ = detection_probability(lambda v: -v, 0.5, np.array([1.0]), K=4)
    assert p0 == pytest.approx(0.0, abs=1e-15)
    delta = 0.2
    p0, _, _ = detection_probability(lambda v: np.exp(1j * delta) * v, delta, np.array([1.0]))
    assert p0 == pytest.approx(fejer(delta, ceil(8 / delta)), abs=1e-12)
    assert p0 < 0.05
    with pytest.raises(ValueError):
        detection_probability(lambda v: v, 0.0, np.array([1.0]))


def test_phase_detection_rounds_are_one_sided():
    res = phase_detection(lambda v: v, 0.5, np.array([1.0]), eps=0.01)
    assert res.rounds == ceil(log2(100)) and res.bit == 0
    res = phase_detection(lambda v: -v, 0.5, np.array([1.0]), eps=0.01, K=4)
    assert res.bit == 1


def test_grover_success_rate_matches_closed_form():
    n, k = 16, 2
    z = tuple(1 if j in (3, 11) else 0 for j in range(n))
    steps = int(round(pi / (4 * np.arcsin(sqrt(k / n))) - 0.5))
    hits = sum(grover(QueryOracle(z), k=k, rng=np.random.default_rng(s)) is not None for s in range(600))
    assert hits / 600 == pytest.approx(grover_success(n, k, steps), abs=0.05)


def test_grover_query_count_with_one_marked_of_four():
    o = QueryOracle((0, 0, 1, 0))
    assert grover(o, k=1) == 2
    assert o.queries == 2
    assert grover(QueryOracle((0, 0, 0, 0)), k=0) is None


def test_grover_without_known_count_finds_marked():
    found = [grover(QueryOracle((0,) * 15 + (1,)), rng=np.random.default_rng(s)) for s in range(20)]
    assert sum(f == 15 for f in found) >= 14
    assert grover(QueryOracle((0,) * 8), rng=np.random.default_rng(0)) is None


def test_amplitude_amplification_detect_mode():
    psi = np.full(8, 1 / sqrt(8))
    o = QueryOracle((0,) * 8)
    assert amplitude_amplification(psi, o.phase, 1 / 8) == 0
    with pytest.raises(ValueError):
        amplitude_amplification(psi, o.phase, 1 / 8, mode="guess")
    with pytest.raises(ValueError):
        amplitude_amplification(psi, o.phase, 1 / 8, mode="find")


def test_deutsch_jozsa_is_exact_with_one_query():
    for z in [(0,) * 4, (1,) * 4, (0, 1, 1, 0), (1, 0, 1, 0)]:
        o = QueryOracle(z)
        assert deutsch_jozsa(o) == int(len(set(z)) > 1)
        assert o.queries == 1


@pytest.mark.parametrize("seed", range(10))
def test_reflection_spectrum_on_random_isometries(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    a = random_isometry(rng, n, int(rng.integers(1, n)), complex_=True)
    b = random_isometry(rng, n, int(rng.integers(1, n)), complex_=True)
    assert reflection_spectrum_check(a, b)["match"]


def test_reflection_spectrum_quarter_turn_example():
    a = np.array([[1.0], [0.0]])
    b = np.array([[np.cos(pi / 4)], [np.sin(pi / 4)]])
    out = reflection_spectrum_check(a, b)
    assert out["match"]
    assert out["phases"] == pytest.approx([-pi / 2, pi / 2])


def test_reflection_spectrum_rejects_non_isometry():
    with pytest.raises(ValueError):
        reflection_spectrum_check(np.ones((3, 1)), np.eye(3)[:, :1])


@pytest.mark.parametrize("seed", range(10))
def test_effective_gap_inequality(seed):
    rng = np.random.default_rng(100 + seed)
    n = 6
    a = random_isometry(rng, n, 3)
    b = random_isometry(rng, n, 2)
    kernel = np.eye(n) - a @ a.T
    u = kernel @ rng.normal(size=n)
    delta = rng.uniform(0.01, 1.0)
    lhs, rhs = effective_gap_check(a, b, delta, u)
    assert lhs <= rhs + 1e-9
    with pytest.raises(ValueError):
        effective_gap_check(a, b, delta, a[:, 0])


@pytest.mark.parametrize("q", [2, 3, 7, 64])
def test_mu_nu_contract(q):
    mu, nu = make_mu_nu(q)
    assert mu @ nu.T == pytest.approx(1 - np.eye(q), abs=1e-12)
    assert np.linalg.norm(mu, axis=1).max() <= sqrt(2) + 1e-12
    assert np.linalg.norm(nu, axis=1).max() <= sqrt(2) + 1e-12
    with pytest.raises(ValueError):
        make_mu_nu(1)


def test_span_eigenvector_is_fixed_by_walk():
    p = or_program(3)
    x = (0, 1, 0)
    u, alpha = span_eigenvector(p, x, 1.0)
    m = span_walk_matrix(p, x, 1.0)
    assert np.allclose(m @ u, u)
    assert alpha == pytest.approx(4.0)


def test_span_program_runs_on_or_two():
    p = or_program(2)
    for z in [(0, 0), (1, 0), (1, 1)]:
        res = run_span_program(p, z, sizes=(2.0, 1.0), rng=np.random.default_rng(7))
        if any(z):
            assert res.p_accept > 0.9
        else:
            assert res.p_accept < 0.01
        assert res.queries % 2 == 0 and res.queries > 0


def test_span_program_with_constant_free_target_accepts():
    p = SpanProgram(1, 2, [1.0], [[1.0]], ((0, 1),), free=[[1.0]])
    assert run_span_program(p, (0,), sizes=(1.0, 1.0)).bit == 1


def test_dual_eigenvector_is_fixed_by_walk():
    s = threshold_dual(2, 3)
    for x in s.f.positives:
        u, walk = dual_eigenvector(s, x)
        assert np.allclose(walk @ u, u, atol=1e-10)


def test_dual_walk_on_majority():
    s = threshold_dual(2, 3)
    assert run_dual_adversary(s, (1, 1, 0)).p_accept > 0.9
    assert run_dual_adversary(s, (0, 0, 1)).p_accept < 0.01


def test_walk_dimension_budget():
    p = or_program(2500)
    with pytest.raises(BudgetError):
        run_span_program(p, (0,) * 2500, sizes=(2500.0, 1.0))


def test_run_result_json():
    res = run_span_program(or_program(2), (1, 0), sizes=(2.0, 1.0))
    assert '"queries"' in res.to_json()


def test_dual_walk_on_non_boolean_alphabet():
    from adversarium.learning_graphs import ksubset_lg, to_dual_adversary
    f = make_named("element_distinctness", n=3, q=3)
    g, fl = ksubset_lg(3, 2, 0)
    s = to_dual_adversary(g, fl, f)
    assert run_dual_adversary(s, (0, 1, 0)).p_accept > 0.6
    assert run_dual_adversary(s, (0, 1, 2)).p_accept < 0.34


def test_shots_resample_the_final_measurement():
    s = threshold_dual(2, 3)
    one = run_dual_adversary(s, (1, 1, 0), rng=np.random.default_rng(4))
    many = run_dual_adversary(s, (1, 1, 0), rng=np.random.default_rng(4), shots=400)
    assert many.queries == one.queries and many.shots == 400
    assert many.accepted / 400 == pytest.approx(many.p_accept, abs=0.06)
    with pytest.raises(ValueError):
        phase_detection(lambda v: v, 0.5, np.array([1.0]), shots=0)
