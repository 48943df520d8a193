import numpy as np
import pytest

from adversarium import adversary as A
from adversarium.errors import ParseError
from adversarium.functions import CertificateStructure, make_named
from oracles import power_norm


def threshold_relation(k, n):
    f = make_named("threshold", k=k, n=n)
    X = [x for x in f.positives if sum(x) == k]
    Y = [y for y in f.negatives if sum(y) == k - 1]
    return A.relation_adversary(f, X, Y, A.hamming_one)


@pytest.mark.parametrize("k,n", [(1, 3), (2, 3), (2, 4), (3, 5), (1, 5)])
def test_threshold_relation_value(k, n):
    assert A.adv_ratio(threshold_relation(k, n)) == pytest.approx(np.sqrt(k * (n - k + 1)), abs=1e-9)


def test_norm_matches_power_iteration():
    g = threshold_relation(2, 4)
    assert g.norm() == pytest.approx(power_norm(g.m), rel=1e-9)


def test_ambainis_values():
    assert A.adv_ratio(A.ambainis_gamma(0.75, 0.5, 0, 0)) == pytest.approx(2.5, abs=1e-9)
    assert A.adv_ratio(A.ambainis_gamma(0.5788, 0.7065, 0.1834, -0.2120)) >= 2.513


def test_delta_mask_and_zero_matrix():
    g = threshold_relation(2, 3)
    m = A.delta_mask(g, 0).m
    assert m.shape == g.m.shape and set(np.unique(m)) <= {0.0, 1.0}
    with pytest.raises(ValueError):
        A.delta_mask(g, 5)
    with pytest.raises(ValueError, match="zero"):
        A.adv_report(A.AdversaryMatrix(g.f, np.zeros_like(g.m)))


def test_matrix_json_round_trip():
    g = threshold_relation(2, 3)
    h = A.AdversaryMatrix.from_json(g.to_json())
    assert np.allclose(h.m, g.m) and h.rows == g.rows
    with pytest.raises(ParseError):
        A.AdversaryMatrix.from_json('{"rows": 1}')


def test_mathias_and_hadamard_bounds_random():
    rng = np.random.default_rng(5)
    for _ in range(20):
        b, c = rng.normal(size=(4, 5)), rng.normal(size=(4, 5))
        a = b * c
        assert np.linalg.norm(a, 2) <= A.mathias_bound(a, b, c) + 1e-9
        mask = (rng.random((4, 5)) < 0.5).astype(float)
        lhs, rhs = A.hadamard_delta_check(a, mask)
        assert lhs <= rhs + 1e-9


def test_modular_sum_array_is_orthogonal():
    assert A.modular_sum_array(3, 4).is_valid()
    assert not A.OrthogonalArray(2, 2, ((0, 0),)).is_valid()


def test_e_projectors():
    e0, e1 = A.e_projectors(5)
    assert np.allclose(e0 @ e0, e0) and np.allclose(e1 @ e1, e1) and np.allclose(e0 @ e1, 0)


def test_sum_problem_is_k_sum():
    cert = CertificateStructure.k_subset(3, 2)
    f = A.sum_problem(cert, 5)
    g = make_named("k_sum", n=3, q=5, k=2)
    assert f.domain == g.domain and f.values == g.values
