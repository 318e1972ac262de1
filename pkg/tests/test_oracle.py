import numpy as np
import pytest

from bttb_precond import BTTBOperator, Circulant, RankDeficiencyMismatch, SymToeplitz, TooLarge
from bttb_precond import circulant_apply
from bttb_precond.oracle import (
    brute_force_closest_circulant,
    dense_materialize,
    dense_pinv,
    prop1_check,
    prop1_sweep,
    random_rank_matrix,
)


def test_identity_materialization():
    np.testing.assert_array_equal(dense_materialize(SymToeplitz(np.eye(4)[0])), np.eye(4))


def test_kronecker_block_structure():
    op = BTTBOperator(SymToeplitz([1.0, 2.0]), SymToeplitz([3.0, 4.0, 5.0]), 1.0)
    D = dense_materialize(op)
    T2 = np.array([[3, 4, 5], [4, 3, 4], [5, 4, 3]])
    np.testing.assert_array_equal(D[:3, :3], T2)
    np.testing.assert_array_equal(D[:3, 3:], 2 * T2)
    assert D.shape == (6, 6)


def test_circulant_self_consistency(rng):
    C = Circulant(rng.standard_normal(5))
    D = dense_materialize(C)
    for j in range(5):
        np.testing.assert_allclose(circulant_apply(C, np.eye(5)[j]), D[:, j], atol=1e-12)


def test_brute_force_trivial():
    assert brute_force_closest_circulant(SymToeplitz([2.0])).c.tolist() == [2.0]
    np.testing.assert_array_equal(brute_force_closest_circulant(SymToeplitz(np.eye(5)[0])).c, np.eye(5)[0])


def test_too_large():
    with pytest.raises(TooLarge):
        dense_materialize(SymToeplitz(np.ones(4097)))
    with pytest.raises(TooLarge):
        brute_force_closest_circulant(SymToeplitz(np.ones(65)))


def test_pinv(rng):
    np.testing.assert_allclose(dense_pinv(np.eye(3)), np.eye(3))
    u, v = rng.standard_normal(4), rng.standard_normal(4)
    np.testing.assert_allclose(dense_pinv(np.outer(u, v)),
                               np.outer(v, u) / (u @ u * (v @ v)), atol=1e-12)
    A = rng.standard_normal((8, 8))
    np.testing.assert_allclose(A @ dense_pinv(A) @ A, A, atol=1e-10)


def test_prop1_trivial_cases(rng):
    A = random_rank_matrix(rng, 6, 4)
    beta = A @ rng.standard_normal(6)
    r = prop1_check(A, np.zeros((6, 6)), beta, np.zeros(6), 4)
    assert r.lhs == pytest.approx(0.0, abs=1e-12) and r.holds
    dA = 1e-3 * rng.standard_normal((5, 5))
    r = prop1_check(np.eye(5), dA, np.ones(5), np.zeros(5), 5)
    assert r.kappa == pytest.approx(1.0) and r.holds


def test_prop1_rank_mismatch(rng):
    A = random_rank_matrix(rng, 5, 3)
    with pytest.raises(RankDeficiencyMismatch):
        prop1_check(A, np.zeros((5, 5)), A @ np.ones(5), np.zeros(5), 4)


def test_prop1_sweep_all_hold():
    results = prop1_sweep(500)
    assert sum(r.holds for r in results) == 500
