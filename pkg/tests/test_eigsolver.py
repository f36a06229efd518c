import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mda.eigsolver import (HyperParams, SolverError, objective_value, select_components, solve,
                           solve_full)


def _pair(seed, n=8, rank=None):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, rank or n))
    N = rng.normal(size=(n, n))
    return M @ M.T, N @ N.T + np.eye(n)


@pytest.mark.parametrize("seed", range(5))
def test_generalized_eigen_relations(seed):
    A, D = _pair(seed)
    p = solve_full(A, D)
    np.testing.assert_allclose(p.B.T @ D @ p.B, np.eye(p.q), atol=1e-9)
    np.testing.assert_allclose(A @ p.B, D @ p.B * p.eigenvalues, atol=1e-8)
    assert np.all(np.diff(p.eigenvalues) <= 0)
    np.testing.assert_allclose(p.eigenvalues, oracles.dense_generalized_eigvals(A, D)[:p.q],
                               rtol=1e-9)


def test_sign_convention():
    p = solve_full(*_pair(1))
    idx = np.argmax(np.abs(p.B), axis=0)
    assert np.all(p.B[idx, np.arange(p.q)] > 0)


def test_rank_deficient_numerator_truncates():
    A, D = _pair(2, n=10, rank=2)
    assert solve_full(A, D).q == 2


def test_not_positive_definite():
    with pytest.raises(SolverError, match="min diagonal"):
        solve_full(np.eye(2), -np.eye(2))


def test_no_positive_eigenvalue():
    with pytest.raises(SolverError, match="no positive eigenvalue"):
        solve_full(-np.eye(3), np.eye(3))


def test_component_rules():
    lam = np.array([5.0, 3.0, 1.0, 1.0])
    assert select_components(lam, 2) == 2
    assert select_components(lam, 10) == 4
    assert select_components(lam, 0.5) == 1
    assert select_components(lam, 0.8) == 2
    assert select_components(lam, 0.9) == 3
    assert select_components(lam, 1.0) == 4
    for bad in (0, 0.0, 1.5, True, "x"):
        with pytest.raises(ValueError):
            select_components(lam, bad)


def test_solve_optimal_objective_is_top_eigenvalue():
    A, D = _pair(3)
    p = solve(A, D, 1)
    assert objective_value(A, D, p.B) == pytest.approx(p.eigenvalues[0], rel=1e-10)
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert objective_value(A, D, rng.normal(size=(8, 1))) <= p.eigenvalues[0] * (1 + 1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3), st.booleans())
def test_objective_scale_invariant(seed, c, negate):
    A, D = _pair(seed, n=5)
    B = np.random.default_rng(seed).normal(size=(5, 2))
    c = -c if negate else c
    assert objective_value(A, D, c * B) == pytest.approx(objective_value(A, D, B), rel=1e-10)


def test_objective_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        objective_value(np.eye(2), np.eye(2), np.zeros((2, 1)))


def test_hyperparam_validation():
    HyperParams(alpha=0, gamma=0, beta=1)
    for kw in ({"alpha": -1}, {"beta": 1.1}, {"gamma": -0.1}, {"epsilon": 0},
               {"components": 0}):
        with pytest.raises(ValueError):
            HyperParams(**kw)
    assert HyperParams().to_dict()["epsilon"] == 1e-5
