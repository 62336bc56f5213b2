import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from fxc.errors import DimensionMismatch, EmptyGains, NonFiniteState, NonSquare, NotHurwitz
from fxc.observer import (
    ObserverGains,
    assumption_margin,
    companion_matrix,
    is_hurwitz,
    observer_derivative,
    solve_lyapunov,
)

TABLE_GAINS = [-15.0, -80.0]


def test_companion_examples():
    np.testing.assert_array_equal(companion_matrix(TABLE_GAINS), [[-15, 1], [-80, 0]])
    np.testing.assert_array_equal(companion_matrix([-1]), [[-1]])
    np.testing.assert_array_equal(companion_matrix([0, 0, 0]), np.diag([1.0, 1.0], 1))
    with pytest.raises(EmptyGains):
        companion_matrix([])


def test_is_hurwitz_examples():
    assert is_hurwitz([[-15, 1], [-80, 0]])
    assert not is_hurwitz(np.eye(2))
    assert not is_hurwitz([[0, 1], [0, 0]])
    with pytest.raises(NonSquare):
        is_hurwitz(np.zeros((2, 3)))


def test_table_roots_match_characteristic_polynomial():
    # lambda^2 + 15 lambda + 80
    roots = np.roots([1, 15, 80])
    assert np.all(roots.real < 0)
    np.testing.assert_allclose(
        np.sort_complex(np.linalg.eigvals(companion_matrix(TABLE_GAINS))), np.sort_complex(roots)
    )


def test_observer_derivative_examples():
    g = ObserverGains.from_gains(TABLE_GAINS)
    np.testing.assert_allclose(observer_derivative([0, 0], 0.0, 1.0, g), [15, 80])
    np.testing.assert_allclose(observer_derivative([1, 2], 3.0, 1.0, g), [2, 3])
    np.testing.assert_allclose(observer_derivative([0.4, -1, 5], 2.0, 0.4, ObserverGains.from_gains([-1, -2, -3])), [-1, 5, 2])


def test_observer_derivative_errors():
    g = ObserverGains.from_gains(TABLE_GAINS)
    with pytest.raises(DimensionMismatch):
        observer_derivative([0, 0, 0], 0.0, 0.0, g)
    with pytest.raises(NonFiniteState):
        observer_derivative([np.nan, 0], 0.0, 0.0, g)


def test_lyapunov_examples():
    cert = solve_lyapunov(-np.eye(2), 2.0)
    np.testing.assert_allclose(cert.h_matrix, np.eye(2))
    assert cert.residual == 0.0
    cert = solve_lyapunov([[-1, 0], [0, -3]], 6.0)
    np.testing.assert_allclose(cert.h_matrix, np.diag([3.0, 1.0]))


def test_lyapunov_table_gains_against_scipy():
    chi = companion_matrix(TABLE_GAINS)
    cert = solve_lyapunov(chi, 1.0)
    assert cert.residual <= 1e-8
    assert cert.min_eigenvalue > 0
    np.testing.assert_allclose(cert.h_matrix, cert.h_matrix.T, atol=1e-10)
    oracle = scipy.linalg.solve_continuous_lyapunov(chi.T, -np.eye(2))
    np.testing.assert_allclose(cert.h_matrix, oracle, rtol=1e-10)


def test_lyapunov_rejects_unstable():
    with pytest.raises(NotHurwitz):
        solve_lyapunov(companion_matrix([1, 1]), 1.0)


def test_scalar_case():
    cert = solve_lyapunov([[-1.0]], 4.0)
    assert cert.h_matrix[0, 0] == pytest.approx(2.0)


def test_assumption_margin_hand_value():
    # chi = -I, H = I: H chi + chi^T H + 4 I = 2 I
    assert assumption_margin(-np.eye(2), np.eye(2)) == pytest.approx(2.0)


def _random_stable(rng, n):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(rng.uniform(-10, -0.1, n)) @ q.T


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0.1, 10))
def test_lyapunov_random_stable(seed, n, rho):
    chi = _random_stable(np.random.default_rng(seed), n)
    cert = solve_lyapunov(chi, rho)
    assert cert.residual <= 1e-8
    assert cert.min_eigenvalue > 0
    oracle = scipy.linalg.solve_continuous_lyapunov(chi.T, -rho * np.eye(n))
    np.testing.assert_allclose(cert.h_matrix, oracle, rtol=1e-8, atol=1e-12)
