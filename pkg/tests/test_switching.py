import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fxc.errors import ConfigInvalid
from fxc.switching import DeadZone, dead_zone_indicator, sg, switched_error

gammas = st.floats(-50, 50, allow_nan=False)
kappas = st.floats(1e-3, 10, allow_nan=False)


@pytest.mark.parametrize("gamma, kappa, expected", [(2, 1, 1.0), (0, 1, 0.0), (0.5, 1, 0.4), (-2, 1, -1.0)])
def test_sg_examples(gamma, kappa, expected):
    assert sg(gamma, DeadZone(kappa)) == pytest.approx(expected, abs=1e-15)


def test_indicator_examples():
    dz = DeadZone(0.6)
    assert dead_zone_indicator(0.6, dz) == 1.0
    assert dead_zone_indicator(0.0, dz) == 0.0
    assert dead_zone_indicator(-5.0, DeadZone(1.0)) == 1.0


@pytest.mark.parametrize("gamma, expected", [(0.3, 0.0), (2.0, 1.0), (-3.0, -2.0)])
def test_switched_error_examples(gamma, expected):
    assert switched_error(gamma, DeadZone(1.0)) == pytest.approx(expected)


def test_deadzone_rejects_nonpositive():
    with pytest.raises(ConfigInvalid):
        DeadZone(0.0)


def test_array_broadcast():
    g = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    np.testing.assert_allclose(sg(g, 1.0), [-1, -0.4, 0, 0.4, 1])
    np.testing.assert_array_equal(dead_zone_indicator(g, 1.0), [1, 0, 0, 0, 1])


@given(gammas, kappas)
def test_sg_bounded(gamma, kappa):
    assert abs(sg(gamma, kappa)) <= 1.0


@given(st.floats(0.05, 10), st.sampled_from([1e-3, 1e-6]), st.sampled_from([1.0, -1.0]))
def test_sg_continuous_at_boundary(kappa, delta, sign):
    # the inner branch reaches the boundary with slope 2
    inner = sg(sign * (kappa - delta), kappa)
    outer = sg(sign * (kappa + delta), kappa)
    assert abs(inner - outer) <= 3 * delta


@given(gammas, kappas)
def test_product_identity(gamma, kappa):
    prod = sg(gamma, kappa) * dead_zone_indicator(gamma, kappa)
    expected = np.sign(gamma) if abs(gamma) >= kappa else 0.0
    assert prod == expected


@given(gammas, kappas)
def test_switched_error_dissipative(gamma, kappa):
    assert switched_error(gamma, kappa) * gamma >= 0.0


@given(gammas, kappas)
def test_switched_error_is_odd(gamma, kappa):
    assert switched_error(-gamma, kappa) == -switched_error(gamma, kappa)
