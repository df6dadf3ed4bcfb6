import numpy as np
import pytest

from fracpath import coefficients as co
from fracpath.solver import quadruple_inequality_check

ALL_KINDS = [
    co.zero_coefficient(),
    co.constant_coefficient(-2.0),
    co.tanh_coefficient(1.0),
    co.tanh_coefficient(0.4),
    co.gaussian_bump(center=0.3, width=0.8, amplitude=1.5),
    co.smoothed_biot_savart(epsilon=1.2),
]


@pytest.mark.parametrize("coeff", ALL_KINDS, ids=lambda c: c.name)
def test_certified_constants_are_upper_bounds(coeff):
    slacks = co.spot_check_constants(coeff, radius=5.0, samples=5000, seed=1)
    for key, slack in slacks.items():
        assert slack >= -1e-12, (coeff.name, key, slack)


@pytest.mark.parametrize("coeff", ALL_KINDS, ids=lambda c: c.name)
def test_derivative_matches_finite_differences(coeff):
    x = np.linspace(-3, 3, 401)
    eps = 1e-6
    fd = (coeff(x + eps) - coeff(x - eps)) / (2 * eps)
    np.testing.assert_allclose(coeff.deriv(x), fd, atol=1e-7)


def test_registry_round_trip():
    c = co.coefficient_from_kind("tanh", scale=0.5)
    assert c.lipschitz == 0.5
    with pytest.raises(ValueError):
        co.coefficient_from_kind("nope")


class TestQuadrupleInequality:
    def test_degenerate_quadruple_is_zero(self):
        h = co.tanh_coefficient()
        x = 0.7
        lhs = abs(h(x) - h(x) - h(x) + h(x))
        assert lhs == 0.0

    def test_linear_coefficient_needs_only_the_lipschitz_term(self):
        # h with h'' = 0: the first term is exact, the second superfluous
        h = co.CoefficientFunction("linear", lambda x: 0.5 * np.asarray(x),
                                   lambda x: np.full_like(np.asarray(x, float), 0.5),
                                   0.5, np.inf, lambda N: 0.0)
        rng = np.random.default_rng(0)
        X = rng.uniform(-2, 2, (1000, 4))
        lhs = np.abs(0.5 * (X[:, 0] - X[:, 1] - X[:, 2] + X[:, 3]))
        rhs = 0.5 * np.abs(X[:, 0] - X[:, 1] - X[:, 2] + X[:, 3])
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_tanh_sweep(self):
        rep = quadruple_inequality_check(co.tanh_coefficient(), 2.0, 10 ** 4, 3)
        assert rep["passed"] and rep["violations"] == 0

    def test_gaussian_bump_sweep(self):
        rep = quadruple_inequality_check(
            co.gaussian_bump(width=0.7), 2.0, 10 ** 4, 5)
        assert rep["passed"] and rep["violations"] == 0

    def test_biot_savart_sweep(self):
        rep = quadruple_inequality_check(
            co.smoothed_biot_savart(epsilon=1.0), 3.0, 10 ** 4, 7)
        assert rep["passed"] and rep["violations"] == 0
