import math

import numpy as np
import pytest

from fracpath.grids import GridError, GridFunction
from fracpath import fbm, norms, stieltjes
from fracpath.sampling import random_trig_grid


def grid(fn, n=1024):
    x = np.linspace(0, 1, n + 1)
    return GridFunction(0, 1, fn(x))


def rs_midpoint(ffn, gfn, subdivisions=10 ** 5, a=0.0, b=1.0):
    """Midpoint Riemann-Stieltjes sums: the classical oracle."""
    xs = np.linspace(a, b, subdivisions + 1)
    mid = 0.5 * (xs[:-1] + xs[1:])
    return float(np.sum(ffn(mid) * (gfn(xs[1:]) - gfn(xs[:-1]))))


class TestPairingSign:
    def test_calibration_matches_module_constant(self):
        assert stieltjes.calibrate_pairing_sign() == stieltjes.PAIRING_SIGN
        assert stieltjes.calibrate_pairing_sign(n=512, alpha=0.25) == stieltjes.PAIRING_SIGN


class TestStieltjesIntegral:
    def test_constant_integrand_gives_increment(self):
        f = grid(lambda x: np.ones_like(x))
        g = grid(lambda x: np.sin(3 * x) + x ** 2)
        got = stieltjes.stieltjes_integral(f, g, 0.3, 0.25, 0.75)
        exact = g.values[768] - g.values[256]
        assert got == pytest.approx(exact, abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4])
    def test_x_dx_is_one_half(self, alpha):
        f = grid(lambda x: x)
        assert stieltjes.stieltjes_integral(f, f, alpha) == pytest.approx(0.5, abs=1e-4)

    def test_smooth_pair_against_midpoint_sums(self):
        ref = rs_midpoint(np.sin, lambda t: t ** 2)
        f, g = grid(np.sin, 2048), grid(lambda x: x ** 2, 2048)
        got = stieltjes.stieltjes_integral(f, g, 0.3)
        assert got == pytest.approx(ref, rel=1e-3)

    def test_bilinearity(self):
        rng = np.random.default_rng(5)
        f1, f2 = random_trig_grid(256, rng), random_trig_grid(256, rng)
        g1, g2 = random_trig_grid(256, rng), random_trig_grid(256, rng)
        a = 0.3
        lhs = stieltjes.stieltjes_integral(
            GridFunction(0, 1, 2 * f1.values - 3 * f2.values), g1, a)
        rhs = 2 * stieltjes.stieltjes_integral(f1, g1, a) \
            - 3 * stieltjes.stieltjes_integral(f2, g1, a)
        assert lhs == pytest.approx(rhs, abs=1e-10)
        lhs_g = stieltjes.stieltjes_integral(
            f1, GridFunction(0, 1, g1.values + 0.5 * g2.values), a)
        rhs_g = stieltjes.stieltjes_integral(f1, g1, a) \
            + 0.5 * stieltjes.stieltjes_integral(f1, g2, a)
        assert lhs_g == pytest.approx(rhs_g, abs=1e-10)

    def test_interval_additivity_improves_under_refinement(self):
        gaps = []
        for n in (512, 1024, 2048):
            f, g = grid(np.cos, n), grid(lambda x: x ** 2 + np.sin(2 * x), n)
            full = stieltjes.stieltjes_integral(f, g, 0.3)
            split = stieltjes.stieltjes_integral(f, g, 0.3, 0.0, 0.5) \
                + stieltjes.stieltjes_integral(f, g, 0.3, 0.5, 1.0)
            gaps.append(abs(full - split) / abs(full))
        assert gaps[-1] < 1e-2
        assert gaps[0] > gaps[-1]

    def test_classical_consistency_with_derivative_quadrature(self):
        # for smooth g, int f dg = int f g' dx
        import mpmath
        ref = float(mpmath.quad(lambda t: math.exp(-t) * math.cos(3 * t), [0, 1]))
        f = grid(lambda x: np.exp(-x), 2048)
        g = grid(lambda x: np.sin(3 * x) / 3, 2048)
        assert stieltjes.stieltjes_integral(f, g, 0.25) == pytest.approx(ref, rel=1e-3)

    def test_rejects_misaligned_interval(self):
        f = grid(lambda x: x, 64)
        with pytest.raises(GridError):
            stieltjes.stieltjes_integral(f, f, 0.3, 0.1234567, 0.75)

    def test_rejects_nonfinite_values(self):
        f = grid(lambda x: x, 64)
        bad = GridFunction(0, 1, np.where(np.arange(65) == 0, np.nan, 1.0),
                           endpoint_nan_ok=True)
        with pytest.raises(GridError):
            stieltjes.stieltjes_integral(bad, f, 0.3)


class TestIndicatorConsistency:
    def test_full_interval_gap_exactly_zero(self):
        f = grid(lambda x: np.sin(x) + 1, 256)
        g = grid(lambda x: x ** 2, 256)
        rep = stieltjes.stieltjes_indicator_consistency(f, g, 0.25, 0.0, 1.0)
        assert rep.gap == 0.0

    def test_interior_window_small_gap(self):
        f = grid(lambda x: np.sin(x) + 1, 2048)
        g = grid(lambda x: np.sin(2 * x) + x ** 2, 2048)
        rep = stieltjes.stieltjes_indicator_consistency(f, g, 0.25, 0.25, 0.75)
        assert rep.gap <= 1e-2

    def test_constant_integrand_both_sides(self):
        f = grid(lambda x: np.ones_like(x), 1024)
        g = grid(lambda x: np.cos(2 * x), 1024)
        rep = stieltjes.stieltjes_indicator_consistency(f, g, 0.3, 0.25, 0.75)
        exact = g.values[768] - g.values[256]
        assert rep.direct == pytest.approx(exact, abs=1e-12)
        assert rep.embedded == pytest.approx(exact, abs=0.05)


class TestBound357:
    def test_zero_integrand(self):
        f = grid(lambda x: np.zeros_like(x), 256)
        g = grid(lambda x: x, 256)
        rep = stieltjes.bound_357_check(f, g, 0.3)
        assert rep.lhs == 0.0 and rep.holds

    def test_closed_form_case(self):
        # f = 1, g = x, alpha = 1/2: lhs = 1, rhs = (2/pi) / (1/2) = 4/pi
        f = grid(lambda x: np.ones_like(x), 512)
        g = grid(lambda x: x, 512)
        rep = stieltjes.bound_357_check(f, g, 0.5)
        assert rep.lhs == pytest.approx(1.0, rel=1e-10)
        assert rep.rhs == pytest.approx(4 / math.pi, rel=1e-3)
        assert rep.holds

    @pytest.mark.parametrize("seed", range(0, 100, 4))
    def test_randomized_sweep(self, seed):
        rng = np.random.default_rng(seed)
        f = random_trig_grid(256, rng)
        g = fbm.fbm_path(0.75, 256, 1000 + seed)
        rep = stieltjes.bound_357_check(f, g, 0.3)
        assert rep.holds, rep.to_dict()


class TestPathwiseBound:
    def test_zero(self):
        drv = fbm.driving_field(fbm.FbmConfig(hurst=0.75, n=128, m=1, T=1.0,
                                              seed=4), 0.3)
        u = grid(lambda x: np.zeros_like(x), 128)
        assert stieltjes.pathwise_integral_bound_check(u, drv).holds

    def test_unit_integrand_boundary_identity(self):
        # u = 1: integral is B(1) - B(0); bound G/(1-alpha)
        drv = fbm.driving_field(fbm.FbmConfig(hurst=0.75, n=128, m=1, T=1.0,
                                              seed=4), 0.3)
        u = grid(lambda x: np.ones_like(x), 128)
        rep = stieltjes.pathwise_integral_bound_check(u, drv)
        path = drv.field.values[0]
        assert rep.lhs >= abs(path[-1] - path[0]) - 1e-12
        assert rep.rhs == pytest.approx(drv.lambda_value / 0.7, rel=1e-9)
        assert rep.holds

    @pytest.mark.parametrize("seed", range(0, 40, 3))
    def test_sweep(self, seed):
        rng = np.random.default_rng(seed)
        drv = fbm.driving_field(fbm.FbmConfig(hurst=0.75, n=128, m=1, T=1.0,
                                              seed=seed), 0.3)
        u = random_trig_grid(128, rng)
        assert stieltjes.pathwise_integral_bound_check(u, drv).holds
