import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracpath.grids import GridFunction, SpaceTimeField
from fracpath import norms


def constant_field(c, m=3, n=64):
    return SpaceTimeField.constant_in_time(np.full(n + 1, float(c)), m, 1.0)


def ramp_field(m=3, n=256):
    return SpaceTimeField.constant_in_time(np.linspace(0, 1, n + 1), m, 1.0)


def random_field(seed, m=3, n=48):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, m + 1)[:, None]
    xi = np.linspace(0, 1, n + 1)[None, :]
    vals = sum((rng.standard_normal() + rng.standard_normal() * t)
               * np.sin(k * np.pi * xi) / k ** 2 for k in range(1, 5))
    return SpaceTimeField(1.0, vals + rng.standard_normal())


class TestNormAlphaInfty:
    def test_zero(self):
        assert norms.norm_alpha_infty(constant_field(0.0), 0.3) == 0.0

    def test_constant(self):
        assert norms.norm_alpha_infty(constant_field(-2.5), 0.3) == pytest.approx(2.5)

    def test_ramp_closed_form(self):
        # 1 + sup_xi int_0^xi (xi-eta)^(-1/2) deta = 1 + 2
        val = norms.norm_alpha_infty(ramp_field(), 0.5)
        assert val == pytest.approx(3.0, rel=1e-12)


class TestNorm1mAlphaInfty0:
    def test_constant_vanishes(self):
        assert norms.norm_1malpha_infty0(constant_field(4.0), 0.25) == 0.0

    def test_ramp_closed_form(self):
        # Hoelder quotient sup = 1, tail sup = 1/alpha = 4; attained together
        val = norms.norm_1malpha_infty0(ramp_field(), 0.25)
        assert val == pytest.approx(5.0, rel=1e-12)

    @given(c=st.floats(-8, 8))
    @settings(max_examples=20, deadline=None)
    def test_homogeneity(self, c):
        f = random_field(5)
        scaled = SpaceTimeField(f.T, c * f.values)
        assert norms.norm_1malpha_infty0(scaled, 0.3) == pytest.approx(
            abs(c) * norms.norm_1malpha_infty0(f, 0.3), rel=1e-12, abs=1e-12)


class TestNormAlpha1:
    def test_zero(self):
        assert norms.norm_alpha_1(GridFunction(0, 1, np.zeros(65)), 0.3) == 0.0

    def test_constant_closed_form(self):
        # second term vanishes; first is 1/(1-alpha)
        f = GridFunction(0, 1, np.ones(129))
        assert norms.norm_alpha_1(f, 0.25) == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_ramp_closed_form(self):
        # 1/(2-a) + 1/((1-a)(2-a)) = 2 at a = 1/2
        f = GridFunction(0, 1, np.linspace(0, 1, 1025))
        assert norms.norm_alpha_1(f, 0.5) == pytest.approx(2.0, abs=1e-4)


class TestLambdaAlpha:
    def test_constant_vanishes(self):
        assert norms.lambda_alpha(constant_field(3.0), 0.3) == 0.0

    @pytest.mark.parametrize("alpha", [0.25, 0.3, 0.5])
    def test_ramp_closed_form(self, alpha):
        val = norms.lambda_alpha(ramp_field(), alpha)
        exact = 1.0 / (math.gamma(1 - alpha) * math.gamma(1 + alpha))
        assert val == pytest.approx(exact, rel=1e-12)

    def test_ramp_at_half_is_two_over_pi(self):
        assert norms.lambda_alpha(ramp_field(), 0.5) == pytest.approx(2 / math.pi)

    @pytest.mark.parametrize("seed", range(8))
    def test_bounded_by_holder_norm(self, seed):
        # Lambda_a(g) <= ||g||_{1-a,inf,0} / (Gamma(1-a) Gamma(a))
        f = random_field(seed)
        a = 0.3
        lam = norms.lambda_alpha(f, a)
        bound = norms.norm_1malpha_infty0(f, a) / (math.gamma(1 - a) * math.gamma(a))
        assert lam <= bound * (1 + 1e-6)


class TestSharedProperties:
    @given(c=st.floats(-10, 10))
    @settings(max_examples=20, deadline=None)
    def test_homogeneity_all_norms(self, c):
        f = random_field(11)
        scaled = SpaceTimeField(f.T, c * f.values)
        g = GridFunction(0, 1, f.values[0])
        gs = GridFunction(0, 1, c * f.values[0])
        assert norms.norm_alpha_infty(scaled, 0.3) == pytest.approx(
            abs(c) * norms.norm_alpha_infty(f, 0.3), rel=1e-12, abs=1e-12)
        assert norms.norm_alpha_1(gs, 0.3) == pytest.approx(
            abs(c) * norms.norm_alpha_1(g, 0.3), rel=1e-12, abs=1e-12)
        assert norms.lambda_alpha(scaled, 0.3) == pytest.approx(
            abs(c) * norms.lambda_alpha(f, 0.3), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_triangle_inequality(self, seed):
        f, g = random_field(seed), random_field(seed + 100)
        fg = SpaceTimeField(1.0, f.values + g.values)
        for norm in (norms.norm_alpha_infty, norms.norm_1malpha_infty0):
            assert norm(fg, 0.3) <= norm(f, 0.3) + norm(g, 0.3) + 1e-12

    def test_refinement_stability_for_holder_function(self):
        # |x - 1/2|^0.7 is 0.7-Hoelder with a grid-aligned kink; the
        # discretized norms must converge under refinement
        vals = []
        for n in (128, 256, 512, 1024):
            x = np.linspace(0, 1, n + 1)
            f = SpaceTimeField.constant_in_time(np.abs(x - 0.5) ** 0.7, 1, 1.0)
            vals.append(norms.norm_alpha_infty(f, 0.3))
        diffs = [abs(a - b) for a, b in zip(vals, vals[1:])]
        assert diffs[0] > diffs[1] > diffs[2]
