import math

import numpy as np
import pytest

from fracpath.grids import GridError
from fracpath import fbm, norms


class TestPathGeneration:
    def test_starts_at_zero(self):
        for seed in range(5):
            assert fbm.fbm_path(0.75, 64, seed).values[0] == 0.0

    def test_deterministic(self):
        p1 = fbm.fbm_path(0.6, 256, 42)
        p2 = fbm.fbm_path(0.6, 256, 42)
        assert np.array_equal(p1.values, p2.values)
        assert not np.array_equal(p1.values, fbm.fbm_path(0.6, 256, 43).values)

    def test_stream_splitting_changes_path(self):
        p0 = fbm.fbm_path(0.75, 64, 7, (0,))
        p1 = fbm.fbm_path(0.75, 64, 7, (1,))
        assert not np.array_equal(p0.values, p1.values)

    def test_rejects_bad_hurst(self):
        with pytest.raises(GridError):
            fbm.fbm_path(1.2, 64, 0)

    def test_cholesky_fallback_matches_law(self):
        # force the dense path and compare second moments against the
        # analytic covariance on a small grid
        rng = np.random.default_rng(0)
        n, S = 16, 4000
        c = fbm.increment_covariance(0.75, np.arange(n))
        samples = np.array([fbm._fgn_cholesky(c, n, rng) for _ in range(S)])
        emp = samples.T @ samples / S
        idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        np.testing.assert_allclose(emp, c[idx], atol=0.12)


class TestCovarianceLaw:
    def test_variance_law_h075(self):
        rep = fbm.covariance_validator(0.75, 3000, seed=5, n=64)
        assert rep.passed, max(rep.entries, key=lambda e: abs(e["z"]))

    def test_brownian_case_disjoint_increments(self):
        rep = fbm.covariance_validator(0.5, 3000, seed=9, n=64)
        assert rep.passed
        entry = [e for e in rep.entries if e["kind"] == "disjoint_increments"][0]
        assert entry["expected"] == 0.0
        assert abs(entry["z"]) <= 4.0

    def test_covariance_h06(self):
        rep = fbm.covariance_validator(0.6, 3000, seed=2, n=64)
        assert rep.max_abs_z <= 4.0

    def test_rejects_small_sample_count(self):
        with pytest.raises(GridError):
            fbm.covariance_validator(0.7, 100, seed=1)

    def test_self_similarity(self):
        # increments at lag k on an n-grid and lag 2k on a 2n-grid share the
        # law after scaling by 2^H; compare empirical variances
        H, S = 0.75, 4000
        v1 = np.array([fbm.fbm_path(H, 64, 3, (s,)).values[8] for s in range(S)])
        v2 = np.array([fbm.fbm_path(H, 128, 4, (s,)).values[16] for s in range(S)])
        # same physical increment on both grids: variances must agree
        z = (v1.var(ddof=1) - v2.var(ddof=1)) / (v1.var(ddof=1) * math.sqrt(4.0 / S))
        assert abs(z) <= 4.0

    def test_stationary_increments(self):
        H, S, n = 0.7, 4000, 64
        paths = np.array([fbm.fbm_path(H, n, 17, (s,)).values for s in range(S)])
        lag = 8
        sigma2 = (lag / n) ** (2 * H)
        for off in (0, 16, 40):
            var = (paths[:, off + lag] - paths[:, off]).var(ddof=1)
            z = (var - sigma2) / (sigma2 * math.sqrt(2.0 / (S - 1)))
            assert abs(z) <= 3.5, (off, z)


class TestDrivingField:
    def test_frozen_slices_identical(self):
        cfg = fbm.FbmConfig(hurst=0.75, n=64, m=6, T=0.5, seed=3)
        df = fbm.driving_field(cfg, 0.3)
        for j in range(1, 7):
            assert np.array_equal(df.field.values[0], df.field.values[j])

    def test_linear_stub_lambda_closed_form(self):
        st = fbm.stub_driving_field("linear", 128, 4, 1.0, 0.3)
        exact = 1.0 / (math.gamma(0.7) * math.gamma(1.3))
        assert st.lambda_value == pytest.approx(exact, rel=1e-12)

    def test_spatial_origin_pinned_to_zero(self):
        for kind in ("zero", "linear", "quadratic", "sine"):
            st = fbm.stub_driving_field(kind, 32, 3, 1.0, 0.3)
            assert np.all(st.field.values[:, 0] == 0.0)

    @pytest.mark.parametrize("seed", range(0, 100, 7))
    def test_lambda_finite_for_fbm(self, seed):
        cfg = fbm.FbmConfig(hurst=0.75, n=96, m=1, T=1.0, seed=seed)
        df = fbm.driving_field(cfg, 0.3)
        assert np.isfinite(df.lambda_value) and df.lambda_value > 0
        assert np.isfinite(df.holder_norm)

    def test_lambda_matches_norms_module(self):
        cfg = fbm.FbmConfig(hurst=0.75, n=64, m=2, T=1.0, seed=12)
        df = fbm.driving_field(cfg, 0.3)
        assert df.lambda_value == pytest.approx(
            norms.lambda_alpha(df.field, 0.3), rel=1e-12)

    def test_sheet_rejects_large_time_grid(self):
        with pytest.raises(GridError):
            fbm.FbmConfig(hurst=0.75, n=32, m=65, T=1.0, seed=0, time_model="sheet")

    def test_sheet_model(self):
        cfg = fbm.FbmConfig(hurst=0.75, n=32, m=12, T=1.0, seed=5,
                            time_model="sheet")
        df = fbm.driving_field(cfg, 0.3)
        assert np.all(df.field.values[:, 0] == 0.0)
        assert np.all(df.field.values[0] == 0.0)  # sheet vanishes at t = 0
        assert not df.time_constant
        df2 = fbm.driving_field(cfg, 0.3)
        assert np.array_equal(df.field.values, df2.field.values)

    def test_retimed_keeps_path_and_lambda(self):
        cfg = fbm.FbmConfig(hurst=0.75, n=48, m=10, T=1.0, seed=8)
        df = fbm.driving_field(cfg, 0.3)
        rv = df.retimed(4, 0.25)
        assert rv.field.m == 4 and rv.field.T == 0.25
        assert np.array_equal(rv.field.values[0], df.field.values[0])
        assert rv.lambda_value == df.lambda_value
