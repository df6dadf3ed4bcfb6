"""Seedable fractional Brownian motion paths and driving fields.

Paths are generated by Davies-Harte circulant embedding of the fractional
Gaussian noise covariance (O(n log n)), with a dense Cholesky fallback when
the embedding is not nonnegative.  A fixed seed determines the output
bit-for-bit; ensemble member k draws from the split stream
``SeedSequence((seed, k))``.

The equation's driver is a space-time field g(t, xi).  The joint temporal
law is not pinned down by the model, so two constructions are provided:
the canonical ``frozen`` field (one spatial path, constant in time) and a
clearly non-canonical fractional-sheet field for experiments.  Smooth
deterministic stubs are first-class drivers for oracle tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import norms
from .grids import GridError, GridFunction, SpaceTimeField

__all__ = [
    "FbmConfig",
    "DrivingField",
    "fbm_path",
    "fbm_covariance",
    "increment_covariance",
    "driving_field",
    "stub_driving_field",
    "field_from_path",
    "covariance_validator",
    "CovarianceReport",
]

_SHEET_MAX_TIME_NODES = 64
STUB_KINDS = ("zero", "linear", "quadratic", "sine")


def _rng(seed: int, stream: tuple = ()) -> np.random.Generator:
    entropy = (int(seed),) + tuple(int(s) for s in stream)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def fbm_covariance(hurst: float, s, t):
    """R_H(s, t) = (|s|^2H + |t|^2H - |t-s|^2H) / 2."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(s) ** two_h + np.abs(t) ** two_h - np.abs(t - s) ** two_h)


def increment_covariance(hurst: float, lags) -> np.ndarray:
    """Autocovariance of unit-spacing fractional Gaussian noise."""
    k = np.abs(np.asarray(lags, dtype=float))
    two_h = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** two_h - 2.0 * k ** two_h + np.abs(k - 1.0) ** two_h)


def _fgn_davies_harte(c: np.ndarray, n: int, rng: np.random.Generator):
    row = np.concatenate([c, c[-2:0:-1]])  # circulant first row, length 2n
    eig = np.fft.fft(row).real
    if eig.min() < -1e-8 * max(eig.max(), 1.0):
        return None
    eig = np.clip(eig, 0.0, None)
    z = np.empty(2 * n, dtype=complex)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    uv = rng.standard_normal((n - 1, 2))
    z[1:n] = (uv[:, 0] + 1j * uv[:, 1]) / math.sqrt(2.0)
    z[n + 1:] = np.conj(z[1:n][::-1])
    return math.sqrt(2 * n) * np.fft.ifft(np.sqrt(eig) * z).real[:n]


def _fgn_cholesky(c: np.ndarray, n: int, rng: np.random.Generator):
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    cov = c[idx]
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - signals a bug
        raise RuntimeError(
            "fGn covariance is numerically non-PSD; this indicates a bug") from exc
    return L @ rng.standard_normal(n)


def fractional_gaussian_noise(hurst: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n unit-spacing fGn variates (circulant embedding, Cholesky fallback)."""
    if not 0.0 < hurst < 1.0:
        raise GridError(f"Hurst parameter must lie in (0, 1), got {hurst}")
    if hurst == 0.5:
        return rng.standard_normal(n)
    c = increment_covariance(hurst, np.arange(n + 1))
    out = _fgn_davies_harte(c, n, rng)
    if out is None:
        out = _fgn_cholesky(c[:n], n, rng)
    return out


def fbm_path(hurst: float, n: int, seed: int, stream: tuple = ()) -> GridFunction:
    """One FBM path on [0, 1] sampled at n+1 nodes, B(0) = 0.

    Increments are stationary centered Gaussians with
    Var(B(x+d) - B(x)) = d^(2H); the seed (plus optional split stream)
    fully determines the output.
    """
    if n < 2:
        raise GridError(f"need n >= 2 nodes per cell count, got {n}")
    fgn = fractional_gaussian_noise(hurst, n, _rng(seed, stream))
    values = np.concatenate([[0.0], np.cumsum(fgn)]) * (1.0 / n) ** hurst
    return GridFunction(0.0, 1.0, values)


@dataclass(frozen=True)
class FbmConfig:
    """Driver generation parameters.

    ``time_model`` is "frozen" (one spatial path, constant in time) or
    "sheet" (fractional sheet with temporal Hurst ``hurst_t`` >= 0.9,
    dense temporal Cholesky, m <= 64).
    """

    hurst: float
    n: int
    m: int
    T: float
    seed: int
    time_model: str = "frozen"
    hurst_t: float = 0.95
    stream: tuple = ()

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise GridError(f"Hurst parameter must lie in (0, 1), got {self.hurst}")
        if self.time_model not in ("frozen", "sheet"):
            raise GridError(f"unknown time model {self.time_model!r}")
        if self.time_model == "sheet":
            if self.m > _SHEET_MAX_TIME_NODES:
                raise GridError(
                    f"sheet model limited to m <= {_SHEET_MAX_TIME_NODES} "
                    f"time cells (dense temporal Cholesky), got m={self.m}")
            if self.hurst_t < 0.9:
                raise GridError(f"sheet temporal Hurst must be >= 0.9, got {self.hurst_t}")


@dataclass
class DrivingField:
    """A driver g with its realized integrator functional and Hoelder norm.

    Satisfies g(t, 0) = 0 for all t.  ``pair_matrix(j)`` returns the
    right-derivative pair field of time slice j, cached so that Picard
    iterations never re-quadrature; time-constant drivers share one matrix.
    """

    field: SpaceTimeField
    alpha: float
    lambda_value: float
    holder_norm: float
    time_constant: bool
    label: str
    _pair_cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    @property
    def lambda_alpha(self) -> float:
        return self.lambda_value

    def pair_matrix(self, t_index: int = 0) -> np.ndarray:
        key = 0 if self.time_constant else int(t_index)
        M = self._pair_cache.get(key)
        if M is None:
            M = norms.right_derivative_pair_matrix(
                self.field.values[key], self.field.h, self.alpha)
            M.setflags(write=False)
            self._pair_cache[key] = M
        return M

    def slice_path(self, j: int = 0) -> GridFunction:
        return self.field.slice_grid(j)

    def retimed(self, m: int, T: float) -> "DrivingField":
        """Same spatial driver on a new time grid (time-constant only)."""
        if not self.time_constant:
            raise GridError("retimed() requires a time-constant driver")
        f = SpaceTimeField.constant_in_time(self.field.values[0], m, T)
        out = DrivingField(f, self.alpha, self.lambda_value, self.holder_norm,
                           True, self.label)
        out._pair_cache = self._pair_cache
        return out


def _finish_field(values2d: np.ndarray, T: float, alpha: float,
                  time_constant: bool, label: str) -> DrivingField:
    if not np.all(values2d[:, 0] == 0.0):
        raise GridError("driving field must satisfy g(t, 0) = 0")
    f = SpaceTimeField(T, values2d)
    rows = [values2d[0]] if time_constant else [values2d[j] for j in range(f.m + 1)]
    lam = 0.0
    hnorm = 0.0
    cache = {}
    for j, row in enumerate(rows):
        D = norms.right_derivative_pair_matrix(row, f.h, alpha)
        D.setflags(write=False)
        cache[j] = D
        lam = max(lam, float(np.abs(D).max()) / math.gamma(1.0 - alpha))
        hnorm = max(hnorm, norms.norm_1malpha_infty0(
            SpaceTimeField.constant_in_time(row, 1, T), alpha))
    if not (np.isfinite(lam) and np.isfinite(hnorm)):
        raise GridError("realized driver functionals are non-finite")
    out = DrivingField(f, float(alpha), lam, hnorm, time_constant, label)
    out._pair_cache = cache
    return out


def driving_field(cfg: FbmConfig, alpha) -> DrivingField:
    """Assemble the FBM driver for the solver and record Lambda and the norm."""
    from .grids import order_value
    a = order_value(alpha)
    if cfg.time_model == "frozen":
        path = fbm_path(cfg.hurst, cfg.n, cfg.seed, cfg.stream)
        vals = np.tile(path.values, (cfg.m + 1, 1))
        return _finish_field(vals, cfg.T, a, True, f"fbm-frozen(H={cfg.hurst})")
    # sheet: time-correlated mixture of iid spatial paths
    t = np.linspace(0.0, cfg.T, cfg.m + 1)[1:]
    cov_t = fbm_covariance(cfg.hurst_t, t[:, None], t[None, :])
    L = np.linalg.cholesky(cov_t + 1e-14 * np.eye(cfg.m))
    paths = np.stack([
        fbm_path(cfg.hurst, cfg.n, cfg.seed, cfg.stream + (k,)).values
        for k in range(cfg.m)])
    vals = np.zeros((cfg.m + 1, cfg.n + 1))
    vals[1:] = L @ paths
    return _finish_field(vals, cfg.T, a, False,
                         f"fbm-sheet(H={cfg.hurst},Ht={cfg.hurst_t})")


def field_from_path(path: GridFunction, m: int, T: float, alpha) -> DrivingField:
    """Frozen driver built from an explicit spatial path with g(0) = 0."""
    from .grids import order_value
    vals = np.tile(path.values, (m + 1, 1))
    return _finish_field(vals, T, order_value(alpha), True, "from-path")


def stub_driving_field(kind: str, n: int, m: int, T: float, alpha,
                       **params) -> DrivingField:
    """Deterministic drivers for oracle testing.

    kinds: zero, linear (scale*xi), quadratic (scale*xi^2),
    sine (amplitude*sin(k*pi*xi)).
    """
    from .grids import order_value
    a = order_value(alpha)
    xi = np.linspace(0.0, 1.0, n + 1)
    if kind == "zero":
        row = np.zeros(n + 1)
    elif kind == "linear":
        row = params.get("scale", 1.0) * xi
    elif kind == "quadratic":
        row = params.get("scale", 0.5) * xi ** 2
    elif kind == "sine":
        k = params.get("k", 1)
        row = params.get("amplitude", 1.0) * np.sin(k * math.pi * xi)
    else:
        raise GridError(f"unknown stub kind {kind!r}; choose from {STUB_KINDS}")
    return _finish_field(np.tile(row, (m + 1, 1)), T, a, True, f"stub-{kind}")


@dataclass
class CovarianceReport:
    hurst: float
    n: int
    samples: int
    entries: list
    max_abs_z: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "hurst": self.hurst,
            "n": self.n,
            "samples": self.samples,
            "max_abs_z": self.max_abs_z,
            "passed": self.passed,
            "entries": self.entries,
        }


def covariance_validator(hurst: float, samples: int, seed: int,
                         n: int = 64, z_limit: float = 4.0) -> CovarianceReport:
    """Monte-Carlo check of the FBM law against its analytic covariance.

    Generates ``samples`` independent paths (split streams of ``seed``) and
    z-scores the empirical covariances, increment variances and disjoint
    increment products on a coarse node subset.  Any |z| > ``z_limit`` is
    flagged.
    """
    if samples < 10 ** 3:
        raise GridError(f"validator needs at least 1000 samples, got {samples}")
    sel = sorted({max(1, n // 8), n // 4, n // 2, 3 * n // 4, n})
    paths = np.empty((samples, n + 1))
    for s in range(samples):
        paths[s] = fbm_path(hurst, n, seed, (s,)).values
    xi = np.linspace(0.0, 1.0, n + 1)
    entries = []

    def z_entry(kind, i, j, expected, data):
        mean = float(data.mean())
        se = float(data.std(ddof=1)) / math.sqrt(samples)
        z = (mean - expected) / se if se > 0 else 0.0
        entries.append({"kind": kind, "i": float(i), "j": float(j),
                        "expected": float(expected), "observed": mean,
                        "z": float(z)})

    for ia in sel:
        for ib in sel:
            if ib < ia:
                continue
            z_entry("covariance", xi[ia], xi[ib],
                    fbm_covariance(hurst, xi[ia], xi[ib]),
                    paths[:, ia] * paths[:, ib])
    lags = sorted({1, max(1, n // 8), max(1, n // 4)})
    offsets = [0, n // 2]
    for lag in lags:
        for off in offsets:
            if off + lag > n:
                continue
            d = paths[:, off + lag] - paths[:, off]
            sigma2 = (lag / n) ** (2.0 * hurst)
            var = float(d.var(ddof=1))
            se = sigma2 * math.sqrt(2.0 / (samples - 1))
            entries.append({"kind": "increment_var", "i": xi[off], "j": lag / n,
                            "expected": sigma2, "observed": var,
                            "z": (var - sigma2) / se})
    # disjoint increments: independent exactly when H = 1/2
    qa, qb = n // 4, n // 2
    qc, qd = 3 * n // 4, n
    d1 = paths[:, qb] - paths[:, qa]
    d2 = paths[:, qd] - paths[:, qc]
    expected = (fbm_covariance(hurst, xi[qb], xi[qd]) - fbm_covariance(hurst, xi[qb], xi[qc])
                - fbm_covariance(hurst, xi[qa], xi[qd]) + fbm_covariance(hurst, xi[qa], xi[qc]))
    z_entry("disjoint_increments", xi[qa], xi[qc], expected, d1 * d2)

    max_abs_z = max(abs(e["z"]) for e in entries)
    return CovarianceReport(hurst, n, samples, entries, max_abs_z,
                            max_abs_z <= z_limit)
