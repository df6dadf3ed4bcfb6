"""Windowed Picard solver for Y(t,xi) = phi(xi) + int_0^t int_0^xi A(Y) dg ds.

The fixed-point operator F evaluates the inner pathwise integral with the
Stieltjes engine (per-upper-limit derivative fields precomputed once per
driver slice) and the outer time integral with the trapezoid rule.  Local
existence windows are sized from the explicitly computed proof constants
(b1..b5, T1, T2, T0); continuation re-anchors the initial slice and
refreshes the constants window by window.  Every inequality the analysis
asserts is re-checked numerically and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import norms
from .coefficients import CoefficientFunction
from .fbm import DrivingField
from .frac_calc import beta_b1
from .grids import FractionalOrder, GridError, GridFunction, SpaceTimeField
from .sampling import random_smooth_field
from .stieltjes import stieltjes_all_upper_limits

__all__ = [
    "SolverConfig",
    "ProofConstants",
    "WindowRecord",
    "SolverReport",
    "NonConvergenceError",
    "compute_constants",
    "apply_F",
    "solve",
    "contraction_probe",
    "ball_invariance_check",
    "gronwall_check",
    "quadruple_inequality_check",
]

_REL_SLACK = 1e-6
WINDOW_POLICIES = ("paper-constants", "adaptive")


class NonConvergenceError(RuntimeError):
    """Raised by callers that refuse an unconverged report."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    hurst: float
    m: int
    n: int
    T: float
    phi: GridFunction
    coeff: CoefficientFunction
    picard_tol: float = 1e-9
    max_iterations: int = 60
    window_policy: str = "paper-constants"
    contraction_target: float = 0.5

    def __post_init__(self):
        FractionalOrder.for_solver(self.alpha, self.hurst)
        if self.window_policy not in WINDOW_POLICIES:
            raise GridError(f"unknown window policy {self.window_policy!r}")
        if self.phi.n != self.n or abs(self.phi.a) > 1e-12 or abs(self.phi.b - 1.0) > 1e-12:
            raise GridError("phi must live on the solver's spatial grid over [0, 1]")
        if self.m < 1 or self.T <= 0:
            raise GridError("need m >= 1 time cells and T > 0")
        if not 0.0 < self.contraction_target < 1.0:
            raise GridError("contraction target must lie in (0, 1)")

    @property
    def dt(self) -> float:
        return self.T / self.m

    def phi_norm(self) -> float:
        return norms.slice_norm_alpha_infty(self.phi.values, self.phi.h, self.alpha)


@dataclass(frozen=True)
class ProofConstants:
    """All constants the existence proof manufactures, computed numerically.

    b5 carries the full contraction prefactor including the realized
    sup Lambda_alpha(g) and the conservative b3 = max(1, b1); the variant
    built from b1 alone is recorded as ``b5_b1_form``.  K is the Gronwall
    exponent (identical to b2 by construction).
    """

    alpha: float
    lam: float
    m1: float
    m2: float
    mn_r1: float
    phi_norm: float
    r1: float
    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    b5_b1_form: float
    t1: float
    t2: float
    t0: float
    gronwall_k: float
    contraction_target: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "alpha", "lam", "m1", "m2", "mn_r1", "phi_norm", "r1",
            "b1", "b2", "b3", "b4", "b5", "b5_b1_form",
            "t1", "t2", "t0", "gronwall_k", "contraction_target")}


def compute_constants(alpha: float, coeff: CoefficientFunction, lam: float,
                      phi_norm: float, r1: float | None = None,
                      horizon: float = math.inf,
                      contraction_target: float = 0.5) -> ProofConstants:
    """Evaluate b1..b5, the window lengths T1, T2, T0 and the Gronwall rate.

    T1 makes the ball of radius R1 invariant; T2 scales the contraction
    factor to ``contraction_target`` < 1.  Degenerate coefficients
    (A identically 0) make both windows unbounded, in which case the
    configured horizon is returned.
    """
    a = float(alpha)
    if not 0.0 < a < 0.5:
        raise GridError(f"constants need alpha in (0, 1/2), got {a}")
    if r1 is None:
        r1 = 2.0 * max(1.0, phi_norm)
    if r1 <= phi_norm:
        raise GridError(f"R1 = {r1} must exceed ||phi|| = {phi_norm}")
    m1, m2 = coeff.lipschitz, coeff.bound
    b1 = beta_b1(a)
    b3 = max(1.0, b1)
    bracket = m2 * (1.0 / (1.0 - a) + b1 / (1.0 - 2.0 * a)) \
        + m1 * (1.0 + 1.0 / (a * (1.0 - a)))
    b2 = bracket * lam
    mn = float(coeff.deriv_lipschitz(r1))
    b4 = (m1 + mn) * (1.0 + 2.0 * r1)
    rho = (2.0 - 3.0 * a) / ((1.0 - 2.0 * a) * (1.0 - a))
    b5 = lam * b3 * b4 * rho
    b5_b1 = lam * b1 * b4 * rho
    t1 = (r1 - phi_norm) / (b2 * (1.0 + r1)) if b2 > 0 else horizon
    t2 = contraction_target / b5 if b5 > 0 else horizon
    t0 = min(t1, t2)
    if not math.isfinite(t0):
        t0 = horizon
    return ProofConstants(a, lam, m1, m2, mn, phi_norm, float(r1),
                          b1, b2, b3, b4, b5, b5_b1, t1, t2, t0, b2,
                          contraction_target)


def _inner_integrals(y_slice: np.ndarray, coeff: CoefficientFunction,
                     g_slice: np.ndarray, pair_matrix: np.ndarray,
                     h: float, alpha: float) -> np.ndarray:
    u = coeff(y_slice)
    if not np.isfinite(u).all():
        bad = int(np.argwhere(~np.isfinite(u))[0][0])
        raise GridError(f"coefficient produced a non-finite value at node {bad}")
    return stieltjes_all_upper_limits(u, g_slice, pair_matrix, h, alpha)


def _apply_window(y_window: np.ndarray, phi_values: np.ndarray,
                  coeff: CoefficientFunction, driver: DrivingField,
                  alpha: float, j_start: int, dt: float) -> np.ndarray:
    """F restricted to a window: row l maps time node j_start + l."""
    w = y_window.shape[0] - 1
    h = driver.field.h
    V = np.empty_like(y_window)
    for l in range(w + 1):
        V[l] = _inner_integrals(y_window[l], coeff,
                                driver.field.values[j_start + l],
                                driver.pair_matrix(j_start + l), h, alpha)
    out = np.empty_like(y_window)
    out[0] = phi_values
    if w >= 1:
        steps = 0.5 * dt * (V[1:] + V[:-1])
        out[1:] = phi_values[None, :] + np.cumsum(steps, axis=0)
    if not np.isfinite(out).all():
        t_i, x_i = np.argwhere(~np.isfinite(out))[0]
        raise GridError(f"non-finite iterate at time node {j_start + int(t_i)}, "
                        f"space node {int(x_i)}")
    return out


def apply_F(Y: SpaceTimeField, phi, coeff: CoefficientFunction,
            driver: DrivingField, alpha) -> SpaceTimeField:
    """One application of the fixed-point operator over the full field."""
    a = FractionalOrder(alpha).alpha if not isinstance(alpha, FractionalOrder) else alpha.alpha
    phi_values = phi.values if isinstance(phi, GridFunction) else np.asarray(phi, dtype=float)
    if Y.values.shape != driver.field.values.shape or abs(Y.T - driver.field.T) > 1e-12:
        raise GridError("field and driver grids must match")
    if phi_values.size != Y.n + 1:
        raise GridError("phi must live on the field's spatial grid")
    out = _apply_window(Y.values, phi_values, coeff, driver, a, 0, Y.dt)
    return SpaceTimeField(Y.T, out)


def _window_norm(diff: np.ndarray, h: float, alpha: float) -> float:
    return max(norms.slice_norm_alpha_infty(row, h, alpha) for row in diff)


@dataclass
class WindowRecord:
    index: int
    t_start: float
    t_end: float
    cells: int
    iterations: int
    converged: bool
    final_residual: float
    residual_history: list
    contraction_ratio: float
    guarantee_ok: bool
    constants: ProofConstants

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "index", "t_start", "t_end", "cells", "iterations", "converged",
            "final_residual", "residual_history", "contraction_ratio",
            "guarantee_ok")}
        d["constants"] = self.constants.to_dict()
        return d


@dataclass
class SolverReport:
    solution: SpaceTimeField
    converged: bool
    windows: list
    constants: ProofConstants
    lambda_alpha: float
    verdicts: dict
    failed_window: int | None = None

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "failed_window": self.failed_window,
            "lambda_alpha": self.lambda_alpha,
            "constants": self.constants.to_dict(),
            "windows": [w.to_dict() for w in self.windows],
            "verdicts": self.verdicts,
        }


def _measured_ratio(history: list) -> float:
    ratios = []
    for r_prev, r_next in zip(history[1:], history[2:]):
        if r_prev > 1e-14:
            ratios.append(r_next / r_prev)
    return max(ratios) if ratios else 0.0


def solve(cfg: SolverConfig, driver: DrivingField, verify: bool = True,
          verification_trials: int = 5, verification_seed: int = 0) -> SolverReport:
    """Windowed Picard iteration over [0, T] with per-window constants.

    Never returns an unconverged field silently: on failure the report has
    ``converged = False``, the failing window index, and its residual
    history.
    """
    a = cfg.alpha
    if driver.field.m != cfg.m or driver.field.n != cfg.n \
            or abs(driver.field.T - cfg.T) > 1e-12:
        raise GridError("driver grids must match the solver configuration")
    if abs(driver.alpha - a) > 1e-12:
        raise GridError("driver was prepared for a different alpha")
    m, n, dt, h = cfg.m, cfg.n, cfg.dt, cfg.phi.h
    lam = driver.lambda_value
    phi0 = cfg.phi.values
    Y = np.tile(phi0, (m + 1, 1))
    global_constants = compute_constants(a, cfg.coeff, lam, cfg.phi_norm(),
                                         horizon=cfg.T,
                                         contraction_target=cfg.contraction_target)
    windows: list[WindowRecord] = []
    converged = True
    failed_window = None
    j0 = 0
    phi_w = phi0
    adaptive_cells = None
    while j0 < m:
        pn = norms.slice_norm_alpha_infty(phi_w, h, a)
        cons = compute_constants(a, cfg.coeff, lam, pn, horizon=cfg.T,
                                 contraction_target=cfg.contraction_target)
        paper_cells = max(1, int(cons.t0 / dt + 1e-12))
        if cfg.window_policy == "adaptive" and adaptive_cells is not None:
            cells = adaptive_cells
        else:
            cells = paper_cells
        cells = min(cells, m - j0)
        j1 = j0 + cells
        guarantee_ok = cells * dt <= cons.t0 * (1.0 + 1e-9)

        Yw = np.tile(phi_w, (cells + 1, 1))
        history = []
        w_converged = False
        iterations = 0
        for it in range(1, cfg.max_iterations + 1):
            iterations = it
            Fw = _apply_window(Yw, phi_w, cfg.coeff, driver, a, j0, dt)
            res = _window_norm(Fw - Yw, h, a)
            history.append(res)
            Yw = Fw
            if res <= cfg.picard_tol:
                w_converged = True
                break
        windows.append(WindowRecord(
            index=len(windows), t_start=j0 * dt, t_end=j1 * dt, cells=cells,
            iterations=iterations, converged=w_converged,
            final_residual=history[-1], residual_history=history,
            contraction_ratio=_measured_ratio(history),
            guarantee_ok=guarantee_ok, constants=cons))
        Y[j0 + 1:j1 + 1] = Yw[1:]
        if not w_converged:
            converged = False
            failed_window = len(windows) - 1
            break
        if cfg.window_policy == "adaptive":
            ratio = windows[-1].contraction_ratio
            base = cells
            if ratio < 0.25 and iterations <= 4:
                adaptive_cells = base * 2
            elif ratio > 0.75 or iterations >= cfg.max_iterations:
                adaptive_cells = max(1, base // 2)
            else:
                adaptive_cells = base
        phi_w = Y[j1]
        j0 = j1

    solution = SpaceTimeField(cfg.T, Y)
    verdicts = {
        "fixed_point_residual": {
            "max_final_residual": max(w.final_residual for w in windows),
            "tolerance": cfg.picard_tol,
            "passed": converged,
        },
    }
    gr = gronwall_check(solution, cfg, driver)
    verdicts["gronwall"] = gr
    if verify and converged:
        verdicts.update(_spot_verdicts(cfg, driver, verification_trials,
                                       verification_seed))
    return SolverReport(solution, converged, windows, global_constants,
                        lam, verdicts, failed_window)


def gronwall_check(solution, cfg: SolverConfig, driver: DrivingField) -> dict:
    """Envelope ||phi|| exp(K t) against the running slice norm at every node."""
    sol = solution.solution if isinstance(solution, SolverReport) else solution
    a = cfg.alpha
    cons = compute_constants(a, cfg.coeff, driver.lambda_value, cfg.phi_norm(),
                             horizon=cfg.T, contraction_target=cfg.contraction_target)
    phi_norm = cons.phi_norm
    k = cons.gronwall_k
    t = sol.t_nodes
    env = phi_norm * np.exp(k * t)
    running = np.array([norms.slice_norm_alpha_infty(sol.values[j], sol.h, a)
                        for j in range(sol.m + 1)])
    ok = running <= env * (1.0 + _REL_SLACK)
    violations = [
        {"t": float(t[j]), "running_norm": float(running[j]), "envelope": float(env[j])}
        for j in np.nonzero(~ok)[0]]
    margins = env - running
    return {
        "passed": bool(ok.all()),
        "k": k,
        "phi_norm": phi_norm,
        "min_margin": float(margins.min()),
        "violations": violations,
    }


def contraction_probe(Y1: SpaceTimeField, Y2: SpaceTimeField, cfg: SolverConfig,
                      driver: DrivingField, r1: float | None = None) -> dict:
    """Measured Lipschitz ratio of F on a field pair against the b5*T ceiling."""
    a = cfg.alpha
    if Y1.values.shape != Y2.values.shape or abs(Y1.T - Y2.T) > 1e-12:
        raise GridError("probe fields must share one grid")
    if np.array_equal(Y1.values, Y2.values):
        raise GridError("probe fields must differ (zero denominator)")
    cons = compute_constants(a, cfg.coeff, driver.lambda_value, cfg.phi_norm(),
                             r1=r1, horizon=cfg.T,
                             contraction_target=cfg.contraction_target)
    n1 = norms.norm_alpha_infty(Y1, a)
    n2 = norms.norm_alpha_infty(Y2, a)
    if max(n1, n2) > cons.r1 * (1.0 + 1e-9):
        raise GridError(f"probe fields leave the ball of radius R1 = {cons.r1}")
    local = driver if (driver.field.m == Y1.m and abs(driver.field.T - Y1.T) < 1e-12) \
        else driver.retimed(Y1.m, Y1.T)
    F1 = apply_F(Y1, cfg.phi, cfg.coeff, local, a)
    F2 = apply_F(Y2, cfg.phi, cfg.coeff, local, a)
    num = _window_norm(F1.values - F2.values, Y1.h, a)
    den = _window_norm(Y1.values - Y2.values, Y1.h, a)
    ratio = num / den
    ceiling = cons.b5 * Y1.T
    return {"ratio": float(ratio), "ceiling": float(ceiling), "b5": cons.b5,
            "T": Y1.T, "passed": bool(ratio <= ceiling * 1.1 or ceiling == 0.0)}


def ball_invariance_check(cfg: SolverConfig, driver: DrivingField,
                          r1: float | None = None, trials: int = 100,
                          seed: int = 0, m_probe: int = 4) -> dict:
    """Sample fields with norm <= R1 and verify ||F(Y)|| <= R1 on [0, T1]."""
    a = cfg.alpha
    cons = compute_constants(a, cfg.coeff, driver.lambda_value, cfg.phi_norm(),
                             r1=r1, horizon=cfg.T,
                             contraction_target=cfg.contraction_target)
    t_w = cons.t1 if math.isfinite(cons.t1) else cfg.T
    local = driver.retimed(m_probe, t_w)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    results = []
    # trial 0: the flat extension of phi, the iteration's own starting point
    flat = SpaceTimeField.constant_in_time(cfg.phi.values, m_probe, t_w)
    samples = [flat]
    for _ in range(max(0, trials - 1)):
        Yr = random_smooth_field(m_probe, cfg.n, t_w, rng)
        nrm = norms.norm_alpha_infty(Yr, a)
        target = rng.uniform(0.2, 1.0) * cons.r1
        samples.append(SpaceTimeField(t_w, Yr.values * (target / max(nrm, 1e-12))))
    for Yr in samples:
        F = apply_F(Yr, cfg.phi, cfg.coeff, local, a)
        fn = norms.norm_alpha_infty(F, a)
        worst = max(worst, fn - cons.r1)
        results.append(fn)
    passed = all(fn <= cons.r1 * (1.0 + _REL_SLACK) for fn in results)
    return {"passed": bool(passed), "r1": cons.r1, "t1": t_w,
            "worst_excess": float(worst), "trials": len(results)}


def quadruple_inequality_check(coeff: CoefficientFunction, radius: float,
                               trials: int, seed: int) -> dict:
    """The four-point inequality |h(X1)-h(X2)-h(X3)+h(X4)| <= M1 |X1-X2-X3+X4|
    + M_N |X1-X3| (|X1-X2| + |X3-X4|) on random quadruples in [-N, N]."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-radius, radius, size=(int(trials), 4))
    hv = coeff(X)
    lhs = np.abs(hv[:, 0] - hv[:, 1] - hv[:, 2] + hv[:, 3])
    mn = coeff.deriv_lipschitz(radius)
    rhs = coeff.lipschitz * np.abs(X[:, 0] - X[:, 1] - X[:, 2] + X[:, 3]) \
        + mn * np.abs(X[:, 0] - X[:, 2]) * (np.abs(X[:, 0] - X[:, 1])
                                            + np.abs(X[:, 2] - X[:, 3]))
    slack = rhs - lhs
    worst = float(slack.min())
    violations = int((slack < -1e-12 * np.maximum(rhs, 1.0)).sum())
    return {"passed": violations == 0, "worst_slack": worst,
            "violations": violations, "trials": int(trials), "radius": radius}


def _spot_verdicts(cfg: SolverConfig, driver: DrivingField, trials: int,
                   seed: int) -> dict:
    if not driver.time_constant:
        return {}
    out = {}
    out["ball_invariance"] = ball_invariance_check(cfg, driver, trials=trials,
                                                   seed=seed)
    cons = compute_constants(cfg.alpha, cfg.coeff, driver.lambda_value,
                             cfg.phi_norm(), horizon=cfg.T,
                             contraction_target=cfg.contraction_target)
    t2 = cons.t2 if math.isfinite(cons.t2) else cfg.T
    rng = np.random.default_rng(seed + 1)
    probes = []
    for _ in range(trials):
        Y1 = random_smooth_field(4, cfg.n, t2, rng)
        Y2 = random_smooth_field(4, cfg.n, t2, rng)
        s1 = 0.8 * cons.r1 / max(norms.norm_alpha_infty(Y1, cfg.alpha), 1e-12)
        s2 = 0.8 * cons.r1 / max(norms.norm_alpha_infty(Y2, cfg.alpha), 1e-12)
        probe = contraction_probe(SpaceTimeField(t2, Y1.values * s1),
                                  SpaceTimeField(t2, Y2.values * s2),
                                  cfg, driver)
        probes.append(probe)
    out["contraction"] = {
        "passed": all(p["passed"] for p in probes),
        "max_ratio": max(p["ratio"] for p in probes),
        "ceiling": probes[0]["ceiling"] if probes else None,
        "trials": len(probes),
    }
    out["prop2"] = quadruple_inequality_check(cfg.coeff, cons.r1,
                                              max(1000, trials * 100), seed + 2)
    return out
