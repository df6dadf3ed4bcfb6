"""Discretized Hoelder-Sobolev norms and the integrator functional Lambda.

Suprema over the continuum are replaced by maxima over grid nodes and node
pairs; the singular inner integrals reuse the product-integration weights
from ``frac_calc``, so constants and linear data are reproduced exactly.
Near-diagonal behaviour is handled by the piecewise-linear model, whose
sub-cell Hoelder quotient is maximized at the adjacent-node pair.
"""

from __future__ import annotations

import math

import numpy as np

from .frac_calc import _hat_moments, left_power_integral, marchaud_difference_abs
from .grids import GridError, GridFunction, SpaceTimeField, order_value

__all__ = [
    "norm_alpha_infty",
    "norm_1malpha_infty0",
    "norm_alpha_1",
    "lambda_alpha",
    "slice_norm_alpha_infty",
    "holder_tail",
    "right_derivative_pair_matrix",
]


def holder_tail(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """int_0^xi |f(xi) - f(eta)| / (xi - eta)^(alpha+1) deta at every node xi."""
    return marchaud_difference_abs(values, h, alpha)


def slice_norm_alpha_infty(values: np.ndarray, h: float, alpha) -> float:
    a = order_value(alpha)
    v = np.asarray(values, dtype=float)
    return float(np.max(np.abs(v) + holder_tail(v, h, a)))


def norm_alpha_infty(f: SpaceTimeField, alpha) -> float:
    """sup over t and xi of |f| plus the singular Hoelder tail in xi."""
    a = order_value(alpha)
    return max(slice_norm_alpha_infty(f.values[j], f.h, a) for j in range(f.m + 1))


def norm_alpha_1(f: GridFunction, alpha) -> float:
    """int_0^1 |f|/eta^alpha + the double singular difference integral.

    Defined on the unit interval; both terms use product integration, the
    outer integral of the second term is trapezoidal.
    """
    a = order_value(alpha)
    if abs(f.a) > 1e-12 or abs(f.b - 1.0) > 1e-12:
        raise GridError("norm_alpha_1 is defined for grids on [0, 1]")
    v = np.abs(f.values)
    first = left_power_integral(v, f.h, a)
    tail = holder_tail(f.values, f.h, a)
    second = f.h * (tail.sum() - 0.5 * (tail[0] + tail[-1]))
    return float(first + second)


def right_derivative_pair_matrix(values: np.ndarray, h: float, alpha) -> np.ndarray:
    """D[i, j] = right Weyl derivative of order 1-alpha of g - g(xi_i) on
    [0, xi_i], evaluated at eta_j, for every pair j < i (zero elsewhere).

    Column j is filled in one vectorized sweep that reuses prefix sums of
    the product-integration weights, so the full matrix costs O(n^2).
    """
    a = order_value(alpha)
    v = np.asarray(values, dtype=float)
    n = v.size - 1
    A, B = _hat_moments(a - 1.0, n)
    C = A + B
    inv_gamma = 1.0 / math.gamma(a)
    scale = (1.0 - a) * h ** (a - 1.0)
    dist = (np.arange(1, n + 1) * h) ** (1.0 - a)
    D = np.zeros((n + 1, n + 1))
    for j in range(n):
        u = v[j] - v[j + 1:]
        L = u.size
        S = B[1:L + 1] * u
        if L > 1:
            S[1:] += np.cumsum(C[1:L] * u[:-1])
        D[j + 1:, j] = inv_gamma * (u / dist[:L] + scale * S)
    return D


def lambda_alpha(g, alpha) -> float:
    """sup over times and pairs eta < xi of |D^{1-alpha}_{xi-} g_{xi-}(eta)|,
    divided by Gamma(1-alpha)."""
    a = order_value(alpha)
    pre = 1.0 / math.gamma(1.0 - a)
    if isinstance(g, SpaceTimeField):
        slices = [g.values[j] for j in range(g.m + 1)]
        h = g.h
    elif isinstance(g, GridFunction):
        slices, h = [g.values], g.h
    else:
        arr = np.asarray(g, dtype=float)
        slices, h = [arr], 1.0 / (arr.size - 1)
    best = 0.0
    for row in slices:
        D = right_derivative_pair_matrix(row, h, a)
        best = max(best, float(np.abs(D).max()))
    return pre * best


def norm_1malpha_infty0(g: SpaceTimeField, alpha) -> float:
    """sup over t and node pairs eta < xi of the (1-alpha)-Hoelder quotient
    plus the left-anchored singular tail integral."""
    a = order_value(alpha)
    if not isinstance(g, SpaceTimeField):
        g = SpaceTimeField.constant_in_time(np.asarray(g, dtype=float), 1, 1.0)
    n, h = g.n, g.h
    A, B = _hat_moments(a - 1.0, n)
    C = A + B
    scale = h ** (a - 1.0)
    dist = (np.arange(1, n + 1) * h) ** (1.0 - a)
    best = 0.0
    for j_t in range(g.m + 1):
        v = g.values[j_t]
        for j in range(n):
            u = np.abs(v[j] - v[j + 1:])
            L = u.size
            S = B[1:L + 1] * u
            if L > 1:
                S[1:] += np.cumsum(C[1:L] * u[:-1])
            best = max(best, float((u / dist[:L] + scale * S).max()))
    return best
