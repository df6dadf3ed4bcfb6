"""Riemann-Liouville fractional integrals and Marchaud-form Weyl derivatives.

All operators are discretized by product integration on uniform grids: the
singular kernel is integrated exactly against the piecewise-linear
interpolant of the data, so every operator is a linear map of the nodal
values with nonnegative weights.  Weight tables depend only on the exact
pair (n, order) and are memoized; the caches are plain ``lru_cache`` and
therefore safe for concurrent readers.

Sign conventions are real throughout: the complex phases carried by the
right-sided operators are dropped, and the Stieltjes pairing fixes the one
remaining global sign (see ``fracpath.stieltjes``).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .grids import GridError, GridFunction, order_value

__all__ = [
    "rl_integral_left",
    "rl_integral_right",
    "weyl_derivative_left",
    "weyl_derivative_right",
    "beta_b1",
    "marchaud_difference",
    "marchaud_difference_abs",
    "left_power_integral",
]

_MIN_BETA_ORDER = 1e-6


@lru_cache(maxsize=128)
def _hat_moments(mu: float, kmax: int):
    """Moments of u^(mu-1) against the two halves of the unit hat function.

    A[k] = int_k^{k+1} u^(mu-1) ((k+1) - u) du   (right half of the hat at k)
    B[k] = int_{k-1}^k u^(mu-1) (u - (k-1)) du   (left half of the hat at k)

    Valid for mu in (-1, 1) \\ {0}.  For mu < 0 the moment A[0] diverges;
    it is zeroed because every caller pairs it with a vanishing difference.
    """
    k = np.arange(kmax + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        pm = k ** mu
        pm1 = k ** (mu + 1.0)
        qm = (k + 1.0) ** mu
        qm1 = (k + 1.0) ** (mu + 1.0)
        A = (k + 1.0) * (qm - pm) / mu - (qm1 - pm1) / (mu + 1.0)
        B = np.zeros_like(A)
        B[1:] = (pm1[1:] - pm1[:-1]) / (mu + 1.0) \
            - k[:-1] * (pm[1:] - pm[:-1]) / mu
    if mu < 0.0:
        A[0] = 0.0
    if kmax >= 1:
        B[1] = 1.0 / (mu + 1.0)  # closed form; avoids 0*inf for mu < 0
    A.setflags(write=False)
    B.setflags(write=False)
    return A, B


@lru_cache(maxsize=64)
def _integral_weights(n: int, alpha: float):
    """Convolution kernel C and boundary correction A for the left integral."""
    A, B = _hat_moments(alpha, n)
    C = A + B
    C[0] = A[0]
    C.setflags(write=False)
    return C, A


@lru_cache(maxsize=64)
def _difference_weights(n: int, alpha: float):
    """Kernel/corrections for sum_j w_ij (f_i - f_j) with w from u^(-alpha-1)."""
    A, B = _hat_moments(-alpha, n)
    C = A + B
    C[0] = 0.0  # diagonal weight pairs with a zero difference
    rowsum = B.copy()
    if n >= 2:
        rowsum[2:] += np.cumsum(C[1:])[: n - 1]
    C.setflags(write=False)
    rowsum.setflags(write=False)
    return C, A, rowsum


@lru_cache(maxsize=6)
def _difference_weight_matrix(n: int, alpha: float):
    """Dense weights W[i, j] of the difference integral at node i (row 0 empty)."""
    C, _, _ = _difference_weights(n, alpha)
    _, B = _hat_moments(-alpha, n)
    idx = np.subtract.outer(np.arange(n + 1), np.arange(n + 1))
    W = C[idx.clip(min=0)]
    W[:, 0] = B
    W[0, :] = 0.0
    W.setflags(write=False)
    return W


def marchaud_difference(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """int_a^{x_i} (f(x_i) - f(y)) / (x_i - y)^(alpha+1) dy at every node."""
    v = np.asarray(values, dtype=float)
    n = v.size - 1
    C, A, rowsum = _difference_weights(n, alpha)
    conv = np.convolve(C, v)[: n + 1]
    out = (v * rowsum - (conv - A * v[0])) * h ** (-alpha)
    out[0] = 0.0
    return out

def marchaud_difference_abs(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """Same integral with |f(x_i) - f(y)|; this is the Hoelder-tail of a slice."""
    v = np.asarray(values, dtype=float)
    n = v.size - 1
    W = _difference_weight_matrix(n, alpha)
    diffs = np.abs(v[:, None] - v[None, :])
    return (W * diffs).sum(axis=1) * h ** (-alpha)


def left_power_integral(values: np.ndarray, h: float, alpha: float) -> float:
    """int over the whole grid of f(y) (y - a)^(-alpha) dy, product-integrated."""
    v = np.asarray(values, dtype=float)
    n = v.size - 1
    A, B = _hat_moments(1.0 - alpha, n)
    w = A + B
    w[0] = A[0]
    w[n] = B[n]
    return float(np.dot(w, v)) * h ** (1.0 - alpha)


def rl_integral_left(f: GridFunction, alpha) -> GridFunction:
    """Left-sided fractional integral of order alpha.

    Node i receives (1/Gamma(alpha)) int_a^{x_i} f(y) (x_i - y)^(alpha-1) dy,
    with the integrable singularity handled by piecewise-linear product
    integration; the result is exact whenever f is piecewise linear.
    """
    a = order_value(alpha)
    v = _finite_values(f)
    n = f.n
    C, A = _integral_weights(n, a)
    conv = np.convolve(C, v)[: n + 1]
    out = (f.h ** a / math.gamma(a)) * (conv - A * v[0])
    out[0] = 0.0
    return f.with_values(out)


def rl_integral_right(f: GridFunction, alpha) -> GridFunction:
    """Right-sided fractional integral (real convention, phase dropped)."""
    return rl_integral_left(f.reflected(), alpha).reflected()


def weyl_derivative_left(f: GridFunction, alpha, subtract_base: bool = False) -> GridFunction:
    """Marchaud-form left Weyl derivative of order alpha.

    D f(x) = (1/Gamma(1-alpha)) [ f(x)/(x-a)^alpha
             + alpha int_a^x (f(x)-f(y))/(x-y)^(alpha+1) dy ].

    With ``subtract_base`` the operator acts on f - f(a) (the f_{a+}
    variant) and the output at x = a is 0.  Without it the node at x = a
    is singular unless f(a) = 0 and is returned as NaN with the
    ``endpoint_nan_ok`` flag set.
    """
    a = order_value(alpha)
    v = _finite_values(f)
    n = f.n
    diff = marchaud_difference(v, f.h, a)
    x = f.nodes - f.a
    base = v[0] if subtract_base else 0.0
    out = np.empty(n + 1)
    out[1:] = ((v[1:] - base) / x[1:] ** a + a * diff[1:]) / math.gamma(1.0 - a)
    flagged = not (subtract_base or v[0] == 0.0)
    out[0] = np.nan if flagged else 0.0
    return GridFunction(f.a, f.b, out, endpoint_nan_ok=flagged)


def weyl_derivative_right(f: GridFunction, alpha, subtract_base: bool = False) -> GridFunction:
    """Marchaud-form right Weyl derivative (real convention, phase dropped).

    Mirror of :func:`weyl_derivative_left`; with ``subtract_base`` the
    operator acts on f - f(b) and the output at x = b is 0.
    """
    d = weyl_derivative_left(f.reflected(), alpha, subtract_base=subtract_base)
    return d.reflected()


def beta_b1(alpha) -> float:
    """The Beta-function constant B(2*alpha, 1 - alpha) for alpha in (0, 1/2).

    Evaluates int_0^inf (1+x)^(-alpha-1) x^(-alpha) dx through the Gamma
    identity Gamma(2a) Gamma(1-a) / Gamma(1+a).  Rejects alpha >= 1/2
    (the downstream factor 1/(1-2*alpha) diverges) and alpha below 1e-6
    (Gamma(2*alpha) pole).
    """
    a = alpha.alpha if hasattr(alpha, "alpha") else float(alpha)
    if a >= 0.5:
        raise GridError(f"beta_b1 needs alpha < 1/2, got {a}")
    if a < _MIN_BETA_ORDER:
        raise GridError(f"beta_b1 diverges as alpha -> 0; got {a} < {_MIN_BETA_ORDER}")
    return math.gamma(2.0 * a) * math.gamma(1.0 - a) / math.gamma(1.0 + a)


def _finite_values(f: GridFunction) -> np.ndarray:
    if not np.isfinite(f.values).all():
        raise GridError("operator input carries non-finite nodes")
    return f.values
