"""Built-in coefficient functions with certified constants.

Each coefficient ships its global Lipschitz constant (``lipschitz``), its
global bound (``bound``) and a radius-indexed Lipschitz constant of the
derivative (``deriv_lipschitz``).  The shipped values are analytic upper
bounds, so every inequality that consumes them stays valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "CoefficientFunction",
    "zero_coefficient",
    "constant_coefficient",
    "tanh_coefficient",
    "gaussian_bump",
    "smoothed_biot_savart",
    "coefficient_from_kind",
    "COEFFICIENT_KINDS",
    "spot_check_constants",
]

# max of |2 t (1 - t^2)| over t in [0, 1]: attained at t = 1/sqrt(3)
_TANH_D2_MAX = 4.0 / (3.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class CoefficientFunction:
    """Scalar coefficient A with derivative and certified constants.

    lipschitz       global Lipschitz constant of A          (M1)
    bound           global bound of |A|                     (M2)
    deriv_lipschitz N -> Lipschitz constant of A' on [-N,N] (M_N)
    """

    name: str
    fn: Callable
    deriv: Callable
    lipschitz: float
    bound: float
    deriv_lipschitz: Callable[[float], float]

    def __call__(self, x):
        return self.fn(x)


def zero_coefficient() -> CoefficientFunction:
    return CoefficientFunction("zero", lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                               lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                               0.0, 0.0, lambda N: 0.0)


def constant_coefficient(c: float) -> CoefficientFunction:
    c = float(c)
    return CoefficientFunction(f"const({c})",
                               lambda x: np.full_like(np.asarray(x, dtype=float), c),
                               lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                               0.0, abs(c), lambda N: 0.0)


def tanh_coefficient(scale: float = 1.0) -> CoefficientFunction:
    s = float(scale)
    if s <= 0:
        raise ValueError("tanh scale must be positive")
    return CoefficientFunction(
        f"tanh({s})",
        lambda x: np.tanh(s * np.asarray(x, dtype=float)),
        lambda x: s * (1.0 - np.tanh(s * np.asarray(x, dtype=float)) ** 2),
        s, 1.0, lambda N: s * s * _TANH_D2_MAX)


def gaussian_bump(center: float = 0.0, width: float = 1.0,
                  amplitude: float = 1.0) -> CoefficientFunction:
    c, w, amp = float(center), float(width), float(amplitude)
    if w <= 0:
        raise ValueError("bump width must be positive")

    def fn(x):
        x = np.asarray(x, dtype=float)
        return amp * np.exp(-((x - c) ** 2) / (2.0 * w * w))

    def deriv(x):
        x = np.asarray(x, dtype=float)
        return -amp * (x - c) / (w * w) * np.exp(-((x - c) ** 2) / (2.0 * w * w))

    # sup |A'| = |amp| e^{-1/2} / w at |x-c| = w; sup |A''| = |amp| / w^2 at x = c
    return CoefficientFunction(f"gaussian-bump({c},{w},{amp})", fn, deriv,
                               abs(amp) * math.exp(-0.5) / w, abs(amp),
                               lambda N: abs(amp) / (w * w))


def smoothed_biot_savart(epsilon: float, strength: float = 1.0) -> CoefficientFunction:
    """Mollified x / (x^2 + eps^2)^(3/2) profile, bounded and Lipschitz."""
    eps, s = float(epsilon), float(strength)
    if eps <= 0:
        raise ValueError("mollification epsilon must be positive")

    def fn(x):
        x = np.asarray(x, dtype=float)
        return s * x / (x * x + eps * eps) ** 1.5

    def deriv(x):
        x = np.asarray(x, dtype=float)
        return s * (eps * eps - 2.0 * x * x) / (x * x + eps * eps) ** 2.5

    # |A| peaks at x = eps/sqrt(2); |A'| at 0; |A''| at u^2 = (3 - sqrt(7.5))/2
    m2 = s * 2.0 / (3.0 * math.sqrt(3.0) * eps * eps)
    m1 = s / eps ** 3
    u2 = (3.0 - math.sqrt(7.5)) / 2.0
    u = math.sqrt(u2)
    c_bs = u * (9.0 - 6.0 * u2) / (u2 + 1.0) ** 3.5
    return CoefficientFunction(f"smoothed-biot-savart({eps},{s})", fn, deriv,
                               m1, m2, lambda N: s * c_bs / eps ** 4)


def coefficient_from_kind(kind: str, **params) -> CoefficientFunction:
    if kind not in COEFFICIENT_KINDS:
        raise ValueError(f"unknown coefficient kind {kind!r}; "
                         f"choose from {sorted(COEFFICIENT_KINDS)}")
    return COEFFICIENT_KINDS[kind](**params)


COEFFICIENT_KINDS = {
    "zero": zero_coefficient,
    "const": constant_coefficient,
    "tanh": tanh_coefficient,
    "gaussian-bump": gaussian_bump,
    "smoothed-biot-savart": smoothed_biot_savart,
}


def spot_check_constants(coeff: CoefficientFunction, radius: float = 4.0,
                         samples: int = 4000, seed: int = 0) -> dict:
    """Worst slacks of the certified constants on a random dense lattice.

    Nonnegative slacks mean the constants are honest upper bounds.
    """
    rng = np.random.default_rng(seed)
    x = np.concatenate([np.linspace(-radius, radius, samples),
                        rng.uniform(-radius, radius, samples)])
    y = rng.uniform(-radius, radius, 2 * samples)
    fx, fy = coeff(x), coeff(y)
    dx, dy = coeff.deriv(x), coeff.deriv(y)
    gap = np.abs(x - y)
    mask = gap > 1e-12
    bound_slack = coeff.bound - float(np.abs(fx).max())
    lip_slack = coeff.lipschitz - float((np.abs(fx - fy)[mask] / gap[mask]).max()) \
        if coeff.lipschitz > 0 else 0.0
    mn = coeff.deriv_lipschitz(radius)
    dlip_slack = mn - float((np.abs(dx - dy)[mask] / gap[mask]).max()) if mn > 0 else 0.0
    return {"bound": bound_slack, "lipschitz": lip_slack,
            "deriv_lipschitz": dlip_slack}
