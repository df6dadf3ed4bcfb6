"""Random smooth test data for probes and verification sweeps."""

from __future__ import annotations

import numpy as np

from .grids import GridFunction, SpaceTimeField

__all__ = ["random_trig_grid", "random_smooth_field"]


def random_trig_grid(n: int, rng: np.random.Generator, modes: int = 5,
                     with_constant: bool = True) -> GridFunction:
    """Random low-order trigonometric polynomial on [0, 1]."""
    x = np.linspace(0.0, 1.0, n + 1)
    k = np.arange(1, modes + 1)
    amps = rng.standard_normal(modes) / k ** 1.5
    v = sum(amps[i] * np.sin(k[i] * np.pi * x) for i in range(modes))
    if with_constant:
        v = v + rng.standard_normal()
    return GridFunction(0.0, 1.0, v)


def random_smooth_field(m: int, n: int, T: float, rng: np.random.Generator,
                        modes: int = 4) -> SpaceTimeField:
    """Random smooth space-time field with mode amplitudes drifting in time."""
    t = np.linspace(0.0, T, m + 1)[:, None]
    xi = np.linspace(0.0, 1.0, n + 1)[None, :]
    k = np.arange(1, modes + 1)
    a = rng.standard_normal(modes) / k ** 2
    b = rng.standard_normal(modes) / k ** 2
    c0 = rng.standard_normal()
    tt = t / T if T > 0 else t
    vals = c0 + sum((a[i] + b[i] * tt) * np.sin(k[i] * np.pi * xi)
                    for i in range(modes))
    vals = np.broadcast_to(vals, (m + 1, n + 1)).copy()
    return SpaceTimeField(T, vals)
