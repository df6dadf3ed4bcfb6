"""Uniform-grid containers shared by every kernel in the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["GridError", "GridFunction", "SpaceTimeField", "FractionalOrder"]


class GridError(ValueError):
    """Raised when grid data violates a structural invariant."""


@dataclass(frozen=True)
class GridFunction:
    """Real samples at the uniform nodes x_i = a + i*(b-a)/n, i = 0..n.

    Node values must be finite.  The Weyl derivative routines may mark an
    endpoint node as unusable (NaN) when the operator is singular there;
    such outputs are built with ``endpoint_nan_ok`` and downstream code
    must not read the flagged node.
    """

    a: float
    b: float
    values: np.ndarray
    endpoint_nan_ok: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if not self.b > self.a:
            raise GridError(f"need b > a, got a={self.a}, b={self.b}")
        if arr.ndim != 1 or arr.size < 3:
            raise GridError("grid needs at least n = 2 cells (3 nodes)")
        interior = arr[1:-1] if self.endpoint_nan_ok else arr
        if not np.isfinite(interior).all():
            raise GridError("non-finite node values")

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.a, self.b, self.n + 1)
        x.setflags(write=False)
        return x

    def with_values(self, values, **kw) -> "GridFunction":
        return GridFunction(self.a, self.b, values, **kw)

    def reflected(self) -> "GridFunction":
        """Samples of x -> f(a + b - x) on the same grid."""
        return GridFunction(self.a, self.b, self.values[::-1],
                            endpoint_nan_ok=self.endpoint_nan_ok)

    def restricted(self, i0: int, i1: int) -> "GridFunction":
        """Restriction to the node range [i0, i1] (at least 2 cells)."""
        if not 0 <= i0 < i1 <= self.n:
            raise GridError(f"bad node range [{i0}, {i1}]")
        return GridFunction(self.nodes[i0], self.nodes[i1],
                            self.values[i0:i1 + 1])

    @staticmethod
    def from_callable(fn, n: int, a: float = 0.0, b: float = 1.0) -> "GridFunction":
        x = np.linspace(a, b, n + 1)
        return GridFunction(a, b, fn(x))


@dataclass(frozen=True)
class FractionalOrder:
    """A fractional order alpha in (0, 1).

    ``for_solver`` additionally enforces the regime 1 - H < alpha < 1/2
    required by the fixed-point argument.
    """

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        if not 0.0 < self.alpha < 1.0:
            raise GridError(f"fractional order must lie in (0, 1), got {self.alpha}")

    @classmethod
    def for_solver(cls, alpha: float, hurst: float) -> "FractionalOrder":
        if not 0.5 < hurst < 1.0:
            raise GridError(f"Hurst parameter must lie in (1/2, 1), got {hurst}")
        if not (1.0 - hurst) < alpha < 0.5:
            raise GridError(
                f"alpha={alpha} outside the solver window (1-H, 1/2) = "
                f"({1.0 - hurst}, 0.5)")
        return cls(alpha)


def order_value(alpha) -> float:
    """Accept a float or a FractionalOrder; validate the (0,1) range."""
    a = alpha.alpha if isinstance(alpha, FractionalOrder) else float(alpha)
    if not 0.0 < a < 1.0:
        raise GridError(f"fractional order must lie in (0, 1), got {a}")
    return a


@dataclass(frozen=True)
class SpaceTimeField:
    """Real values on the tensor grid [0, T] x [0, 1].

    ``values`` has shape (m+1, n+1): row j holds the spatial slice at
    t_j = j*T/m.  The spatial domain is fixed to [0, 1].
    """

    T: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "T", float(self.T))
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if not self.T > 0.0:
            raise GridError(f"horizon must be positive, got {self.T}")
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 3:
            raise GridError("field needs m >= 1 time cells and n >= 2 space cells")
        if not np.isfinite(arr).all():
            raise GridError("non-finite field values")

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1] - 1

    @property
    def dt(self) -> float:
        return self.T / self.m

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @cached_property
    def t_nodes(self) -> np.ndarray:
        t = np.linspace(0.0, self.T, self.m + 1)
        t.setflags(write=False)
        return t

    @cached_property
    def xi_nodes(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.n + 1)
        x.setflags(write=False)
        return x

    def slice_values(self, j: int) -> np.ndarray:
        return self.values[j]

    def slice_grid(self, j: int) -> GridFunction:
        return GridFunction(0.0, 1.0, self.values[j])

    @staticmethod
    def from_callable(fn, m: int, n: int, T: float) -> "SpaceTimeField":
        t = np.linspace(0.0, T, m + 1)[:, None]
        xi = np.linspace(0.0, 1.0, n + 1)[None, :]
        return SpaceTimeField(T, fn(t, xi))

    @staticmethod
    def constant_in_time(values, m: int, T: float) -> "SpaceTimeField":
        row = np.asarray(values, dtype=float)
        return SpaceTimeField(T, np.tile(row, (m + 1, 1)))
