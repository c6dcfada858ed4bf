"""Cubic Hénon maps ``x' = y, y' = M1 + M2*y - J*x + nu*y**3``.

Every function here works on plain floats as well as on numpy arrays
(coordinates are combined with ordinary arithmetic only), so the same code
serves single-point evaluation and vectorized scans.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class PlanePoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class CubicHenonMap:
    """The map ``C_nu^J``; ``nu=+1`` gives C+, ``nu=-1`` gives C-."""

    nu: int
    m1: float
    m2: float
    j: float = 1.0

    def __post_init__(self) -> None:
        if isinstance(self.nu, bool) or self.nu not in (-1, 1):
            raise ValueError(f"nu must be +1 or -1, got {self.nu!r}")
        if self.j == 0:
            raise ValueError("Jacobian j must be nonzero")

    @property
    def conservative(self) -> bool:
        return self.j == 1

    def apply(self, p):
        x, y = p
        return PlanePoint(y, self.m1 + self.m2 * y - self.j * x + self.nu * y**3)

    def invert(self, p):
        xb, yb = p
        # same operation order as apply, so L o f o L and the inverse agree bitwise when j == 1
        return PlanePoint((self.m1 + self.m2 * xb - yb + self.nu * xb**3) / self.j, xb)

    def differential(self, p) -> np.ndarray:
        _, y = p
        return np.array([[0.0, 1.0], [-self.j, self.m2 + 3.0 * self.nu * y * y]])

    def iterate(self, p, n: int):
        """Return ``f^n(p)`` and the monodromy matrix along the way."""
        mono = np.eye(2)
        for _ in range(n):
            mono = self.differential(p) @ mono
            p = self.apply(p)
        return p, mono

    def with_params(self, **changes) -> "CubicHenonMap":
        fields = dict(nu=self.nu, m1=self.m1, m2=self.m2, j=self.j)
        fields.update(changes)
        return CubicHenonMap(**fields)


def apply(m: CubicHenonMap, p) -> PlanePoint:
    return m.apply(p)


def invert(m: CubicHenonMap, p) -> PlanePoint:
    return m.invert(p)


def differential(m: CubicHenonMap, p) -> np.ndarray:
    return m.differential(p)


def reversor(p) -> PlanePoint:
    """The involution ``(x, y) -> (y, x)``; it conjugates ``f`` to ``f^-1`` when J=1."""
    x, y = p
    return PlanePoint(y, x)
