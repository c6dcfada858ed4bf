"""Closed-form bifurcation curves of the conservative cubic Hénon maps.

Curves are returned as explicit samples (lists of floats or points), never as
callables, so that everything downstream can be written to CSV and diffed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

THIRD = 1.0 / 3.0
L4_COEF = 2.0 / (3.0 * math.sqrt(3.0))


class CurveTag(enum.Enum):
    L_PLUS = "Lplus"
    L_MINUS = "Lminus"
    L2_PLUS = "L2plus"
    L2_PLUS_I = "L2plusI"
    L2_MINUS_I = "L2minusI"
    L_PHI = "Lphi"
    B1_ZERO = "B1zero"
    NON_TWIST = "nontwist"
    L_PI_HALF = "LpiHalf"
    L4_1 = "L4_1"
    L4_2 = "L4_2"
    L4_3 = "L4_3"
    H0 = "H0"


class PoleError(ValueError):
    """Raised at cos(phi) = -1/4, where the B1 = 0 relation has a pole."""


@dataclass(frozen=True)
class CurveId:
    tag: CurveTag
    nu: int = 1
    index: Optional[int] = None   # i in {1, 2} for the L2 families
    phi: Optional[float] = None   # rotation angle for Lphi

    def __post_init__(self) -> None:
        if self.nu not in (-1, 1):
            raise ValueError("nu must be +1 or -1")
        t = self.tag
        if t is CurveTag.L2_PLUS and self.nu != 1:
            raise ValueError("L2plus exists only for nu = +1")
        if t is CurveTag.L2_PLUS_I and self.nu != -1:
            raise ValueError("L2plusI exists only for nu = -1")
        if t in (CurveTag.L2_PLUS_I, CurveTag.L2_MINUS_I) and self.index not in (1, 2):
            raise ValueError(f"{t.value} needs index 1 or 2")
        if t is CurveTag.L_PHI and (self.phi is None or not 0.0 < self.phi < math.pi):
            raise ValueError("Lphi needs phi in (0, pi)")
        if t in (CurveTag.L4_1, CurveTag.L4_2, CurveTag.L4_3) and self.nu != -1:
            raise ValueError("the L4 curves belong to the map C- (nu = -1)")

    @property
    def label(self) -> str:
        if self.index is not None:
            return f"{self.tag.value}{self.index}"
        if self.phi is not None:
            return f"{self.tag.value}({self.phi:.17g})"
        return self.tag.value


@dataclass(frozen=True)
class CurvePoint:
    m1: float
    m2: float
    curve: CurveId


def _pm_sqrt(v: float) -> list[float]:
    if v < 0 or not math.isfinite(v):
        return []
    if v == 0:
        return [0.0]
    r = math.sqrt(v)
    return [-r, r]


def lphi_rhs(nu: int, cos_phi: float, m2: float) -> float:
    """Right-hand side of ``M1^2 = nu*(4/27)*(M2 + cos - 3)^2 * (2cos - M2)``."""
    return nu * 4.0 / 27.0 * (m2 + cos_phi - 3.0) ** 2 * (2.0 * cos_phi - m2)


def _l2_minus_rhs(nu: int, i: int, m2: float) -> Optional[float]:
    disc = 9.0 * m2 * m2 + 24.0 * m2
    if disc < 0:
        return None
    s = (-1) ** i * math.sqrt(disc)
    return (12.0 + m2 + s) ** 2 * (-5.0 * m2 - 12.0 + s) / (216.0 * nu)


def _nontwist_m1_squared(sign: int, m2: float) -> list[float]:
    q = 8.0 * m2**3 - 108.0 * m2**2 - 63.0 * m2 + 837.0
    r = 16.0 / 27.0 * (m2 + 1.0) * (5.0 * m2 - 16.0) ** 2 * (m2 - 2.0) ** 3
    # 729 u^2 + sign*q*u - r = 0 with u = M1^2
    disc = q * q + 4.0 * 729.0 * r
    if disc < 0:
        return []
    root = math.sqrt(disc)
    us = {(-sign * q + root) / 1458.0, (-sign * q - root) / 1458.0}
    return sorted(u for u in us if u >= 0)


def curve_m1(curve: CurveId, m2: float) -> list[float]:
    """All real M1 on ``curve`` at the given M2, ascending; empty when absent."""
    t, nu = curve.tag, curve.nu
    if t is CurveTag.L_PLUS:
        out = _pm_sqrt(4.0 / (27.0 * nu) * (2.0 - m2) ** 3)
    elif t is CurveTag.L_MINUS:
        out = _pm_sqrt(-4.0 / (27.0 * nu) * (2.0 + m2) * (4.0 - m2) ** 2)
    elif t is CurveTag.L2_PLUS:
        out = _pm_sqrt(-4.0 / 27.0 * (m2 + 4.0) ** 3)
    elif t is CurveTag.L2_PLUS_I:
        if m2 <= -4.0 / 3.0:
            return []
        out = [(-1) ** curve.index * 2.0 * ((m2 + 4.0) / 3.0) ** 1.5]
    elif t is CurveTag.L2_MINUS_I:
        v = _l2_minus_rhs(nu, curve.index, m2)
        out = [] if v is None else _pm_sqrt(v)
    elif t is CurveTag.L_PHI:
        out = _pm_sqrt(lphi_rhs(nu, math.cos(curve.phi), m2))
    elif t is CurveTag.L_PI_HALF:
        out = _pm_sqrt(lphi_rhs(nu, 0.0, m2))
    elif t is CurveTag.L4_1:
        out = [L4_COEF * (1.0 + m2) ** 1.5] if m2 >= THIRD else []
    elif t is CurveTag.L4_2:
        out = [-L4_COEF * (1.0 + m2) ** 1.5] if m2 >= THIRD else []
    elif t is CurveTag.L4_3:
        out = _pm_sqrt((L4_COEF * (2.0 + m2)) ** 2 * (m2 - 1.0)) if m2 >= 1.0 else []
    elif t is CurveTag.NON_TWIST:
        out = sorted({x for u in _nontwist_m1_squared(nu, m2) for x in _pm_sqrt(u)})
    else:
        raise ValueError(f"curve {t.value} is not an M1(M2) curve")
    return sorted(out)


def curve_residual(curve: CurveId, m1: float, m2: float) -> float:
    """Residual of the curve's defining equation at ``(m1, m2)``."""
    t, nu = curve.tag, curve.nu
    if t is CurveTag.L_PLUS:
        return m1 * m1 - 4.0 / (27.0 * nu) * (2.0 - m2) ** 3
    if t is CurveTag.L_MINUS:
        return m1 * m1 + 4.0 / (27.0 * nu) * (2.0 + m2) * (4.0 - m2) ** 2
    if t is CurveTag.L2_PLUS:
        return m1 * m1 + 4.0 / 27.0 * (m2 + 4.0) ** 3
    if t is CurveTag.L2_PLUS_I:
        return m1 - (-1) ** curve.index * 2.0 * ((m2 + 4.0) / 3.0) ** 1.5
    if t is CurveTag.L2_MINUS_I:
        v = _l2_minus_rhs(nu, curve.index, m2)
        return math.nan if v is None else m1 * m1 - v
    if t is CurveTag.L_PHI:
        return m1 * m1 - lphi_rhs(nu, math.cos(curve.phi), m2)
    if t is CurveTag.L_PI_HALF:
        return m1 * m1 - lphi_rhs(nu, 0.0, m2)
    if t in (CurveTag.L4_1, CurveTag.L4_2):
        return m1 * m1 - L4_COEF**2 * (1.0 + m2) ** 3
    if t is CurveTag.L4_3:
        return m1 * m1 - L4_COEF**2 * (2.0 + m2) ** 2 * (m2 - 1.0)
    if t is CurveTag.NON_TWIST:
        return nontwist_residual(nu, m1, m2)
    raise ValueError(f"curve {t.value} has no (M1, M2) residual")


def sample_curve(curve: CurveId, m2_values: Sequence[float]) -> list[CurvePoint]:
    return [CurvePoint(m1, float(m2), curve) for m2 in m2_values for m1 in curve_m1(curve, float(m2))]


def b1_zero_m2(phi: float) -> float:
    """M2 at which the elliptic fixed point with angle ``phi`` has B1 = 0."""
    c = math.cos(phi)
    den = 1.0 + 4.0 * c
    if abs(den) < 1e-14:
        raise PoleError("cos(phi) = -1/4 is a pole of the B1 = 0 relation")
    return (6.0 * c * c + 3.0 * c + 1.0) / den


def nontwist_residual(sign: int, m1: float, m2: float) -> float:
    """Left-hand side of the explicit non-twist curve (``sign=+1`` for C+, ``-1`` for C-)."""
    q = 8.0 * m2**3 - 108.0 * m2**2 - 63.0 * m2 + 837.0
    r = 16.0 / 27.0 * (m2 + 1.0) * (5.0 * m2 - 16.0) ** 2 * (m2 - 2.0) ** 3
    m1sq = m1 * m1
    return 729.0 * m1sq * m1sq + sign * q * m1sq - r


def _nontwist_poly_in_m2(sign: int, m1: float) -> np.ndarray:
    """Coefficients (ascending) of the non-twist residual as a polynomial in M2."""
    m1sq = m1 * m1
    q = np.array([837.0, -63.0, -108.0, 8.0])
    r = 16.0 / 27.0 * P.polymul(P.polymul([1.0, 1.0], P.polypow([-16.0, 5.0], 2)), P.polypow([-2.0, 1.0], 3))
    poly = P.polysub(P.polyadd([729.0 * m1sq * m1sq], sign * m1sq * q), r)
    return poly


def nontwist_m2_roots(sign: int, m1: float) -> list[float]:
    """Real M2 on the non-twist curve at a given M1 (distinct values, ascending)."""
    if m1 == 0:
        # the residual factors exactly here
        return [-1.0, 2.0, 16.0 / 5.0]
    poly = _nontwist_poly_in_m2(sign, m1)
    dpoly = P.polyder(poly)
    out: list[float] = []
    for z in P.polyroots(poly):
        if abs(z.imag) > 1e-6 * max(1.0, abs(z)):
            continue
        x = float(z.real)
        for _ in range(3):
            d = P.polyval(x, dpoly)
            if d == 0:
                break
            x -= P.polyval(x, poly) / d
        if all(abs(x - y) > 1e-9 * max(1.0, abs(x)) for y in out):
            out.append(x)
    return sorted(out)


def lphi_m2(nu: int, phi: float, m1: float) -> list[float]:
    """M2 values on L_phi at a given M1, by bisection on the cubic residual."""
    c = math.cos(phi)

    def g(m2: float) -> float:
        return lphi_rhs(nu, c, m2) - m1 * m1

    crit = sorted({3.0 - c, 1.0 + c})
    span = 10.0 + abs(m1) ** (2.0 / 3.0) * 4.0
    knots = [crit[0] - span] + crit + [crit[-1] + span]
    roots: list[float] = []
    for a, b in zip(knots[:-1], knots[1:]):
        ga, gb = g(a), g(b)
        if ga == 0:
            roots.append(a)
        elif ga * gb < 0:
            roots.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15))
    if g(knots[-1]) == 0:
        roots.append(knots[-1])
    uniq: list[float] = []
    for r in sorted(roots):
        if not uniq or abs(r - uniq[-1]) > 1e-12:
            uniq.append(r)
    return uniq


def h0_mu1(mu2: float, d: float) -> list[float]:
    """Leading-order branches ``mu1 = +-2d(-mu2/(3d))^(3/2)`` of the quadratic-tangency curve."""
    if d == 0:
        raise ValueError("d must be nonzero")
    r = -mu2 / (3.0 * d)
    if r < 0:
        return []
    if r == 0:
        return [0.0]
    v = 2.0 * d * r**1.5
    return sorted([-v, v])


def pullback_curve(curve: CurveId, model, k: int, m2_samples: Sequence[float]) -> list[tuple[float, float]]:
    """Map an (M1, M2) curve into the (mu1, mu2) plane of ``model`` at return time ``k``."""
    from .return_map import nu_for, unrescale_params

    if k < 1:
        raise ValueError("k must be >= 1")
    if curve.nu != nu_for(model, k):
        raise ValueError(f"curve is for nu={curve.nu} but the model gives nu={nu_for(model, k)} at k={k}")
    out = []
    for m2 in m2_samples:
        for m1 in curve_m1(curve, float(m2)):
            out.append(unrescale_params(model, k, m1, float(m2)))
    return out
