"""The 1:4 resonance: normal-form coefficients on L_{pi/2} and the two flow normal forms.

Flow normal forms are truncated complex fields ``zeta' = pref * sum c * z^p * conj(z)^q``.
Keeping them as monomial lists makes the Wirtinger derivatives, and with them
the real Jacobian, one line each.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core_maps import PlanePoint

DEGENERACY_TOL = 1e-12
DEDUP_DIST = 1e-8
LINE_TOL = 1e-9
PARABOLIC_TOL = 1e-6


class Degeneracy(enum.Enum):
    NONE = "None"
    B03_ZERO = "B03Zero"
    A_EQUALS_ONE = "AEqualsOne"


class ResonantType(enum.Enum):
    ELLIPTIC = "EllipticType"
    SADDLE_EIGHT = "SaddleEightSeparatrices"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class ResonanceData:
    b1: float
    b03: float
    a_ratio: float
    degeneracy: Degeneracy


def resonance_coefficients(nu: int, m2: float) -> ResonanceData:
    """``B1`` and ``B03`` at a fixed point with eigenvalues ``exp(+-i*pi/2)``."""
    if nu == 1:
        b1, b03 = (3.0 - 3.0 * m2) / 8.0, (1.0 + 3.0 * m2) / 8.0
    elif nu == -1:
        b1, b03 = (-3.0 + 3.0 * m2) / 8.0, (-1.0 - 3.0 * m2) / 8.0
    else:
        raise ValueError("nu must be +1 or -1")
    if abs(b03) < DEGENERACY_TOL:
        return ResonanceData(b1, b03, math.inf, Degeneracy.B03_ZERO)
    a = abs(b1) / abs(b03)
    deg = Degeneracy.A_EQUALS_ONE if abs(a - 1.0) < DEGENERACY_TOL else Degeneracy.NONE
    return ResonanceData(b1, b03, a, deg)


def classify_resonant_point(nu: int, m2: float) -> ResonantType:
    data = resonance_coefficients(nu, m2)
    if data.degeneracy is not Degeneracy.NONE:
        return ResonantType.DEGENERATE
    return ResonantType.ELLIPTIC if data.a_ratio > 1.0 else ResonantType.SADDLE_EIGHT


class FlowVariant(enum.Enum):
    EQ11 = "Eq11"
    EQ12 = "Eq12"


class EquilibriumKind(enum.Enum):
    CENTER = "Center"
    SADDLE = "Saddle"
    PARABOLIC = "Parabolic"


class OriginType(enum.Enum):
    CENTER = "Center"
    DEGENERATE_CENTER = "DegenerateCenter"
    SADDLE_EIGHT = "SaddleEightSeparatrices"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class FlowNF:
    """Truncated flow normal form; ``c_hat`` plays the role of ``C`` for Eq12."""

    variant: FlowVariant
    beta: float
    mu: float
    b2: float = 0.0
    c_hat: float = 0.0
    b1: float = 0.0
    a_hat: Optional[float] = None

    def __post_init__(self) -> None:
        if self.variant is FlowVariant.EQ11:
            if self.a_hat is None:
                object.__setattr__(self, "a_hat", self.c_hat / 5.0)
            if not math.isclose(5.0 * self.a_hat, self.c_hat, rel_tol=4e-16, abs_tol=0.0):
                raise ValueError("Eq11 requires 5*a_hat == c_hat (zero divergence)")
        else:
            if self.b2 == self.c_hat:
                raise ValueError("Eq12 requires b2 != C")
            if self.a_hat not in (None, 0.0) or self.b1 != 0.0:
                raise ValueError("b1 and a_hat are not coefficients of Eq12")

    def with_mu(self, mu: float) -> "FlowNF":
        return FlowNF(self.variant, self.beta, mu, self.b2, self.c_hat, self.b1,
                      self.a_hat if self.variant is FlowVariant.EQ11 else None)

    @property
    def prefactor(self) -> complex:
        return -4j if self.variant is FlowVariant.EQ11 else 1j

    @property
    def monomials(self) -> list[tuple[float, int, int]]:
        """``(coefficient, p, q)`` for ``z^p * conj(z)^q`` inside the bracket."""
        if self.variant is FlowVariant.EQ11:
            return [(self.beta, 1, 0), (self.b1, 2, 1), (self.mu, 0, 3), (self.a_hat, 5, 0),
                    (self.b2, 3, 2), (self.c_hat, 1, 4)]
        return [(self.beta, 1, 0), (1.0 + self.mu, 2, 1), (1.0, 0, 3), (self.b2, 3, 2),
                (self.c_hat, 1, 4)]

    def field(self, z):
        zc = z.conjugate()
        return self.prefactor * sum(c * z**p * zc**q for c, p, q in self.monomials if c)

    def wirtinger(self, z):
        """``(dg/dz, dg/dconj(z))``."""
        zc = z.conjugate()
        a = sum(c * p * z ** (p - 1) * zc**q for c, p, q in self.monomials if c and p)
        b = sum(c * q * z**p * zc ** (q - 1) for c, p, q in self.monomials if c and q)
        return self.prefactor * a, self.prefactor * b

    def jacobian(self, z: complex) -> np.ndarray:
        a, b = self.wirtinger(complex(z))
        a, b = complex(a), complex(b)
        return np.array([[(a + b).real, -(a - b).imag], [(a + b).imag, (a - b).real]])

    def divergence(self, z):
        return 2.0 * np.real(self.wirtinger(z)[0])


@dataclass(frozen=True)
class FlowEquilibrium:
    position: PlanePoint
    kind: EquilibriumKind
    on_symmetry_line: Optional[str]

    @property
    def trivial(self) -> bool:
        return self.position.x == 0.0 and self.position.y == 0.0


_LINES = {
    "R1": lambda x, y: abs(x - y) / math.sqrt(2.0),
    "R2": lambda x, y: abs(x + y) / math.sqrt(2.0),
    "R3": lambda x, y: abs(x),
    "R4": lambda x, y: abs(y),
}


def symmetry_line(p) -> Optional[str]:
    """Which involution line ``p`` lies on; None for points off the lines and for the origin."""
    x, y = p
    if math.hypot(x, y) <= LINE_TOL:
        return None
    for name, dist in _LINES.items():
        if dist(x, y) <= LINE_TOL:
            return name
    return None


def classify_linearization(jac: np.ndarray) -> EquilibriumKind:
    det = float(np.linalg.det(jac))
    tr = float(np.trace(jac))
    scale = max(1.0, float(np.max(np.abs(jac))))
    if abs(det) < PARABOLIC_TOL * scale**2 and abs(tr) < PARABOLIC_TOL * scale:
        return EquilibriumKind.PARABOLIC
    return EquilibriumKind.SADDLE if det < 0 else EquilibriumKind.CENTER


def _newton(nf: FlowNF, z: complex, maxiter: int = 120) -> Optional[complex]:
    # convergence is judged on the step: near a degenerate equilibrium the field
    # is tiny long before Newton (then only linearly convergent) gets there
    for _ in range(maxiter):
        g = nf.field(z)
        a, b = nf.wirtinger(z)
        # real 2x2 Newton step for g(z) = 0 with J = [[Re(a+b), -Im(a-b)], [Im(a+b), Re(a-b)]]
        j11, j12, j21, j22 = (a + b).real, -(a - b).imag, (a + b).imag, (a - b).real
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        step = complex((-g.real * j22 + g.imag * j12) / det, (-g.imag * j11 + g.real * j21) / det)
        z = z + step
        if not math.isfinite(abs(z)) or abs(z) > 1e3:
            return None
        if abs(step) <= 1e-15 + 1e-13 * abs(z):
            break
    return z if abs(complex(nf.field(z))) < 1e-10 else None


def flow_equilibria(nf: FlowNF, search_radius: float = 1.5, grid: int = 64) -> list[FlowEquilibrium]:
    """All equilibria with ``|zeta| <= search_radius``, from a Newton seed grid."""
    if search_radius <= 0:
        raise ValueError("search_radius must be positive")
    axis = np.linspace(-search_radius, search_radius, grid)
    found: list[complex] = []
    for x in axis:
        for y in axis:
            z = _newton(nf, complex(x, y))
            if z is None or abs(z) > search_radius * (1 + 1e-9):
                continue
            if abs(z) < 1e-12:
                z = 0j
            found.append(z)
    found.sort(key=lambda w: (round(w.real, 6), round(w.imag, 6)))
    uniq: list[complex] = []
    for z in found:
        if all(abs(z - w) > DEDUP_DIST for w in uniq):
            uniq.append(z)
    uniq.sort(key=lambda w: (abs(w), math.atan2(w.imag, w.real) % (2 * math.pi)))
    out = []
    for z in uniq:
        p = PlanePoint(z.real, z.imag)
        out.append(FlowEquilibrium(p, classify_linearization(nf.jacobian(z)), symmetry_line(p)))
    return out


def classify_origin(nf: FlowNF) -> OriginType:
    """Type of the trivial equilibrium, using the cubic terms when ``beta = 0``.

    At ``beta = 0`` the leading Hamiltonian is ``r^4 (a + b cos 4theta)`` where
    ``a`` and ``b`` are the coefficients of ``z|z|^2`` and ``conj(z)^3``; it is
    sign-definite (degenerate center) iff ``|a| > |b|``.
    """
    if nf.beta != 0.0:
        return OriginType.CENTER
    coef = {(p, q): c for c, p, q in nf.monomials}
    a, b = abs(coef[(2, 1)]), abs(coef[(0, 3)])
    if abs(a - b) < DEGENERACY_TOL:
        return OriginType.DEGENERATE
    return OriginType.DEGENERATE_CENTER if a > b else OriginType.SADDLE_EIGHT


def radial_function(nf: FlowNF, direction: float, s):
    """Bracket of the field divided by ``z`` on the ray ``arg z = direction``, at ``|z|^2 = s``."""
    z = np.sqrt(s) * np.exp(1j * direction)
    return np.real(nf.field(z) / (nf.prefactor * z))


def _interior_extremum(f, smax: float, samples: int = 400) -> Optional[tuple[float, float]]:
    s = np.linspace(smax / samples, smax, samples)
    v = f(s)
    dv = np.diff(v)
    for i in range(len(dv) - 1):
        if dv[i] * dv[i + 1] < 0:
            sign = 1.0 if dv[i] < 0 else -1.0  # minimum if decreasing first
            res = minimize_scalar(lambda t: sign * f(t), bounds=(s[i], s[i + 2]), method="bounded",
                                  options={"xatol": 1e-12})
            return float(res.x), float(f(res.x))
    return None


def flow_l3_locator(nf: FlowNF, beta_fixed: float, mu_range: tuple[float, float], *,
                    search_radius: float = 1.5, samples: int = 200, tol: float = 1e-10) -> list[float]:
    """``mu`` values where nontrivial equilibria appear through a radial fold.

    On each symmetry ray the equilibria are zeros of the radial function; they
    collide when its interior extremum touches zero, which is where the
    linearization at the equilibrium has a double zero eigenvalue.
    """
    if nf.variant is not FlowVariant.EQ12:
        raise ValueError("the L3 locator applies to Eq12")
    base = FlowNF(FlowVariant.EQ12, beta_fixed, nf.mu, nf.b2, nf.c_hat)
    smax = search_radius**2
    out: list[float] = []
    for direction in (0.0, math.pi / 4.0):
        def g(mu: float) -> float:
            ext = _interior_extremum(lambda s: radial_function(base.with_mu(mu), direction, s), smax)
            return math.nan if ext is None else ext[1]

        mus = np.linspace(mu_range[0], mu_range[1], samples)
        vals = [g(float(m)) for m in mus]
        for m0, m1, v0, v1 in zip(mus[:-1], mus[1:], vals[:-1], vals[1:]):
            if math.isfinite(v0) and math.isfinite(v1) and v0 * v1 < 0:
                out.append(brentq(g, float(m0), float(m1), xtol=tol, rtol=1e-15))
            elif v0 == 0.0:
                out.append(float(m0))
    return sorted(out)
