"""A concrete homoclinic unfolding: Moser-form saddle plus a cubic global map.

The local map near the saddle is ``x' = lam*x*M(xy), y' = y/(lam*M(xy))`` with
``M(s) = 1 + beta1*s``. It preserves ``xy`` exactly, so ``k`` iterates have a
closed form. The global map carries a neighbourhood of ``(0, y-)`` to one of
``(x+, 0)``::

    x' = x+ + b*(y - y-)
    y' = mu1 + c*x + mu2*(y - y-) + d*(y - y-)**3,      b*c = -1

With ``beta1 = 0`` the first return map ``T_k = T1 o T0^k`` is, after an affine
change of coordinates, *exactly* a conservative cubic Hénon map. The
evaluation goes through mpmath because ``lam**-k`` amplifies rounding error in
plain doubles by many orders of magnitude.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import mpmath
import numpy as np

from .core_maps import CubicHenonMap, PlanePoint

WORKING_DPS = 60
MODEL_KEYS = ("lambda", "beta1", "mu1", "mu2", "b", "d", "x_plus", "y_minus")


class DomainError(ValueError):
    """Raised when a point or parameter leaves the model's domain."""


@dataclass(frozen=True)
class LocalSaddleMap:
    lam: float
    beta1: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < abs(self.lam) < 1.0:
            raise DomainError(f"lambda must satisfy 0 < |lambda| < 1, got {self.lam}")

    def factor(self, s):
        m = 1 + self.beta1 * s
        if m <= 0:
            raise DomainError(f"Moser factor 1 + beta1*xy = {float(m)} is not positive")
        return m

    def apply(self, p) -> PlanePoint:
        x, y = p
        m = self.factor(x * y)
        return PlanePoint(self.lam * x * m, y / (self.lam * m))

    def iterate(self, p, k: int):
        """Exact ``k``-step image, using conservation of ``xy``."""
        x, y = p
        m = self.factor(x * y)
        return PlanePoint(self.lam**k * x * m**k, y / (self.lam**k * m**k))

    def iterate_differential(self, p, k: int) -> np.ndarray:
        x, y = p
        m = self.factor(x * y)
        lk = self.lam**k
        g = k * self.beta1 / m  # d(log M^k)/ds
        mk = m**k
        return np.array([
            [lk * mk * (1 + g * x * y), lk * mk * g * x * x],
            [-g * y * y / (lk * mk), (1 - g * x * y) / (lk * mk)],
        ])


def local_iterate(local: LocalSaddleMap, p, k: int) -> PlanePoint:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return local.iterate(p, k)


@dataclass(frozen=True)
class ModelFamily:
    local: LocalSaddleMap
    mu1: float
    mu2: float
    b: float
    d: float
    x_plus: float
    y_minus: float
    a: float = 0.0
    f11: float = 0.0
    f12: float = 0.0

    def __post_init__(self) -> None:
        if self.b == 0:
            raise DomainError("b must be nonzero (c = -1/b)")
        if self.d == 0:
            raise DomainError("d must be nonzero")
        if not (self.x_plus > 0 and self.y_minus > 0):
            raise DomainError("x_plus and y_minus must be positive")

    @property
    def c(self) -> float:
        return -1.0 / self.b

    @property
    def lam(self) -> float:
        return self.local.lam

    @property
    def simplified(self) -> bool:
        return self.a == 0 and self.f11 == 0 and self.f12 == 0

    def with_mu(self, mu1: float, mu2: float) -> "ModelFamily":
        return replace(self, mu1=mu1, mu2=mu2)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelFamily":
        unknown = set(data) - set(MODEL_KEYS)
        if unknown:
            raise DomainError(f"unknown model keys: {sorted(unknown)}")
        missing = [key for key in ("lambda", "b", "d", "x_plus", "y_minus") if key not in data]
        if missing:
            raise DomainError(f"missing model keys: {missing}")
        vals = {}
        for key in MODEL_KEYS:
            if key in data:
                v = data[key]
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise DomainError(f"model key {key!r} must be a number")
                vals[key] = float(v)
        local = LocalSaddleMap(vals["lambda"], vals.get("beta1", 0.0))
        return cls(local, vals.get("mu1", 0.0), vals.get("mu2", 0.0), vals["b"], vals["d"],
                   vals["x_plus"], vals["y_minus"])

    @classmethod
    def from_json(cls, path) -> "ModelFamily":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _require_simplified(model: ModelFamily) -> None:
    if not model.simplified:
        raise NotImplementedError("only the simplified global map (a = f11 = f12 = 0) is realized")


def _global(model: ModelFamily, x, y, mu1, mu2, b, c, d, xp, ym):
    v = y - ym
    return xp + b * v, mu1 + c * x + mu2 * v + d * v**3


def first_return(model: ModelFamily, k: int, p) -> PlanePoint:
    """``T1(T0^k(p))`` in double precision."""
    _require_simplified(model)
    x1, y1 = model.local.iterate(p, k)
    xb, yb = _global(model, x1, y1, model.mu1, model.mu2, model.b, model.c, model.d,
                     model.x_plus, model.y_minus)
    return PlanePoint(xb, yb)


def first_return_differential(model: ModelFamily, k: int, p) -> np.ndarray:
    _require_simplified(model)
    x1, y1 = model.local.iterate(p, k)
    v = y1 - model.y_minus
    dglobal = np.array([[0.0, model.b], [model.c, model.mu2 + 3.0 * model.d * v * v]])
    return dglobal @ model.local.iterate_differential(p, k)


def nu_for(model: ModelFamily, k: int) -> int:
    return 1 if model.d * model.lam**k > 0 else -1


def rescale_params(model: ModelFamily, k: int) -> tuple[float, float, int]:
    """Leading-order rescaled parameters ``(M1, M2, nu)`` at return time ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    with mpmath.workdps(WORKING_DPS):
        lam = mpmath.mpf(model.lam)
        lk = lam**k
        shift = lk * (mpmath.mpf(model.y_minus) - (-1 / mpmath.mpf(model.b)) * model.x_plus)
        m1 = mpmath.sqrt(abs(mpmath.mpf(model.d))) * abs(lam) ** (-mpmath.mpf(k) / 2) / lk * (model.mu1 - shift)
        m2 = (model.mu2 + mpmath.mpf(model.f11) * lk * model.x_plus) / lk
        return float(m1), float(m2), nu_for(model, k)


def unrescale_params(model: ModelFamily, k: int, m1: float, m2: float) -> tuple[float, float]:
    """Inverse of :func:`rescale_params`: the ``(mu1, mu2)`` mapped to ``(m1, m2)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    with mpmath.workdps(WORKING_DPS):
        lam = mpmath.mpf(model.lam)
        lk = lam**k
        mu2 = lk * m2 - mpmath.mpf(model.f11) * lk * model.x_plus
        mu1 = (lk * (mpmath.mpf(model.y_minus) - (-1 / mpmath.mpf(model.b)) * model.x_plus)
               + abs(lam) ** (mpmath.mpf(k) / 2) * lk * m1 / mpmath.sqrt(abs(mpmath.mpf(model.d))))
        return float(mu1), float(mu2)


def shift_alphas(model: ModelFamily, k: int) -> tuple[float, float]:
    """Leading coordinate shifts; both vanish for the simplified model."""
    lk = model.lam**k
    return -model.a * lk * model.x_plus, -(model.f12 / (3.0 * model.d)) * lk * model.x_plus


@dataclass(frozen=True)
class RescaledReturn:
    k: int
    m1: float
    m2: float
    nu: int
    conjugated_map: Callable[[float, float], PlanePoint] = field(repr=False, compare=False)

    @property
    def henon(self) -> CubicHenonMap:
        return CubicHenonMap(self.nu, self.m1, self.m2)

    def apply(self, p) -> PlanePoint:
        return self.conjugated_map(*p)

    def sup_error(self, box: float = 2.0, n: int = 21) -> float:
        """Max-norm distance from the cubic Hénon limit over ``|X|, |Y| <= box``."""
        h = self.henon
        grid = np.linspace(-box, box, n)
        err = 0.0
        for X in grid:
            for Y in grid:
                got = self.conjugated_map(float(X), float(Y))
                want = h.apply((float(X), float(Y)))
                err = max(err, abs(got[0] - want[0]), abs(got[1] - want[1]))
        return err


def conjugated_return(model: ModelFamily, k: int) -> RescaledReturn:
    """The first return map written in the rescaled coordinates ``(X, Y)``."""
    _require_simplified(model)
    m1, m2, nu = rescale_params(model, k)
    alpha1, alpha2 = shift_alphas(model, k)
    local = model.local

    def conj(X: float, Y: float) -> PlanePoint:
        with mpmath.workdps(WORKING_DPS):
            mpf = mpmath.mpf
            lam, beta1 = mpf(local.lam), mpf(local.beta1)
            b, d, xp, ym = mpf(model.b), mpf(model.d), mpf(model.x_plus), mpf(model.y_minus)
            c = -1 / b
            lk = lam**k
            scale = mpmath.sqrt(abs(lk) / abs(d))
            x = xp + alpha1 + b * scale * X
            y = lk * (ym + alpha2 + scale * Y)
            m = 1 + beta1 * x * y
            if m <= 0:
                raise DomainError("Moser factor is not positive along the orbit")
            mk = m**k
            xb, yb = _global(model, lk * x * mk, y / (lk * mk), mpf(model.mu1), mpf(model.mu2),
                             b, c, d, xp, ym)
            return PlanePoint(float((xb - xp - alpha1) / (b * scale)),
                              float((yb / lk - ym - alpha2) / scale))

    return RescaledReturn(k, m1, m2, nu, conj)


def convergence_table(model: ModelFamily, ks: Iterable[int], *, target: Optional[tuple[float, float]] = None,
                      box: float = 2.0, n: int = 21) -> list[dict]:
    """Sup-norm error of the rescaled return map per ``k``.

    With ``target=(M1, M2)`` the unfolding parameters are re-chosen for every
    ``k`` so that the rescaled parameters stay at the target; otherwise the
    model's own ``mu`` are used.
    """
    rows = []
    for k in ks:
        m = model if target is None else model.with_mu(*unrescale_params(model, k, *target))
        rr = conjugated_return(m, k)
        rows.append({"k": k, "sup_error": rr.sup_error(box, n), "m1": rr.m1, "m2": rr.m2, "nu": rr.nu})
    return rows


def write_convergence_csv(rows: Sequence[dict], path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_convergence_rows(fh, rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_convergence_rows(fh, rows: Sequence[dict]) -> None:
    w = csv.writer(fh)
    w.writerow(["k", "sup_error", "m1", "m2", "nu"])
    for r in rows:
        w.writerow([r["k"], f"{r['sup_error']:.17g}", f"{r['m1']:.17g}", f"{r['m2']:.17g}", r["nu"]])


def unstable_image(model: ModelFamily, x):
    """The curve ``l_u`` (image of the local unstable manifold) as ``y(x)``."""
    t = x - model.x_plus
    return model.mu1 + (model.mu2 / model.b) * t + (model.d / model.b**3) * t**3


def h0_detect(model: ModelFamily, mu2: float) -> list[float]:
    """``mu1`` values at which ``l_u`` is quadratically tangent to ``y = 0``.

    Solves ``l_u = 0`` and ``dl_u/dx = 0`` simultaneously in the simplified model.
    """
    _require_simplified(model)
    b, d = model.b, model.d
    r = -mu2 / (3.0 * d)
    if r < 0:
        return []
    out = set()
    for sgn in (1.0, -1.0):
        t = sgn * abs(b) * math.sqrt(r)
        out.add(-((mu2 / b) * t + (d / b**3) * t**3))
    return sorted(out)
