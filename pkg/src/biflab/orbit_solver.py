"""Fixed points, periodic orbits and a brute-force bifurcation scanner.

The scanner is deliberately independent of the closed-form curves in
:mod:`biflab.bif_curves`: it only knows how to solve for orbits and watch
their traces, which is what makes it usable as an oracle for those curves.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .core_maps import CubicHenonMap, PlanePoint

PARABOLIC_BAND = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50
ESCAPE_BOUND = 1e6
DISCRIMINANT_RTOL = 1e-10
DIAGONAL_TOL = 1e-8


class Stability(enum.Enum):
    SADDLE_PLUS = "SaddlePlus"
    SADDLE_MINUS = "SaddleMinus"
    ELLIPTIC = "Elliptic"
    PARABOLIC_PLUS = "ParabolicPlus"
    PARABOLIC_MINUS = "ParabolicMinus"


class EventKind(enum.Enum):
    FOLD = "Fold"
    PERIOD_DOUBLING = "PeriodDoubling"
    PITCHFORK = "Pitchfork"
    RESONANCE_1_3 = "ResonanceOneThree"
    RESONANCE_1_4 = "ResonanceOneFour"


class BranchLostWarning(RuntimeWarning):
    """Continuation of an orbit branch failed for a reason other than a fold."""


def classify_trace(trace: float, det: float = 1.0) -> tuple[Stability, Optional[float]]:
    """Stability class and rotation angle from the monodromy trace.

    For ``det != 1`` the trace is normalised by ``sqrt(det)`` so the same
    thresholds apply; a negative determinant always means a saddle.
    """
    if det <= 0:
        return (Stability.SADDLE_PLUS if trace >= 0 else Stability.SADDLE_MINUS), None
    t = trace / math.sqrt(det)
    if abs(t - 2.0) < PARABOLIC_BAND:
        return Stability.PARABOLIC_PLUS, None
    if abs(t + 2.0) < PARABOLIC_BAND:
        return Stability.PARABOLIC_MINUS, None
    if t > 2.0:
        return Stability.SADDLE_PLUS, None
    if t < -2.0:
        return Stability.SADDLE_MINUS, None
    return Stability.ELLIPTIC, math.acos(t / 2.0)


@dataclass(frozen=True)
class PeriodicOrbit:
    points: tuple[PlanePoint, ...]
    trace: float
    stability: Stability
    rotation_angle: Optional[float]
    symmetric: bool
    det: float = 1.0
    # "diagonal" (x=y) or "second" (fixed set of f o L) when found on a symmetry line
    symmetry_line: Optional[str] = field(default=None, compare=False)

    @property
    def period(self) -> int:
        return len(self.points)

    def residual(self, m: CubicHenonMap) -> float:
        n = self.period
        worst = 0.0
        for i, p in enumerate(self.points):
            q = m.apply(p)
            r = self.points[(i + 1) % n]
            worst = max(worst, math.hypot(q[0] - r[0], q[1] - r[1]))
        return worst


def orbit_from_point(m: CubicHenonMap, p, n: int, symmetry_line: Optional[str] = None) -> PeriodicOrbit:
    pts = []
    q = PlanePoint(float(p[0]), float(p[1]))
    mono = np.eye(2)
    for _ in range(n):
        pts.append(q)
        mono = m.differential(q) @ mono
        q = m.apply(q)
    trace = float(np.trace(mono))
    det = float(np.linalg.det(mono))
    stab, angle = classify_trace(trace, m.j**n)
    sym = any(abs(a.x - a.y) < DIAGONAL_TOL * max(1.0, abs(a.x)) for a in pts)
    return PeriodicOrbit(tuple(pts), trace, stab, angle, sym, det, symmetry_line)


def orbit_distance(a: PeriodicOrbit, b: PeriodicOrbit) -> float:
    """Hausdorff-style distance between two orbits, ``inf`` for different periods."""
    if a.period != b.period:
        return math.inf
    pa = np.asarray(a.points)
    pb = np.asarray(b.points)
    n = a.period
    best = math.inf
    for s in range(n):
        d = np.max(np.hypot(*(pa - np.roll(pb, -s, axis=0)).T))
        best = min(best, float(d))
    return best


def _point_distance(a: PeriodicOrbit, b: PeriodicOrbit) -> float:
    """Smallest point-to-point distance, usable across different periods."""
    pa = np.asarray(a.points)[:, None, :]
    pb = np.asarray(b.points)[None, :, :]
    return float(np.min(np.hypot(*(pa - pb).transpose(2, 0, 1))))


def _minimal_period(m: CubicHenonMap, p, n: int) -> int:
    scale = max(1.0, abs(p[0]), abs(p[1]))
    for d in range(1, n):
        if n % d:
            continue
        q, _ = m.iterate(PlanePoint(*p), d)
        if math.hypot(q[0] - p[0], q[1] - p[1]) < 1e-8 * scale:
            return d
    return n


def _cubic_real_roots(a: float, p: float, q: float) -> list[tuple[float, bool]]:
    """Real roots of ``a*y**3 + p*y + q``; flags mark double roots."""
    if p == 0 and q == 0:
        return [(0.0, True)]
    # roots scale as t under (p, q) -> (t^2 p, t^3 q); normalise so tiny inputs do not underflow
    t = max(math.sqrt(abs(p)), abs(q) ** (1.0 / 3.0))
    if t < 1e-50 or t > 1e50:
        return [(t * y, dbl) for y, dbl in _cubic_real_roots(a, p / t / t, q / t / t / t)]
    disc = -4.0 * a * p**3 - 27.0 * a * a * q * q
    scale = 4.0 * abs(p) ** 3 + 27.0 * q * q
    rel = disc / scale
    if abs(rel) < DISCRIMINANT_RTOL:
        double = -3.0 * q / (2.0 * p)
        simple = 3.0 * q / p
        return sorted([(double, True), (simple, False)])
    raw = np.roots([a, 0.0, p, q])
    if rel > 0:
        ys = sorted(float(r.real) for r in raw)
    else:
        ys = [float(raw[np.argmin(np.abs(raw.imag))].real)]
    polished = []
    for y in ys:
        for _ in range(2):
            f = a * y**3 + p * y + q
            df = 3.0 * a * y * y + p
            if df == 0:
                break
            y -= f / df
        polished.append((y, False))
    return polished


def fixed_points(m: CubicHenonMap) -> list[PeriodicOrbit]:
    """All fixed points, from the cubic ``nu*y**3 + (M2-2)*y + M1 = 0`` on x=y."""
    if m.j != 1:
        raise ValueError("fixed_points requires the conservative map (j == 1)")
    out = []
    for y, is_double in _cubic_real_roots(float(m.nu), m.m2 - 2.0, m.m1):
        orb = orbit_from_point(m, (y, y), 1, symmetry_line="diagonal")
        if is_double and orb.stability is not Stability.PARABOLIC_PLUS:
            # the discriminant test is authoritative for a double root
            orb = PeriodicOrbit(orb.points, orb.trace, Stability.PARABOLIC_PLUS, None,
                                orb.symmetric, orb.det, "diagonal")
        out.append(orb)
    return out


def _newton_periodic(m: CubicHenonMap, n: int, seed) -> Optional[np.ndarray]:
    p = np.array([float(seed[0]), float(seed[1])])
    eye = np.eye(2)
    damped_used = False
    for _ in range(NEWTON_MAXITER):
        if not np.all(np.isfinite(p)) or np.max(np.abs(p)) > ESCAPE_BOUND:
            return None
        with np.errstate(over="ignore", invalid="ignore"):
            q, mono = m.iterate(PlanePoint(*p), n)
        resid = np.array([q[0] - p[0], q[1] - p[1]])
        if not np.all(np.isfinite(resid)):
            return None
        if np.max(np.abs(resid)) < NEWTON_TOL:
            return p
        jac = mono - eye
        step = None
        if np.linalg.cond(jac) < 1e14:
            step = np.linalg.solve(jac, -resid)
        elif not damped_used:
            damped_used = True
            with np.errstate(over="ignore", invalid="ignore"):
                lam = 1e-8 * max(1.0, float(np.sum(jac * jac)))
                step = -0.5 * np.linalg.solve(jac.T @ jac + lam * eye, jac.T @ resid)
        if step is None or not np.all(np.isfinite(step)):
            return None
        p = p + step
    return None


def find_periodic_orbit(m: CubicHenonMap, period: int, seed) -> Optional[PeriodicOrbit]:
    """Newton on ``f^n(p) - p``; returns ``None`` when nothing converges.

    The orbit is reported at its minimal period.
    """
    if not 1 <= period <= 64:
        raise ValueError("period must be in [1, 64]")
    if not (math.isfinite(seed[0]) and math.isfinite(seed[1])):
        raise ValueError("seed must be finite")
    p = _newton_periodic(m, period, seed)
    if p is None:
        return None
    d = _minimal_period(m, p, period)
    return orbit_from_point(m, p, d)


# --- symmetric orbits -------------------------------------------------------

def _line_point(m: CubicHenonMap, t, line: str):
    if line == "diagonal":
        return t, t
    return t, (m.m1 + m.m2 * t + m.nu * t**3) / (1.0 + m.j)


def _line_residual(m: CubicHenonMap, t, half: int, line: str):
    """Distance-like residual of ``f^half(point(t))`` from the same symmetry line."""
    x, y = _line_point(m, t, line)
    for _ in range(half):
        x, y = m.apply((x, y))
    if line == "diagonal":
        return x - y
    return (1.0 + m.j) * y - (m.m1 + m.m2 * x + m.nu * x**3)


def _line_residual_and_slope(m: CubicHenonMap, t: float, half: int, line: str):
    x0, y0 = _line_point(m, t, line)
    if line == "diagonal":
        tangent = np.array([1.0, 1.0])
    else:
        tangent = np.array([1.0, (m.m2 + 3.0 * m.nu * t * t) / (1.0 + m.j)])
    (x, y), mono = m.iterate(PlanePoint(x0, y0), half)
    v = mono @ tangent
    if line == "diagonal":
        return x - y, v[0] - v[1]
    g = (1.0 + m.j) * y - (m.m1 + m.m2 * x + m.nu * x**3)
    return g, (1.0 + m.j) * v[1] - (m.m2 + 3.0 * m.nu * x * x) * v[0]


def _line_slope(m: CubicHenonMap, period: int, t: float, line: str) -> float:
    """Derivative of the line residual at a root; it vanishes exactly at folds along the line."""
    if period == 1:
        return 3.0 * m.nu * t * t + m.m2 - 1.0 - m.j
    return float(_line_residual_and_slope(m, t, period // 2, line)[1])


def _orbit_on_line(m: CubicHenonMap, t: float, period: int, line: str) -> Optional[PeriodicOrbit]:
    p = _line_point(m, t, line)
    q, _ = m.iterate(PlanePoint(*p), period)
    if not (math.isfinite(q[0]) and math.isfinite(q[1])):
        return None
    if math.hypot(q[0] - p[0], q[1] - p[1]) > 1e-10:
        return None
    d = _minimal_period(m, p, period)
    return orbit_from_point(m, p, d, symmetry_line=line)


def _solve_on_line(m: CubicHenonMap, period: int, t0: float, line: str) -> Optional[tuple[float, PeriodicOrbit]]:
    half = period // 2 if period > 1 else 0
    if period == 1:
        # fixed points sit on the diagonal; solve the cubic directly
        t = t0
        for _ in range(NEWTON_MAXITER):
            f = m.nu * t**3 + (m.m2 - 1.0 - m.j) * t + m.m1
            df = 3.0 * m.nu * t * t + m.m2 - 1.0 - m.j
            if df == 0 or not math.isfinite(f):
                return None
            dt = f / df
            t -= dt
            if abs(dt) < 1e-15 * max(1.0, abs(t)):
                break
        orb = _orbit_on_line(m, t, 1, "diagonal")
        return None if orb is None else (t, orb)
    t = t0
    for _ in range(NEWTON_MAXITER):
        g, dg = _line_residual_and_slope(m, t, half, line)
        if not (math.isfinite(g) and math.isfinite(dg)) or dg == 0 or abs(t) > ESCAPE_BOUND:
            return None
        dt = g / dg
        t -= dt
        if abs(dt) < 1e-15 * max(1.0, abs(t)):
            break
    orb = _orbit_on_line(m, t, period, line)
    return None if orb is None else (t, orb)


def _dedupe(orbits: Iterable[PeriodicOrbit], tol: float = 1e-7) -> list[PeriodicOrbit]:
    kept: list[PeriodicOrbit] = []
    for o in orbits:
        if all(orbit_distance(o, k) > tol for k in kept):
            kept.append(o)
    return kept


def _symmetric_candidates(m: CubicHenonMap, period: int, search_interval, line: str,
                          samples: int) -> list[tuple[float, PeriodicOrbit]]:
    half = period // 2
    lo, hi = search_interval
    ts = np.linspace(lo, hi, samples)
    with np.errstate(over="ignore", invalid="ignore"):
        gs = _line_residual(m, ts, half, line)
    ok = np.isfinite(gs)
    out = []
    for i in np.nonzero(ok[:-1] & ok[1:] & (np.sign(gs[:-1]) * np.sign(gs[1:]) <= 0))[0]:
        a, b = float(ts[i]), float(ts[i + 1])
        ga, gb = float(gs[i]), float(gs[i + 1])
        if ga == 0.0:
            t = a
        elif gb == 0.0:
            continue  # picked up as the left end of the next cell
        else:
            t = brentq(lambda s: _line_residual(m, s, half, line), a, b, xtol=1e-14, rtol=1e-15)
        orb = _orbit_on_line(m, t, period, line)
        if orb is None:
            refined = _solve_on_line(m, period, t, line)
            if refined is None or abs(refined[0] - t) > 1e-6:
                continue
            t, orb = refined
        out.append((t, orb))
    return out


def find_symmetric_orbits(m: CubicHenonMap, period: int, search_interval=(-3.0, 3.0), *,
                          line: str = "diagonal", samples: int = 10_000) -> list[PeriodicOrbit]:
    """Orbits with two points on a symmetry line of the reversor.

    ``line="diagonal"`` scans x=y (R-symmetric orbits); ``line="second"`` scans
    the fixed set of ``f o L``.  Orbits of lower minimal period (e.g. fixed
    points, which satisfy the half-period condition trivially) are returned
    at that period.
    """
    if m.j != 1:
        raise ValueError("symmetric orbit search requires j == 1")
    if period < 2 or period % 2:
        raise ValueError("period must be a positive even integer")
    if line not in ("diagonal", "second"):
        raise ValueError(f"unknown symmetry line {line!r}")
    return _dedupe(o for _, o in _symmetric_candidates(m, period, search_interval, line, samples))


# --- bifurcation scanning ---------------------------------------------------

@dataclass(frozen=True)
class BifurcationEvent:
    parameter_value: float
    kind: EventKind
    period: int
    orbit_before: Optional[PeriodicOrbit] = None
    orbit_after: Optional[PeriodicOrbit] = None


@dataclass
class _Branch:
    orbit: PeriodicOrbit
    line: Optional[str] = None
    t: float = 0.0
    slope: float = 0.0


_TARGETS = (
    (2.0, EventKind.PITCHFORK),
    (-2.0, EventKind.PERIOD_DOUBLING),
    (-1.0, EventKind.RESONANCE_1_3),
    (0.0, EventKind.RESONANCE_1_4),
)


class _Scanner:
    def __init__(self, family: Callable[[float], CubicHenonMap], period: int, *,
                 symmetric: bool, search_interval, seeds, tol: float, line_samples: int):
        self.family = family
        self.period = period
        self.symmetric = symmetric
        self.search_interval = search_interval
        self.seeds = seeds
        self.tol = tol
        self.line_samples = line_samples
        self.lost = 0

    # discovery -------------------------------------------------------------
    def discover(self, param: float) -> list[_Branch]:
        m = self.family(param)
        n = self.period
        found: list[_Branch] = []
        if n == 1:
            for o in fixed_points(m):
                t = o.points[0].x
                found.append(_Branch(o, "diagonal", t, _line_slope(m, 1, t, "diagonal")))
        elif self.symmetric:
            for line in ("diagonal", "second"):
                for t, o in _symmetric_candidates(m, n, self.search_interval, line, self.line_samples):
                    if o.period == n:
                        found.append(_Branch(o, line, t, _line_slope(m, n, t, line)))
        else:
            for s in self._seed_points():
                o = find_periodic_orbit(m, n, s)
                if o is not None and o.period == n:
                    found.append(_Branch(o))
        kept: list[_Branch] = []
        for b in found:
            if all(orbit_distance(b.orbit, k.orbit) > 1e-7 for k in kept):
                kept.append(b)
        return kept

    def _seed_points(self):
        if self.seeds is not None:
            return self.seeds
        lo, hi = self.search_interval
        g = np.linspace(lo, hi, 12)
        return [(float(a), float(b)) for a in g for b in g]

    # continuation ----------------------------------------------------------
    def solve_near(self, br: _Branch, param: float) -> Optional[_Branch]:
        m = self.family(param)
        if br.line is not None:
            res = _solve_on_line(m, self.period, br.t, br.line)
            if res is None:
                return None
            return _Branch(res[1], br.line, res[0], _line_slope(m, self.period, res[0], br.line))
        o = find_periodic_orbit(m, self.period, br.orbit.points[0])
        return None if o is None else _Branch(o)

    def advance(self, br: _Branch, param: float, max_jump: float) -> Optional[_Branch]:
        nb = self.solve_near(br, param)
        if nb is None or nb.orbit.period != br.orbit.period:
            return None
        if orbit_distance(nb.orbit, br.orbit) > max_jump:
            return None
        if br.line is not None and nb.slope * br.slope < 0:
            # the root on the symmetry line went through a fold: this is the partner branch
            return None
        return nb

    def follow(self, br: _Branch, p0: float, p1: float, max_jump: float):
        """Continue ``br`` from ``p0`` to ``p1`` with step halving.

        Returns ``(branch_at_p1, None)`` or ``(last_branch, (last_ok, failed))``.
        """
        cur, pc = br, p0
        h = p1 - p0
        halvings = 0
        while pc != p1:
            target = p1 if abs(p1 - pc) <= abs(h) else pc + h
            nb = self.advance(cur, target, max_jump)
            if nb is not None:
                cur, pc = nb, target
                continue
            halvings += 1
            if halvings > 10:
                return cur, (pc, target)
            h /= 2.0
        return cur, None

    def bisect_existence(self, br: _Branch, p_ok: float, p_bad: float, max_jump: float):
        while abs(p_bad - p_ok) > self.tol:
            mid = 0.5 * (p_ok + p_bad)
            nb = self.advance(br, mid, max_jump)
            if nb is None:
                p_bad = mid
            else:
                br, p_ok = nb, mid
        return br, 0.5 * (p_ok + p_bad)

    def bisect_crossing(self, a: _Branch, pa: float, b: _Branch, pb: float, target: float, max_jump: float):
        side_a = a.orbit.trace >= target
        while abs(pb - pa) > self.tol:
            mid = 0.5 * (pa + pb)
            nb, failure = self.follow(a, pa, mid, max_jump)
            if failure is not None:
                return None
            if (nb.orbit.trace >= target) == side_a:
                a, pa = nb, mid
            else:
                b, pb = nb, mid
        return 0.5 * (pa + pb), a, b

    # classification of a branch end -------------------------------------------
    def end_event(self, br: _Branch, at: float) -> Optional[BifurcationEvent]:
        o = br.orbit
        if o.period > 1 and _collapsed(o):
            return BifurcationEvent(at, EventKind.PERIOD_DOUBLING, o.period, orbit_before=o)
        if abs(o.trace - 2.0) < 1e-2:
            return BifurcationEvent(at, EventKind.FOLD, o.period, orbit_before=o)
        self.lost += 1
        warnings.warn(f"branch lost near parameter {at:.12g} (trace {o.trace:.6g})",
                      BranchLostWarning, stacklevel=3)
        return None


def _collapsed(o: PeriodicOrbit, rtol: float = 1e-3) -> bool:
    pts = np.asarray(o.points)
    n = len(pts)
    scale = max(1.0, float(np.max(np.abs(pts))))
    for d in range(1, n):
        if n % d == 0 and np.max(np.hypot(*(pts - np.roll(pts, -d, axis=0)).T)) < rtol * scale:
            return True
    return False


def _separation(br: _Branch, others: Sequence[_Branch]) -> float:
    best = math.inf
    for o in others:
        if o is br:
            continue
        best = min(best, _point_distance(br.orbit, o.orbit))
    return best


def scan_bifurcations(family: Callable[[float], CubicHenonMap], period: int, param_range: tuple[float, float],
                      steps: int, *, symmetric: bool = False, search_interval=(-3.0, 3.0),
                      seeds: Optional[Sequence] = None, tol: float = 1e-10,
                      line_samples: int = 10_000) -> list[BifurcationEvent]:
    """Track all period-``period`` orbit branches across ``param_range``.

    Each branch is continued from one grid value to the next (step halving up
    to ten times).  Trace crossings of +2, -2, -1 and 0 along a surviving
    branch and branch births/deaths are localised by bisection to ``tol``.
    A +2 crossing on a persisting branch is a pitchfork; a birth or death with
    trace at +2 is a fold; a branch collapsing onto a lower period is reported
    as period doubling.

    ``symmetric=True`` discovers even-period orbits on both symmetry lines of
    the reversor (x=y and the fixed set of ``f o L``) and continues them on
    their line, which keeps the solve regular through pitchforks.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if symmetric and period > 1 and period % 2:
        raise ValueError("symmetric tracking needs an even period")
    sc = _Scanner(family, period, symmetric=symmetric, search_interval=search_interval,
                  seeds=seeds, tol=tol, line_samples=line_samples)
    grid = np.linspace(param_range[0], param_range[1], steps)
    start = float(grid[0])
    active = sc.discover(float(grid[0]))
    events: list[BifurcationEvent] = []

    for p0, p1 in zip(grid[:-1], grid[1:]):
        p0, p1 = float(p0), float(p1)
        found = sc.discover(p1)
        survivors: list[_Branch] = []
        for br in active:
            jump = min(0.5 * _separation(br, active), 1.0)
            nb, failure = sc.follow(br, p0, p1, jump)
            if failure is None:
                events.extend(_crossings(sc, br, p0, nb, p1, jump))
                survivors.append(nb)
                continue
            last_ok, bad = failure
            # crossings before the branch ended still count
            if last_ok != p0:
                events.extend(_crossings(sc, br, p0, nb, last_ok, jump))
            end_br, at = sc.bisect_existence(nb, last_ok, bad, max(2.0 * jump, 1e-12))
            ev = sc.end_event(end_br, at)
            if ev is not None:
                events.append(ev)

        for cand in found:
            if any(orbit_distance(cand.orbit, s.orbit) < 1e-6 for s in survivors):
                continue
            jump = min(0.5 * _separation(cand, found), 1.0)
            # follow one step past p0: a birth sitting exactly on p0 (where Newton
            # still converges on the double root) must still end the branch
            p_back = p0 - (p1 - p0)
            if (p_back - start) * (p1 - p0) < 0:
                p_back = start
            back, failure = sc.follow(cand, p1, p_back, jump)
            if failure is None:
                # existed before p1 but was missed by discovery
                events.extend(_crossings(sc, back, p_back, cand, p1, jump))
            else:
                last_ok, bad = failure
                end_br, at = sc.bisect_existence(back, last_ok, bad, max(2.0 * jump, 1e-12))
                ev = sc.end_event(end_br, at)
                if ev is not None:
                    events.append(BifurcationEvent(ev.parameter_value, ev.kind, ev.period,
                                                   orbit_after=end_br.orbit))
                if last_ok != p1:
                    events.extend(_crossings(sc, back, last_ok, cand, p1, jump))
            survivors.append(cand)
        active = []
        for s in survivors:
            if all(orbit_distance(s.orbit, k.orbit) > 1e-7 for k in active):
                active.append(s)

    return _merge_events(events, tol)


def _crossings(sc: _Scanner, a: _Branch, pa: float, b: _Branch, pb: float, jump: float) -> list[BifurcationEvent]:
    if pa > pb:
        a, pa, b, pb = b, pb, a, pa
    out = []
    for target, kind in _TARGETS:
        if (a.orbit.trace >= target) == (b.orbit.trace >= target):
            continue
        res = sc.bisect_crossing(a, pa, b, pb, target, max(jump, 1e-6))
        if res is None:
            continue
        at, before, after = res
        out.append(BifurcationEvent(at, kind, a.orbit.period, before.orbit, after.orbit))
    return out


def _merge_events(events: list[BifurcationEvent], tol: float) -> list[BifurcationEvent]:
    events = sorted(events, key=lambda e: (e.parameter_value, e.kind.value))
    close = max(100.0 * tol, 1e-8)
    pitch = [e.parameter_value for e in events if e.kind is EventKind.PITCHFORK]
    out: list[BifurcationEvent] = []
    for e in events:
        if e.kind is EventKind.FOLD and any(abs(e.parameter_value - p) < close for p in pitch):
            continue
        if out and out[-1].kind is e.kind and out[-1].period == e.period \
                and abs(out[-1].parameter_value - e.parameter_value) < close:
            continue
        out.append(e)
    return out
