"""Orbit clouds of a cubic Hénon map, written out as CSV or a scatter-only SVG."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core_maps import CubicHenonMap, PlanePoint

DEFAULT_ESCAPE_RADIUS = 10.0
DEFAULT_ITERATIONS = 2000
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class PortraitSpec:
    map: CubicHenonMap
    seeds: tuple
    iterations: int = DEFAULT_ITERATIONS
    escape_radius: float = DEFAULT_ESCAPE_RADIUS

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.escape_radius > 0:
            raise ValueError("escape_radius must be positive")
        object.__setattr__(self, "seeds", tuple(PlanePoint(float(x), float(y)) for x, y in self.seeds))


@dataclass(frozen=True)
class SeedTrace:
    """Iterates ``f^1 .. f^n`` of one seed; if it escaped, the last row is the escaping point."""

    seed_id: int
    points: np.ndarray  # shape (n, 2)
    escaped: bool


def grid_seeds(x_range: tuple[float, float], y_range: tuple[float, float], nx: int, ny: int) -> list[PlanePoint]:
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    return [PlanePoint(float(x), float(y)) for y in ys for x in xs]


def ring_seeds(center, radius: float, count: int) -> list[PlanePoint]:
    ang = 2.0 * np.pi * np.arange(count) / count
    return [PlanePoint(float(center[0] + radius * np.cos(a)), float(center[1] + radius * np.sin(a))) for a in ang]


def _sample_block(spec: PortraitSpec, first_id: int, seeds: Sequence[PlanePoint]) -> list[SeedTrace]:
    n = len(seeds)
    x = np.array([s.x for s in seeds], dtype=float)
    y = np.array([s.y for s in seeds], dtype=float)
    out = np.full((spec.iterations, n, 2), np.nan)
    alive = np.ones(n, dtype=bool)
    length = np.full(n, spec.iterations)
    escaped = np.zeros(n, dtype=bool)
    m = spec.map
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(spec.iterations):
            if not alive.any():
                break
            x, y = m.apply((x, y))
            out[i, alive, 0] = x[alive]
            out[i, alive, 1] = y[alive]
            gone = alive & ~(np.hypot(x, y) <= spec.escape_radius)
            if gone.any():
                escaped |= gone
                length[gone] = i + 1
                alive &= ~gone
    return [SeedTrace(first_id + j, out[: length[j], j, :].copy(), bool(escaped[j])) for j in range(n)]


def sample(spec: PortraitSpec, workers: int = 1) -> list[SeedTrace]:
    """Iterate every seed; seeds are independent, so blocks may run on worker threads."""
    seeds = list(spec.seeds)
    if not seeds:
        return []
    workers = max(1, min(workers, len(seeds)))
    bounds = np.linspace(0, len(seeds), workers + 1).astype(int)
    blocks = [(int(a), seeds[a:b]) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers == 1:
        parts = [_sample_block(spec, a, blk) for a, blk in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _sample_block(spec, *ab), blocks))
    return [t for part in parts for t in part]


def export_csv(sampled: Sequence[SeedTrace], path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["seed_id", "iter", "x", "y", "escaped"])
            for tr in sampled:
                last = len(tr.points) - 1
                for i, (x, y) in enumerate(tr.points):
                    w.writerow([tr.seed_id, i + 1, f"{x:.17g}", f"{y:.17g}", int(tr.escaped and i == last)])
    except OSError as exc:
        raise OSError(f"cannot write portrait CSV to {path}: {exc}") from exc


def _fmt(v: float) -> str:
    return f"{v:.6f}".rstrip("0").rstrip(".") if v != 0 else "0"


def render_svg(sampled: Sequence[SeedTrace], size: int = 800, dot: float = 0.004) -> str:
    """Scatter-only SVG; escaped points are left out and the view box hugs the rest."""
    layers = []
    for tr in sampled:
        pts = tr.points[:-1] if tr.escaped else tr.points
        pts = pts[np.all(np.isfinite(pts), axis=1)]
        layers.append((tr.seed_id, pts))
    allpts = [p for _, p in layers if len(p)]
    if allpts:
        stacked = np.vstack(allpts)
        lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    else:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.02 * span
    x0, y0, w = float(lo[0]) - pad, -float(hi[1]) - pad, span + 2 * pad
    r = _fmt(dot * w)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(w)}">',
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(w)}" fill="white"/>',
    ]
    for sid, pts in layers:
        lines.append(f'<g id="seed-{sid}" fill="{PALETTE[sid % len(PALETTE)]}">')
        lines.extend(f'<circle cx="{_fmt(x)}" cy="{_fmt(-y)}" r="{r}"/>' for x, y in pts)
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def export_svg(sampled: Sequence[SeedTrace], path, size: int = 800) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_svg(sampled, size))
    except OSError as exc:
        raise OSError(f"cannot write portrait SVG to {path}: {exc}") from exc
