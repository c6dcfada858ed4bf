"""Command-line front end: ``biflab {curves,scan,rescale,resonance,portrait}``.

Exit codes: 0 success, 1 numerical failure (e.g. a continuation branch was
lost), 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import re
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import bif_curves as bc
from . import portrait as pt
from . import resonance14 as rz
from . import return_map as rm
from .core_maps import CubicHenonMap
from .orbit_solver import BranchLostWarning, scan_bifurcations

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

CURVE_TAGS = {t.value.lower(): t for t in bc.CurveTag}
_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf|:)")


class UsageError(Exception):
    pass


def parse_range(text: str, flag: str, integer: bool = False) -> list:
    """``start:end:count`` with inclusive endpoints; a bare number is a single sample."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            vals = [v]
        elif len(parts) == 3:
            start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 0 or not (math.isfinite(start) and math.isfinite(end)):
                raise ValueError
            vals = [start] if count == 1 else list(np.linspace(start, end, count))
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"{flag}: expected start:end:count or a number, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{flag}: values must be finite")
    if integer:
        if any(v != int(v) for v in vals):
            raise UsageError(f"{flag}: values must be integers")
        return [int(v) for v in vals]
    return [float(v) for v in vals]


def parse_sign(text: str, flag: str) -> int:
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    if text not in table:
        raise UsageError(f"{flag}: expected +1 or -1, got {text!r}")
    return table[text]


def worker_count() -> int:
    raw = os.environ.get("BIFLAB_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"BIFLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"BIFLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def _g(v: float) -> str:
    return f"{v:.17g}"


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline="", encoding="utf-8"), True
    except OSError as exc:
        raise UsageError(f"cannot open output {path}: {exc}") from None


def _emit(rows: list[list], header: list[str], path: Optional[str]) -> None:
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if close:
            fh.close()


def _branch(v: float) -> int:
    return 0 if v == 0 else (1 if v > 0 else -1)


# --- curves -----------------------------------------------------------------

def cmd_curves(args) -> int:
    tag = CURVE_TAGS.get(args.curve.lower())
    if tag is None:
        raise UsageError(f"--curve: unknown curve {args.curve!r}; choose from {sorted(t.value for t in bc.CurveTag)}")
    if tag is bc.CurveTag.H0:
        if args.d is None or args.mu2 is None:
            raise UsageError("--curve H0 needs --d and --mu2")
        if args.d == 0:
            raise UsageError("--d must be nonzero")
        rows = [[tag.value, "", _branch(mu1), _g(mu1), _g(mu2)]
                for mu2 in parse_range(args.mu2, "--mu2") for mu1 in bc.h0_mu1(mu2, args.d)]
        _emit(rows, ["curve_tag", "nu", "branch", "mu1", "mu2"], args.output)
        return EXIT_OK
    if tag is bc.CurveTag.NON_TWIST:
        sign = parse_sign(args.sign if args.sign is not None else args.nu, "--sign")
        curve = bc.CurveId(tag, sign)
        if args.m1 is not None:
            rows = [[tag.value, sign, _branch(m1), _g(m1), _g(m2)]
                    for m1 in parse_range(args.m1, "--m1") for m2 in bc.nontwist_m2_roots(sign, m1)]
            _emit(rows, ["curve_tag", "nu", "branch", "m1", "m2"], args.output)
            return EXIT_OK
    elif tag is bc.CurveTag.B1_ZERO:
        nu = parse_sign(args.nu, "--nu")
        if args.phi is None:
            raise UsageError("--curve B1zero needs --phi")
        rows = []
        for phi in parse_range(args.phi, "--phi"):
            if not 0 < phi < math.pi:
                raise UsageError("--phi must lie in (0, pi)")
            try:
                m2 = bc.b1_zero_m2(phi)
            except bc.PoleError as exc:
                raise UsageError(f"--phi: {exc}") from None
            for m1 in bc.curve_m1(bc.CurveId(bc.CurveTag.L_PHI, nu, phi=phi), m2):
                rows.append([tag.value, nu, _branch(m1), _g(m1), _g(m2)])
        _emit(rows, ["curve_tag", "nu", "branch", "m1", "m2"], args.output)
        return EXIT_OK
    else:
        nu = parse_sign(args.nu, "--nu")
        try:
            phi = None
            if tag is bc.CurveTag.L_PHI:
                if args.phi is None:
                    raise UsageError("--curve Lphi needs --phi")
                phis = parse_range(args.phi, "--phi")
                if len(phis) != 1:
                    raise UsageError("--phi: Lphi takes a single angle")
                phi = phis[0]
            curve = bc.CurveId(tag, nu, index=args.index, phi=phi)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if tag is bc.CurveTag.L_PHI and args.m1 is not None:
            rows = [[curve.label, nu, _branch(m1), _g(m1), _g(m2)]
                    for m1 in parse_range(args.m1, "--m1") for m2 in bc.lphi_m2(nu, curve.phi, m1)]
            _emit(rows, ["curve_tag", "nu", "branch", "m1", "m2"], args.output)
            return EXIT_OK
    if args.m2 is None:
        raise UsageError("--m2 range is required for this curve")
    m2s = parse_range(args.m2, "--m2")
    if args.model is not None:
        if args.k is None:
            raise UsageError("--model needs --k")
        model = rm.ModelFamily.from_json(args.model)
        try:
            pts = bc.pullback_curve(curve, model, args.k, m2s)
        except ValueError as exc:
            raise UsageError(f"--k: {exc}") from None
        rows = [[curve.label, curve.nu, "", _g(mu1), _g(mu2)] for mu1, mu2 in pts]
        _emit(rows, ["curve_tag", "nu", "branch", "mu1", "mu2"], args.output)
        return EXIT_OK
    rows = [[curve.label, curve.nu, _branch(p.m1), _g(p.m1), _g(p.m2)] for p in bc.sample_curve(curve, m2s)]
    _emit(rows, ["curve_tag", "nu", "branch", "m1", "m2"], args.output)
    return EXIT_OK


# --- scan -------------------------------------------------------------------

def cmd_scan(args) -> int:
    nu = parse_sign(args.nu, "--nu")
    if args.period < 1 or args.period > 64:
        raise UsageError("--period must be in 1..64")
    start, end, steps = _scan_range(args.range)
    header = ["parameter_value", "kind", "period", "trace_before", "trace_after"]
    if steps < 2:
        _emit([], header, args.output)
        return EXIT_OK
    fixed = args.m2 if args.vary == "m1" else args.m1
    if fixed is None:
        raise UsageError(f"--{'m2' if args.vary == 'm1' else 'm1'} is required when varying {args.vary}")

    def family(p: float) -> CubicHenonMap:
        return CubicHenonMap(nu, p, fixed) if args.vary == "m1" else CubicHenonMap(nu, fixed, p)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BranchLostWarning)
        try:
            events = scan_bifurcations(family, args.period, (start, end), steps, symmetric=args.symmetric,
                                       search_interval=(-args.box, args.box))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    rows = []
    for e in events:
        tb = "" if e.orbit_before is None else _g(e.orbit_before.trace)
        ta = "" if e.orbit_after is None else _g(e.orbit_after.trace)
        rows.append([_g(e.parameter_value), e.kind.value, e.period, tb, ta])
    _emit(rows, header, args.output)
    lost = [w for w in caught if issubclass(w.category, BranchLostWarning)]
    for w in lost:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_NUMERIC if lost else EXIT_OK


def _scan_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--range: expected start:end:steps, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--range: expected start:end:steps, got {text!r}") from None


# --- rescale ----------------------------------------------------------------

def cmd_rescale(args) -> int:
    try:
        model = rm.ModelFamily.from_json(args.model)
    except OSError as exc:
        raise UsageError(f"--model: {exc}") from None
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--model: {exc}") from None
    ks = parse_range(args.k, "--k", integer=True)
    if any(k < 1 for k in ks):
        raise UsageError("--k: values must be >= 1")
    if (args.target_m1 is None) != (args.target_m2 is None):
        raise UsageError("--target-m1 and --target-m2 go together")
    target = None if args.target_m1 is None else (args.target_m1, args.target_m2)
    if args.box <= 0 or args.grid < 2:
        raise UsageError("--box must be positive and --grid at least 2")
    rows = rm.convergence_table(model, ks, target=target, box=args.box, n=args.grid)
    fh, close = _open_out(args.output)
    try:
        rm.write_convergence_rows(fh, rows)
    finally:
        if close:
            fh.close()
    return EXIT_OK


# --- resonance --------------------------------------------------------------

def cmd_resonance(args) -> int:
    nu = parse_sign(args.nu, "--nu")
    lines = []
    if args.m2 is not None:
        data = rz.resonance_coefficients(nu, args.m2)
        kind = rz.classify_resonant_point(nu, args.m2)
        lines += [f"nu={nu}", f"m2={_g(args.m2)}", f"b1={_g(data.b1)}", f"b03={_g(data.b03)}",
                  f"a_ratio={_g(data.a_ratio)}", f"degeneracy={data.degeneracy.value}", f"classification={kind.value}"]
        l_pi_half = bc.curve_m1(bc.CurveId(bc.CurveTag.L_PI_HALF, nu), args.m2)
        lines.append("m1_on_curve=" + ",".join(_g(v) for v in l_pi_half))
    if args.flow is not None:
        variant = rz.FlowVariant.EQ11 if args.flow == "eq11" else rz.FlowVariant.EQ12
        try:
            if variant is rz.FlowVariant.EQ11:
                nf = rz.FlowNF(variant, args.beta, args.mu, args.b2, args.c_hat, args.b1)
            else:
                nf = rz.FlowNF(variant, args.beta, args.mu, args.b2, args.c_hat)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.radius <= 0:
            raise UsageError("--radius must be positive")
        eqs = rz.flow_equilibria(nf, args.radius)
        lines.append(f"origin={rz.classify_origin(nf).value}")
        lines.append(f"nontrivial_equilibria={sum(1 for e in eqs if not e.trivial)}")
        for e in eqs:
            lines.append(f"equilibrium x={_g(e.position.x)} y={_g(e.position.y)} kind={e.kind.value} "
                         f"line={e.on_symmetry_line or '-'}")
    if not lines:
        raise UsageError("give --m2 and/or --flow")
    fh, close = _open_out(args.output)
    try:
        fh.write("\n".join(lines) + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


# --- portrait ---------------------------------------------------------------

def _parse_seeds(text: str) -> list[tuple[float, float]]:
    seeds = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            x, y = (float(v) for v in item.split(","))
        except ValueError:
            raise UsageError(f"--seeds: expected 'x,y;x,y;...', got {item!r}") from None
        seeds.append((x, y))
    return seeds


def cmd_portrait(args) -> int:
    nu = parse_sign(args.nu, "--nu")
    seeds: list = []
    if args.seeds:
        seeds += _parse_seeds(args.seeds)
    if args.xgrid or args.ygrid:
        if not (args.xgrid and args.ygrid):
            raise UsageError("--xgrid and --ygrid go together")
        xs, ys = parse_range(args.xgrid, "--xgrid"), parse_range(args.ygrid, "--ygrid")
        seeds += [(x, y) for y in ys for x in xs]
    if not seeds:
        raise UsageError("give --seeds and/or --xgrid/--ygrid")
    try:
        spec = pt.PortraitSpec(CubicHenonMap(nu, args.m1, args.m2), tuple(seeds), args.iterations, args.escape)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    traces = pt.sample(spec, workers=worker_count())
    if args.csv is None and args.svg is None:
        raise UsageError("give --csv and/or --svg")
    if args.csv:
        pt.export_csv(traces, args.csv)
    if args.svg:
        pt.export_svg(traces, args.svg)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biflab", description="Bifurcation analysis of conservative cubic Hénon maps.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curves", help="sample analytic bifurcation curves")
    c.add_argument("--curve", required=True)
    c.add_argument("--nu", default="+1")
    c.add_argument("--sign", help="sign of the non-twist curve (+ for C+, - for C-)")
    c.add_argument("--index", type=int, help="i in {1, 2} for the L2 families")
    c.add_argument("--phi", help="rotation angle for Lphi, or an angle range for B1zero")
    c.add_argument("--m2", help="M2 samples start:end:count")
    c.add_argument("--m1", help="M1 value(s) for root solving (nontwist, Lphi)")
    c.add_argument("--d", type=float)
    c.add_argument("--mu2", help="mu2 samples for H0")
    c.add_argument("--model", help="model JSON for a pullback to the (mu1, mu2) plane")
    c.add_argument("--k", type=int)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_curves)

    s = sub.add_parser("scan", help="brute-force bifurcation scan along one parameter")
    s.add_argument("--nu", default="+1")
    s.add_argument("--vary", choices=("m1", "m2"), default="m1")
    s.add_argument("--m1", type=float)
    s.add_argument("--m2", type=float)
    s.add_argument("--period", type=int, default=1)
    s.add_argument("--range", required=True, help="start:end:steps")
    s.add_argument("--symmetric", action="store_true")
    s.add_argument("--box", type=float, default=3.0, help="half-width of the orbit search window")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_scan)

    r = sub.add_parser("rescale", help="convergence of rescaled first return maps")
    r.add_argument("--model", required=True)
    r.add_argument("--k", required=True, help="k values start:end:count")
    r.add_argument("--target-m1", dest="target_m1", type=float)
    r.add_argument("--target-m2", dest="target_m2", type=float)
    r.add_argument("--box", type=float, default=2.0)
    r.add_argument("--grid", type=int, default=21)
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_rescale)

    z = sub.add_parser("resonance", help="1:4 resonance coefficients and flow normal forms")
    z.add_argument("--nu", default="+1")
    z.add_argument("--m2", type=float)
    z.add_argument("--flow", choices=("eq11", "eq12"))
    z.add_argument("--beta", type=float, default=0.0)
    z.add_argument("--mu", type=float, default=0.0)
    z.add_argument("--b1", type=float, default=0.0)
    z.add_argument("--b2", type=float, default=0.0)
    z.add_argument("--c-hat", dest="c_hat", type=float, default=0.0)
    z.add_argument("--radius", type=float, default=1.5)
    z.add_argument("-o", "--output")
    z.set_defaults(func=cmd_resonance)

    q = sub.add_parser("portrait", help="phase portrait samples as CSV/SVG")
    q.add_argument("--nu", default="+1")
    q.add_argument("--m1", type=float, required=True)
    q.add_argument("--m2", type=float, required=True)
    q.add_argument("--seeds")
    q.add_argument("--xgrid")
    q.add_argument("--ygrid")
    q.add_argument("--iterations", type=int, default=pt.DEFAULT_ITERATIONS)
    q.add_argument("--escape", type=float, default=pt.DEFAULT_ESCAPE_RADIUS)
    q.add_argument("--csv")
    q.add_argument("--svg")
    q.set_defaults(func=cmd_portrait)
    return p


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Let ``--m2 -3:0:50`` and ``--sign -`` through argparse by gluing them as ``--m2=-3:0:50``."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv):
            nxt = argv[i + 1]
            if nxt == "-" or _NEGATIVE_VALUE.match(nxt):
                out.append(f"{tok}={nxt}")
                i += 2
                continue
        out.append(tok)
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, rm.DomainError, bc.PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
