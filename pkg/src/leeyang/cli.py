"""Command-line front end: leeyang <subcommand> [flags].

Exit status is 0 on success, 1 on invalid input and 2 when a resource
budget (LEEYANG_MAX_MEM, enumeration caps) is exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np

from . import __version__
from .algebra import ResourceError, format_rational, to_mpc
from .asymptotics import correction_exponent, growth_rate, real_phase_transitions
from .critical import assumption_report, critical_points, discriminant_scan
from .graph_oracle import (SimpleGraphSpec, average_partition_check, partition_sum,
                           spin_sum_partition, subgraph_expansion_partition)
from .landscape import (ANTI_STOKES, STOKES, accumulation_report, build_branch_field,
                        extract_curves)
from .moment_engine import compute_an
from .potential import BUILTINS, Potential, PotentialError, load
from .rootfinder import find_roots

DEFAULT_WINDOW = (-2.0, 4.0, -3.0, 3.0)
PALETTE = ["#1b9e77", "#7570b3", "#d95f02", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --- argument parsing helpers ---------------------------------------------------

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"


def _exact(text: str) -> Fraction:
    # Fraction reads decimals by their literal digits, so "0.1" is exactly 1/10
    return Fraction(text)


def parse_complex(text: str) -> tuple[Fraction, Fraction]:
    """Parse "a", "bi", "a+bi" or "a-bi" with rational or decimal parts."""
    s = text.replace(" ", "").replace("j", "i")
    if not s:
        raise ValueError("empty complex number")
    m = re.fullmatch(rf"({_NUM})?(?:([+-])({_NUM})?i)?", s)
    if m and (m.group(1) or m.group(2)):
        re_part = _exact(m.group(1)) if m.group(1) else Fraction(0)
        if m.group(2):
            mag = _exact(m.group(3)) if m.group(3) else Fraction(1)
            return re_part, mag if m.group(2) == "+" else -mag
        return re_part, Fraction(0)
    m = re.fullmatch(rf"({_NUM})?i", s)
    if m:
        return Fraction(0), _exact(m.group(1)) if m.group(1) else Fraction(1)
    raise ValueError(f"cannot parse complex number {text!r}")


def _lam_arg(text: str):
    re_part, im_part = parse_complex(text)
    return re_part if im_part == 0 else (re_part, im_part)


def _lam_mp(lam, prec: int):
    return lam if isinstance(lam, Fraction) else to_mpc(lam, prec)


def parse_window(text: str) -> tuple[float, float, float, float]:
    parts = [float(_exact(x)) for x in text.split(",")]
    if len(parts) != 4:
        raise ValueError("window needs four numbers a_min,a_max,b_min,b_max")
    amin, amax, bmin, bmax = parts
    if not (amin < amax and bmin < bmax):
        raise ValueError("window must have a_min < a_max and b_min < b_max")
    return amin, amax, bmin, bmax


def parse_range(text: str) -> list[int]:
    """"20:100:10" (inclusive) or a comma list "10,20,30"."""
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        if step <= 0:
            raise ValueError("range step must be positive")
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",") if x]


def load_config(spec: str) -> Potential:
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTINS:
            raise PotentialError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTINS))}")
        return BUILTINS[name]()
    path = Path(spec)
    if not path.is_file():
        raise PotentialError(f"config file {spec} not found")
    return load(path)


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cx(z, digits: int = 30) -> list[str]:
    if not isinstance(z, mpmath.mpc):
        z = mpmath.mpc(z)
    return [mpmath.nstr(z.real, digits), mpmath.nstr(z.imag, digits)]


# --- SVG ----------------------------------------------------------------------

class Svg:
    """Minimal SVG writer in lambda-plane coordinates."""

    def __init__(self, window, width: int = 800):
        self.amin, self.amax, self.bmin, self.bmax = window
        self.width = width
        self.height = int(round(width * (self.bmax - self.bmin) / (self.amax - self.amin)))
        self.items: list[str] = []

    def xy(self, a, b) -> tuple[float, float]:
        x = (a - self.amin) / (self.amax - self.amin) * self.width
        y = (self.bmax - b) / (self.bmax - self.bmin) * self.height
        return x, y

    def polyline(self, pts, colour: str, width: float = 1.5, dash: bool = False) -> None:
        coords = " ".join("%.2f,%.2f" % self.xy(a, b) for a, b in pts)
        extra = ' stroke-dasharray="4 3"' if dash else ""
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{colour}" '
                          f'stroke-width="{width}"{extra}/>')

    def dot(self, a, b, colour: str = "black", r: float = 2.0) -> None:
        x, y = self.xy(a, b)
        self.items.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{colour}"/>')

    def cross(self, a, b, colour: str = "red", s: float = 5.0) -> None:
        x, y = self.xy(a, b)
        self.items.append(f'<path d="M{x - s:.2f},{y - s:.2f}L{x + s:.2f},{y + s:.2f}'
                          f'M{x - s:.2f},{y + s:.2f}L{x + s:.2f},{y - s:.2f}" '
                          f'stroke="{colour}" stroke-width="2"/>')

    def cells(self, mask: np.ndarray, colour: str, opacity: float = 0.25) -> None:
        """Fill grid cells (rows along b) as one path of row-run rectangles."""
        nb, na = mask.shape
        da = (self.amax - self.amin) / na
        db = (self.bmax - self.bmin) / nb
        parts = []
        for r in range(nb):
            row = mask[r]
            c = 0
            while c < na:
                if not row[c]:
                    c += 1
                    continue
                start = c
                while c < na and row[c]:
                    c += 1
                x0, y0 = self.xy(self.amin + start * da, self.bmin + (r + 1) * db)
                x1, y1 = self.xy(self.amin + c * da, self.bmin + r * db)
                parts.append(f"M{x0:.2f},{y0:.2f}H{x1:.2f}V{y1:.2f}H{x0:.2f}Z")
        if parts:
            self.items.append(f'<path d="{"".join(parts)}" fill="{colour}" '
                              f'fill-opacity="{opacity}" stroke="none"/>')

    def axes(self) -> None:
        if self.bmin <= 0 <= self.bmax:
            self.polyline([(self.amin, 0), (self.amax, 0)], "#bbbbbb", 0.7)
        if self.amin <= 0 <= self.amax:
            self.polyline([(0, self.bmin), (0, self.bmax)], "#bbbbbb", 0.7)

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">')
        return "\n".join([head, f"<!-- leeyang {__version__} -->",
                          '<rect width="100%" height="100%" fill="white"/>', *self.items, "</svg>"]) + "\n"


def _pair_colour(pair, pairs) -> str:
    return PALETTE[sorted(pairs).index(pair) % len(PALETTE)]


def _draw_curves(svg: Svg, cs) -> None:
    pairs = cs.pairs()
    for pl in cs.polylines:
        svg.polyline(pl.vertices, _pair_colour(pl.pair, pairs), 1.5 if pl.kind == ANTI_STOKES else 1.0,
                     dash=pl.kind == STOKES)


# --- subcommands ----------------------------------------------------------------

def cmd_an(args) -> int:
    p = load_config(args.config)
    an = compute_an(p, args.n)
    if args.format == "json":
        out = _dumps({"n": args.n, "degree": an.degree, "coefficients": an.to_json()})
    else:
        out = str(an) + "\n"
    _emit(out, args.out)
    return 0


def cmd_roots(args) -> int:
    p = load_config(args.config)
    an = compute_an(p, args.n)
    if an.degree < 1:
        raise ValueError(f"A_{args.n} = {an} has no roots")
    rs = find_roots(an, args.precision)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "residual"])
    for z, res in zip(rs.roots, rs.residuals):
        w.writerow([mpmath.nstr(z.real, args.digits), mpmath.nstr(z.imag, args.digits),
                    mpmath.nstr(res, 6)])
    _emit(buf.getvalue(), args.csv)
    if args.svg:
        zs = rs.as_complex()
        pad = 0.1 * max(1.0, max(abs(z) for z in zs))
        window = args.window or (min(z.real for z in zs) - pad, max(z.real for z in zs) + pad,
                                 min(z.imag for z in zs) - pad, max(z.imag for z in zs) + pad)
        svg = Svg(window)
        svg.axes()
        for z in zs:
            svg.dot(z.real, z.imag)
        Path(args.svg).write_text(svg.render())
    return 0


def cmd_crit(args) -> int:
    p = load_config(args.config)
    lam = _lam_arg(args.lam)
    lam_mp = _lam_mp(lam, args.precision)
    cs = critical_points(p, lam_mp, args.precision)
    out = {
        "lambda": args.lam,
        "precision": cs.precision,
        "count": len(cs),
        "count_with_multiplicity": cs.count_with_multiplicity(),
        "warnings": cs.warnings,
        "records": [r.to_json(args.digits) for r in cs.records],
    }
    if args.assumptions:
        rep = assumption_report(p, lam_mp, args.precision)
        out["assumptions"] = {"A1": rep.a1, "A2": rep.a2, "A3": rep.a3, "A4": rep.a4,
                              "divisor_count": rep.divisorCount, "crit_count": rep.critCount,
                              "euler_expected": rep.eulerExpected, "failed": rep.failed()}
    _emit(_dumps(out), args.out)
    return 0


def _field_and_curves(args, p, kind=None):
    f = build_branch_field(p, args.window, args.res)
    return f, extract_curves(f, kind)


def cmd_curves(args) -> int:
    p = load_config(args.config)
    kind = None if args.kind == "both" else args.kind
    f, cs = _field_and_curves(args, p, kind)
    out = cs.to_json()
    out["unresolved_nodes"] = int((~f.resolved).sum())
    out["classes"] = f.classes
    _emit(_dumps(out), args.json)
    if args.svg:
        svg = Svg(args.window)
        svg.axes()
        _draw_curves(svg, cs)
        Path(args.svg).write_text(svg.render())
    return 0


def cmd_accumulate(args) -> int:
    p = load_config(args.config)
    f, cs = _field_and_curves(args, p)
    anti, stokes = cs.select(kind=ANTI_STOKES), cs.select(kind=STOKES)
    rep = accumulation_report(p, args.n, anti, stokes, args.epsilon, field_=f)
    disc = discriminant_scan(p, args.window, prec=args.precision)
    out = rep.to_json()
    out["active_regions"] = rep.active_regions()
    out["discriminant"] = [{"lambda": _cx(d.lam, 20), "tags": d.tags} for d in disc]
    _emit(_dumps(out), args.json)
    if args.svg:
        svg = Svg(args.window)
        active = set(rep.active_regions())
        inactive = (rep.regions > 0) & ~np.isin(rep.regions, sorted(active))
        svg.cells(inactive, "#999999")
        svg.axes()
        _draw_curves(svg, cs)
        for z in rep.roots:
            svg.dot(z.real, z.imag)
        for d in disc:
            svg.cross(float(d.lam.real), float(d.lam.imag))
        Path(args.svg).write_text(svg.render())
    return 0


def cmd_asympt(args) -> int:
    p = load_config(args.config)
    lam = _lam_arg(args.lam)
    ns = parse_range(args.n_range)
    lam_eval = lam if isinstance(lam, Fraction) else _lam_mp(lam, args.precision)
    g = growth_rate(p, lam_eval, ns, args.precision)
    out = {"growth": g.to_json()}
    if isinstance(lam, Fraction) and len(ns) >= 3 and all(n > 0 for n in ns):
        out["correction"] = correction_exponent(p, lam, ns, args.precision).to_json()
    if args.transitions:
        lo, hi = (_exact(x) for x in args.transitions.split(","))
        out["transitions"] = [t.lam for t in real_phase_transitions(p, (lo, hi), prec=args.precision)]
    _emit(_dumps(out), args.json)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "r_n"])
        for n, r in zip(g.n, g.r):
            w.writerow([n, repr(r)])
        Path(args.csv).write_text(buf.getvalue())
    return 0


def cmd_oracle(args) -> int:
    lines = []
    ok = True
    if args.graph:
        text = args.graph if args.graph.lstrip().startswith(("[", "{")) else Path(args.graph).read_text()
        g = SimpleGraphSpec.from_json(json.loads(text))
        bj, bh = (_lam_mp(_lam_arg(x), args.precision) for x in (args.beta_j, args.beta_h))
        a = spin_sum_partition(g, bj, bh, args.precision)
        b = subgraph_expansion_partition(g, bj, bh, args.precision)
        rel = abs(a - b) / max(abs(a), mpmath.mpf(10) ** -300)
        passed = rel < 1e-12
        ok &= passed
        lines += [f"spin_sum = {mpmath.nstr(a, 20)}", f"subgraph_expansion = {mpmath.nstr(b, 20)}",
                  f"{'PASS' if passed else 'FAIL'} ising identity (relative error {mpmath.nstr(rel, 3)})"]
    if args.average:
        k, n, J, h = args.average.split(",")
        rep = average_partition_check(int(k), int(n), _exact(J), _exact(h))
        ok &= rep.passed
        lines += [f"graph_sum = {format_rational(rep.graph_sum)}",
                  f"engine = {format_rational(rep.engine_value)}",
                  f"{'PASS' if rep.passed else 'FAIL'} average partition function k={k} n={n}"]
    if args.config:
        p = load_config(args.config)
        a = compute_an(p, args.n)
        b = partition_sum(p, args.n)
        passed = a == b
        ok &= passed
        lines += [f"compute_an = {a}", f"partition_sum = {b}",
                  f"{'PASS' if passed else 'FAIL'} moment engine vs partition count n={args.n}"]
    if not lines:
        raise UsageError("oracle needs --config/--n, --graph or --average")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


def cmd_scan(args) -> int:
    p = load_config(args.config)
    pts = discriminant_scan(p, args.window, args.res, args.precision)
    out = [{"lambda": _cx(d.lam, args.digits), "tags": d.tags, "sources": d.sources} for d in pts]
    _emit(_dumps({"window": list(args.window), "points": out}), args.out)
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=128, help="working precision in bits (default 128)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker cap; results do not depend on it")
    common.add_argument("--seedless", action="store_true",
                        help="accepted for compatibility; nothing here uses an RNG")

    def config(sp, required=True):
        sp.add_argument("--config", required=required,
                        help="potential JSON file or builtin:NAME (ising1, ising2, monomial)")

    def window(sp):
        sp.add_argument("--window", type=parse_window, default=DEFAULT_WINDOW,
                        help="a_min,a_max,b_min,b_max (default -2,4,-3,3)")
        sp.add_argument("--res", type=int, default=400, help="grid nodes per axis (default 400)")

    ap = _Parser(prog="leeyang", description="Graph polynomials A_n, their zeros and the critical landscape.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("an", parents=[common], help="exact A_n(lambda)")
    config(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_an)

    sp = sub.add_parser("roots", parents=[common], help="certified roots of A_n",
                        description="CSV columns: re, im (root coordinates), residual (|A_n(root)| bound).")
    config(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--digits", type=int, default=20)
    sp.add_argument("--csv", help="CSV output path (default stdout)")
    sp.add_argument("--svg")
    sp.add_argument("--window", type=parse_window)
    sp.set_defaults(func=cmd_roots)

    sp = sub.add_parser("crit", parents=[common], help="critical points on the sphere (d=2)")
    config(sp)
    sp.add_argument("--lambda", dest="lam", required=True, help='complex number, e.g. "2" or "1/2+3i"')
    sp.add_argument("--digits", type=int, default=30)
    sp.add_argument("--assumptions", action="store_true", help="add the (A1)-(A4) report")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_crit)

    sp = sub.add_parser("curves", parents=[common], help="Stokes and anti-Stokes curves")
    config(sp)
    window(sp)
    sp.add_argument("--kind", choices=[ANTI_STOKES, STOKES, "both"], default="both")
    sp.add_argument("--json")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_curves)

    sp = sub.add_parser("accumulate", parents=[common], help="distances from zeros of A_n to anti-Stokes curves")
    config(sp)
    window(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--json")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_accumulate)

    sp = sub.add_parser("asympt", parents=[common], help="growth rate and correction exponent",
                        description="CSV columns: n, r_n = |I_n|^(1/(nK)).")
    config(sp)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--n-range", default="20:100:10", help='"start:stop:step" (inclusive) or "n1,n2,..."')
    sp.add_argument("--transitions", help="real interval lo,hi to scan for dominance changes")
    sp.add_argument("--json")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_asympt)

    sp = sub.add_parser("oracle", parents=[common], help="brute-force cross-checks")
    config(sp, required=False)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--graph", help="JSON edge list or object with vertices and edges, inline or as a file path")
    sp.add_argument("--beta-j", default="1/2")
    sp.add_argument("--beta-h", default="0")
    sp.add_argument("--average", help="k,n,J,h for the average partition function check")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("scan", parents=[common], help="discriminant points in a window")
    config(sp)
    window(sp)
    sp.set_defaults(res=200)
    sp.add_argument("--digits", type=int, default=20)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_scan)
    return ap


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    # argparse reads "-2,4,-3,3" as an option; glue such values to their flag
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--window", "--lambda", "--beta-j", "--beta-h", "--transitions"):
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be at least 1")
        if getattr(args, "precision", 128) < 53:
            raise UsageError("--precision must be at least 53 bits")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ResourceError as exc:
        print(f"leeyang: resource limit: {exc}", file=sys.stderr)
        return 2
    except (PotentialError, ValueError, ZeroDivisionError, OSError, json.JSONDecodeError) as exc:
        print(f"leeyang: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
