"""Command-line front end.

Exit codes: 0 success, 1 failed verification or other geometric error,
2 malformed input, 3 incompatible bundle data, 4 non-projective fan.
Files named on the command line are looked up in the working directory
first and then among the bundled fixtures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

from .convex_chain import ConvexChain, box_points, evaluate, invert_indicator, lattice_sum, star_product
from .ehrhart import ehrhart_count, ehrhart_polynomial
from .lattice_core import GeometryError, NotProjectiveError
from .serialize import (
    FormatError,
    bundle_from_json,
    chain_from_json,
    load_json,
    polytope_from_json,
    rational_out,
    to_json,
)
from .toric_bundle import (
    IncompatibleError,
    cech_euler_oracle,
    characters,
    check_compatibility,
    equivariant_euler,
    euler_characteristic,
)

VALUE_FLAGS = ("--weight", "--box", "--t")


class UsageError(Exception):
    pass


def _resolve(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    fixture = resources.files("toric_chains") / "data" / name
    if fixture.is_file():
        return Path(str(fixture))
    raise FormatError("file not found", name)


def _vector(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be comma-separated integers, got {text!r}") from None


def _box(text: str, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if ":" not in text:
        raise UsageError(f"--box must look like lo:hi, got {text!r}")
    lo, hi = (_vector(s, "--box") for s in text.split(":", 1))
    if len(lo) != n or len(hi) != n:
        raise UsageError(f"--box corners need {n} coordinates")
    if any(a > b for a, b in zip(lo, hi)):
        raise UsageError("--box lower corner exceeds upper corner")
    return lo, hi


def _weight(text: str, n: int) -> tuple[int, ...]:
    w = _vector(text, "--weight")
    if len(w) != n:
        raise UsageError(f"--weight needs {n} coordinates")
    return w


def _load_bundle(name: str):
    b = bundle_from_json(load_json(_resolve(name)))
    check_compatibility(b)
    return b


def _load_chain(name: str) -> ConvexChain:
    return chain_from_json(load_json(_resolve(name)))


def _load_polytope(name: str):
    return polytope_from_json(load_json(_resolve(name)))


def _write_atomic(path: str, text: str):
    """Write via a temporary file in the target directory, renamed only on success."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=".tmp-", suffix=target.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Report:
    def __init__(self, args):
        self.json = args.json
        self.out = args.out

    def emit(self, text: str, payload):
        if self.json:
            print(json.dumps(payload, sort_keys=True))
        else:
            print(text)

    def emit_object(self, obj, summary: str):
        """Objects go to ``--out`` when given, else to stdout as JSON."""
        body = json.dumps(to_json(obj), sort_keys=True)
        if self.out:
            _write_atomic(self.out, body + "\n")
            self.emit(summary, {"written": self.out})
        else:
            print(body)


# ----------------------------------------------------------------------------
# commands


def cmd_ehrhart(args, rep: Report):
    p = _load_polytope(_need(args.polytope, "--polytope"))
    if args.t is None:
        poly = ehrhart_polynomial(p)
        rep.emit(" ".join(str(c) for c in poly.coeffs), to_json(poly))
        return 0
    t = int(args.t)
    value = ehrhart_count(p, t) if t >= 1 else ehrhart_polynomial(p)(t)
    rep.emit(str(value), {"t": t, "count": value})
    return 0


def cmd_chain(args, rep: Report):
    op = args.op
    if op == "invert":
        if args.polytope:
            p = _load_polytope(args.polytope)
        else:
            a = _load_chain(_need(args.chain and args.chain[0], "--chain or --polytope"))
            if len(a.terms) != 1 or a.terms[0][0] != 1:
                raise UsageError("chain invert expects a single polytope indicator")
            p = a.terms[0][1]
        rep.emit_object(invert_indicator(p), "inverse written")
        return 0
    chains = [_load_chain(c) for c in (args.chain or [])]
    if not chains:
        raise UsageError(f"chain {op} needs --chain")
    if op == "eval":
        u = _weight(_need(args.weight, "--weight"), chains[0].n)
        v = evaluate(chains[0], u)
        rep.emit(str(v), {"weight": list(u), "value": v})
    elif op == "sum":
        s = lattice_sum(chains[0])
        rep.emit(str(s), {"sum": s})
    elif op == "star":
        if len(chains) != 2:
            raise UsageError("chain star needs exactly two --chain arguments")
        rep.emit_object(star_product(chains[0], chains[1]), "product written")
    return 0


def cmd_bundle(args, rep: Report):
    b = _load_bundle(_need(args.bundle, "--bundle"))
    if args.op == "chi":
        if args.weight:
            u = _weight(args.weight, b.fan.n)
            v = equivariant_euler(b, u)
            rep.emit(str(v), {"weight": list(u), "chi": v})
        else:
            v = euler_characteristic(b)
            rep.emit(str(v), {"chi": v})
    elif args.op == "chain":
        rep.emit_object(b.chain, "chain written")
    elif args.op == "characters":
        rows = []
        for k, cone in enumerate(b.fan.max_cones):
            rows.append({"cone": list(cone), "characters": [list(map(rational_out, u)) for u in characters(b, k)]})
        text = "\n".join(f"{r['cone']}: {' '.join('(' + ','.join(map(str, u)) + ')' for u in r['characters'])}"
                         for r in rows)
        rep.emit(text, {"characters": rows})
    return 0


def _default_box(chain: ConvexChain, n: int, margin: int = 2):
    bb = chain.bounding_box()
    if bb is None:
        return (-margin,) * n, (margin,) * n
    return tuple(x - margin for x in bb[0]), tuple(x + margin for x in bb[1])


def cmd_verify(args, rep: Report):
    b = _load_bundle(_need(args.bundle, "--bundle"))
    n = b.fan.n
    lo, hi = _box(args.box, n) if args.box else _default_box(b.chain, n)
    bad = []
    count = 0
    for u in box_points(lo, hi):
        count += 1
        a, c = equivariant_euler(b, u), cech_euler_oracle(b, u)
        if a != c:
            bad.append((u, a, c))
    if not bad:
        rep.emit(f"OK: chain == cech on {count} weights", {"ok": True, "weights": count})
        return 0
    u, a, c = bad[0]
    rep.emit(f"FAIL: chain != cech at {len(bad)} of {count} weights, first {u}: {a} vs {c}",
             {"ok": False, "weights": count, "mismatches": [[list(u), a, c] for u, a, c in bad]})
    return 1


def cmd_plot(args, rep: Report):
    if args.bundle:
        chain = _load_bundle(args.bundle).chain
    else:
        chain = _load_chain(_need(args.chain and args.chain[0], "--bundle or --chain"))
    if chain.n != 2:
        raise UsageError(f"plot supports rank-2 lattices only (got rank {chain.n})")
    out = _need(args.out, "--out")
    lo, hi = _box(args.box, 2) if args.box else _default_box(chain, 2, margin=1)
    values = {u: evaluate(chain, u) for u in box_points(lo, hi)}
    _write_atomic(out, render_svg(values, lo, hi))
    shown = sum(1 for v in values.values() if v)
    rep.emit(f"wrote {out} ({shown} nonzero points)", {"written": out, "nonzero": shown})
    return 0


def _need(value, flag: str):
    if not value:
        raise UsageError(f"missing {flag}")
    return value


# ----------------------------------------------------------------------------
# svg


def _fmt(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _star(cx: float, cy: float, r: float) -> str:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else r * 0.45
        ang = math.pi / 2 + k * math.pi / 5
        pts.append(f"{_fmt(cx + rad * math.cos(ang))},{_fmt(cy - rad * math.sin(ang))}")
    return " ".join(pts)


def render_svg(values: dict, lo, hi, cell: int = 40) -> str:
    """Scatter of chain values: zeros omitted, +-1 dots with a sign, larger values as labelled stars."""
    pad = cell
    w = (hi[0] - lo[0]) * cell + 2 * pad
    h = (hi[1] - lo[1]) * cell + 2 * pad

    def xy(u):
        return pad + (u[0] - lo[0]) * cell, pad + (hi[1] - u[1]) * cell

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    if lo[0] <= 0 <= hi[0]:
        x, _ = xy((0, 0))
        lines.append(f'<line x1="{x}" y1="{pad}" x2="{x}" y2="{h - pad}" stroke="#999" stroke-width="1"/>')
    if lo[1] <= 0 <= hi[1]:
        _, y = xy((0, 0))
        lines.append(f'<line x1="{pad}" y1="{y}" x2="{w - pad}" y2="{y}" stroke="#999" stroke-width="1"/>')
    for u in sorted(values):
        v = values[u]
        if v == 0:
            continue
        x, y = xy(u)
        color = "black" if v > 0 else "#c00"
        if abs(v) == 1:
            sign = "+" if v > 0 else "-"
            lines.append(f'<circle cx="{x}" cy="{y}" r="4" fill="{color}"/>')
            lines.append(f'<text x="{x + 6}" y="{y - 6}" font-size="11" fill="{color}">{sign}</text>')
        else:
            lines.append(f'<polygon points="{_star(x, y, 9)}" fill="{color}"/>')
            lines.append(f'<text x="{x + 10}" y="{y - 8}" font-size="11" fill="{color}">{v}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bundle")
    common.add_argument("--polytope")
    common.add_argument("--chain", action="append")
    common.add_argument("--weight")
    common.add_argument("--box")
    common.add_argument("--t", type=int)
    common.add_argument("--out")
    common.add_argument("--json", action="store_true")

    parser = argparse.ArgumentParser(prog="toric-chains", description="Convex chains and toric vector bundles.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ehrhart", parents=[common], help="lattice point counts and Ehrhart polynomials")
    c = sub.add_parser("chain", parents=[common], help="convex chain operations")
    c.add_argument("op", choices=["eval", "sum", "star", "invert"])
    b = sub.add_parser("bundle", parents=[common], help="toric bundle computations")
    b.add_argument("op", choices=["chi", "chain", "characters"])
    sub.add_parser("verify", parents=[common], help="compare the chain with the Cech oracle on a box")
    sub.add_parser("plot", parents=[common], help="write an SVG scatter of chain values")
    return parser


def _join_values(argv: list[str]) -> list[str]:
    """Glue ``--box -10,-10:10,10`` into ``--box=...`` so negative values are not read as flags."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


COMMANDS = {"ehrhart": cmd_ehrhart, "chain": cmd_chain, "bundle": cmd_bundle, "verify": cmd_verify, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(_join_values(list(sys.argv[1:] if argv is None else argv)))
    rep = Report(args)
    try:
        return COMMANDS[args.command](args, rep)
    except FormatError as e:
        print(f"error: malformed input at {e}", file=sys.stderr)
        return 2
    except IncompatibleError as e:
        print(f"error: incompatible bundle: {e} (ray {e.ray}, threshold {e.threshold})", file=sys.stderr)
        return 3
    except NotProjectiveError as e:
        print(f"error: non-projective fan: {e}", file=sys.stderr)
        return 4
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except GeometryError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
