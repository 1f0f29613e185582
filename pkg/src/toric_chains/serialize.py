"""JSON encoding of the package's objects. Rationals are written as ``"p/q"`` strings."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .convex_chain import ConeChain, ConvexChain
from .ehrhart import EhrhartPolynomial
from .lattice_core import Cone, Fan, GeometryError, Polytope
from .linalg import frac
from .piecewise_linear import MultiSupportFunction, PLFunction
from .toric_bundle import Filtration, KlyachkoBundle, Subspace


class FormatError(ValueError):
    """Malformed input; ``location`` is a JSON path or ``line:col``."""

    def __init__(self, message: str, location: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def rational_out(x):
    x = frac(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _vec_out(v):
    return [rational_out(x) for x in v]


def _rational_in(x, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise FormatError(f"expected an integer or 'p/q' string, got {x!r}", where)
    try:
        return frac(x)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational number: {x!r}", where) from None


def _int_in(x, where: str) -> int:
    q = _rational_in(x, where)
    if q.denominator != 1:
        raise FormatError(f"expected an integer, got {x!r}", where)
    return q.numerator


def _vec_in(v, where: str, integral: bool = False, n: int | None = None) -> tuple:
    if not isinstance(v, list):
        raise FormatError("expected a list of coordinates", where)
    if n is not None and len(v) != n:
        raise FormatError(f"expected {n} coordinates, got {len(v)}", where)
    conv = _int_in if integral else _rational_in
    out = tuple(conv(x, f"{where}[{i}]") for i, x in enumerate(v))
    return tuple(x.numerator if isinstance(x, Fraction) and x.denominator == 1 else x for x in out)


def _get(d, key: str, where: str):
    if not isinstance(d, dict):
        raise FormatError("expected an object", where)
    if key not in d:
        raise FormatError(f"missing key {key!r}", where)
    return d[key]


def _list(v, where: str) -> list:
    if not isinstance(v, list):
        raise FormatError("expected a list", where)
    return v


# ----------------------------------------------------------------------------
# encoders


def to_json(obj) -> Any:
    if isinstance(obj, Polytope):
        return {"n": obj.n, "vertices": [_vec_out(v) for v in obj.vertices]}
    if isinstance(obj, Cone):
        return {"n": obj.n, "rays": [list(r) for r in obj.rays], "lineality": [list(r) for r in obj.lineality]}
    if isinstance(obj, Fan):
        return {"rank": obj.n, "rays": [list(r) for r in obj.rays], "max_cones": [list(c) for c in obj.max_cones]}
    if isinstance(obj, PLFunction):
        return {"fan": to_json(obj.fan), "slopes": {str(k): _vec_out(s) for k, s in enumerate(obj.slopes)}}
    if isinstance(obj, MultiSupportFunction):
        return {"fan": to_json(obj.fan),
                "branches": {str(k): [_vec_out(u) for u in b] for k, b in enumerate(obj.branches)}}
    if isinstance(obj, ConvexChain):
        return {"n": obj.n, "terms": [{"coeff": c, "polytope": to_json(p)} for c, p in obj.terms]}
    if isinstance(obj, ConeChain):
        return {"n": obj.n, "terms": [{"coeff": c, "apex": _vec_out(a), "cone": to_json(k)} for c, a, k in obj.terms]}
    if isinstance(obj, EhrhartPolynomial):
        return {"coeffs": [str(c) for c in obj.coeffs]}
    if isinstance(obj, KlyachkoBundle):
        return {
            "rank": obj.rank,
            "fan": to_json(obj.fan),
            "filtrations": {
                str(i): [{"threshold": t, "basis": [_vec_out(v) for v in s.basis]} for t, s in flt.steps]
                for i, flt in obj.filtrations.items()
            },
        }
    raise TypeError(f"no JSON encoding for {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_json(obj), sort_keys=True)


# ----------------------------------------------------------------------------
# decoders


def polytope_from_json(d, where: str = "$") -> Polytope:
    verts = _list(_get(d, "vertices", where), f"{where}.vertices")
    n = d.get("n")
    if n is None:
        if not verts:
            raise FormatError("empty vertex list needs an explicit 'n'", where)
        n = len(verts[0]) if isinstance(verts[0], list) else None
    n = _int_in(n, f"{where}.n")
    pts = [_vec_in(v, f"{where}.vertices[{i}]", n=n) for i, v in enumerate(verts)]
    return Polytope(pts, n)


def cone_from_json(d, where: str = "$") -> Cone:
    rays = _list(_get(d, "rays", where), f"{where}.rays")
    lin = _list(d.get("lineality", []), f"{where}.lineality")
    n = d.get("n")
    if n is None:
        first = (rays + lin)
        if not first:
            raise FormatError("cone without generators needs an explicit 'n'", where)
        n = len(first[0]) if isinstance(first[0], list) else None
    n = _int_in(n, f"{where}.n")
    gens = [_vec_in(v, f"{where}.rays[{i}]", integral=True, n=n) for i, v in enumerate(rays)]
    ls = [_vec_in(v, f"{where}.lineality[{i}]", integral=True, n=n) for i, v in enumerate(lin)]
    return Cone.from_generators(gens, ls, n)


def fan_from_json(d, where: str = "$") -> Fan:
    n = _int_in(_get(d, "rank", where), f"{where}.rank")
    rays = [_vec_in(v, f"{where}.rays[{i}]", integral=True, n=n)
            for i, v in enumerate(_list(_get(d, "rays", where), f"{where}.rays"))]
    cones = []
    for k, c in enumerate(_list(_get(d, "max_cones", where), f"{where}.max_cones")):
        idx = [_int_in(x, f"{where}.max_cones[{k}][{j}]") for j, x in enumerate(_list(c, f"{where}.max_cones[{k}]"))]
        for j, i in enumerate(idx):
            if not 0 <= i < len(rays):
                raise FormatError(f"ray index {i} out of range", f"{where}.max_cones[{k}][{j}]")
        cones.append(idx)
    try:
        return Fan(rays, cones)
    except GeometryError as e:
        raise FormatError(str(e), where) from None


def _indexed(d, count: int, where: str) -> list:
    """Entries of a ``{"0": ..., "1": ...}`` object (or a plain list) in index order."""
    if isinstance(d, list):
        items = list(enumerate(d))
    elif isinstance(d, dict):
        items = []
        for k, v in d.items():
            try:
                items.append((int(k), v))
            except ValueError:
                raise FormatError(f"non-integer index {k!r}", where) from None
    else:
        raise FormatError("expected an object keyed by index", where)
    got = sorted(i for i, _ in items)
    if got != list(range(count)):
        raise FormatError(f"expected indices 0..{count - 1}, got {got}", where)
    return [v for _, v in sorted(items, key=lambda kv: kv[0])]


def plfunction_from_json(d, where: str = "$") -> PLFunction:
    fan = fan_from_json(_get(d, "fan", where), f"{where}.fan")
    raw = _indexed(_get(d, "slopes", where), len(fan.max_cones), f"{where}.slopes")
    slopes = [_vec_in(s, f"{where}.slopes.{k}", n=fan.n) for k, s in enumerate(raw)]
    try:
        return PLFunction(fan, slopes)
    except GeometryError as e:
        raise FormatError(str(e), f"{where}.slopes") from None


def multisupport_from_json(d, where: str = "$") -> MultiSupportFunction:
    fan = fan_from_json(_get(d, "fan", where), f"{where}.fan")
    raw = _indexed(_get(d, "branches", where), len(fan.max_cones), f"{where}.branches")
    branches = [[_vec_in(u, f"{where}.branches.{k}[{j}]", integral=True, n=fan.n)
                 for j, u in enumerate(_list(b, f"{where}.branches.{k}"))] for k, b in enumerate(raw)]
    try:
        return MultiSupportFunction(fan, branches)
    except GeometryError as e:
        raise FormatError(str(e), f"{where}.branches") from None


def chain_from_json(d, where: str = "$") -> ConvexChain:
    terms = _list(_get(d, "terms", where), f"{where}.terms")
    parsed = []
    for i, t in enumerate(terms):
        w = f"{where}.terms[{i}]"
        parsed.append((_int_in(_get(t, "coeff", w), f"{w}.coeff"), polytope_from_json(_get(t, "polytope", w), f"{w}.polytope")))
    n = d.get("n")
    if n is None:
        if not parsed:
            raise FormatError("empty chain needs an explicit 'n'", where)
        n = parsed[0][1].n
    n = _int_in(n, f"{where}.n")
    for i, (_, p) in enumerate(parsed):
        if p.n != n:
            raise FormatError(f"polytope lives in rank {p.n}, chain in rank {n}", f"{where}.terms[{i}]")
    return ConvexChain(parsed, n)


def cone_chain_from_json(d, where: str = "$") -> ConeChain:
    terms = _list(_get(d, "terms", where), f"{where}.terms")
    parsed = []
    for i, t in enumerate(terms):
        w = f"{where}.terms[{i}]"
        cone = cone_from_json(_get(t, "cone", w), f"{w}.cone")
        parsed.append((_int_in(_get(t, "coeff", w), f"{w}.coeff"),
                       _vec_in(_get(t, "apex", w), f"{w}.apex", n=cone.n), cone))
    n = _int_in(d.get("n", parsed[0][2].n if parsed else 0), f"{where}.n")
    return ConeChain(parsed, n)


def ehrhart_from_json(d, where: str = "$") -> EhrhartPolynomial:
    cs = _list(_get(d, "coeffs", where), f"{where}.coeffs")
    return EhrhartPolynomial([_rational_in(c, f"{where}.coeffs[{i}]") for i, c in enumerate(cs)])


def bundle_from_json(d, where: str = "$") -> KlyachkoBundle:
    """Decode a bundle. Compatibility is not checked here (it is lazy on the bundle)."""
    r = _int_in(_get(d, "rank", where), f"{where}.rank")
    if r < 1:
        raise FormatError("rank must be positive", f"{where}.rank")
    fan = fan_from_json(_get(d, "fan", where), f"{where}.fan")
    raw = _indexed(_get(d, "filtrations", where), len(fan.rays), f"{where}.filtrations")
    filts = {}
    for i, steps in enumerate(raw):
        w = f"{where}.filtrations.{i}"
        parsed = []
        for k, step in enumerate(_list(steps, w)):
            ws = f"{w}[{k}]"
            t = _int_in(_get(step, "threshold", ws), f"{ws}.threshold")
            basis = [_vec_in(v, f"{ws}.basis[{j}]", n=r) for j, v in enumerate(_list(_get(step, "basis", ws), f"{ws}.basis"))]
            parsed.append((t, Subspace(basis, r)))
        try:
            filts[i] = Filtration(parsed, r)
        except GeometryError as e:
            raise FormatError(str(e), w) from None
    try:
        return KlyachkoBundle(fan, r, filts)
    except GeometryError as e:
        raise FormatError(str(e), where) from None


def load_json(path: str | Path) -> Any:
    """Parse a JSON file, turning syntax errors into :class:`FormatError` with ``line:col``."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
