"""Convex chains: integer combinations of polytope indicator functions.

Chains form a ring under pointwise addition and the star product
``1_A * 1_B = 1_{A + B}`` (Minkowski sum), with unit ``1_{{0}}``. The term
representation is not canonical, so chains are compared by evaluation.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from math import ceil, floor
from typing import Iterable, Sequence

from .lattice_core import (
    Cone,
    GeometryError,
    Polytope,
    count_lattice_points,
    dual_cone,
    faces,
    minkowski_sum,
)
from .linalg import frac, sub
from .piecewise_linear import PLFunction, convex_split, polytope_of


class ConvexChain:
    """``sum coeff * 1_P`` over nonempty polytopes, zero coefficients dropped, equal polytopes merged."""

    def __init__(self, terms: Iterable[tuple[int, Polytope]], n: int):
        merged: dict[Polytope, int] = {}
        for c, p in terms:
            if p.n != n:
                raise GeometryError(f"rank mismatch: {p.n} vs {n}")
            if c == 0 or p.is_empty:
                continue
            merged[p] = merged.get(p, 0) + int(c)
        self.n = n
        self.terms = tuple((c, p) for p, c in merged.items() if c != 0)

    @classmethod
    def indicator(cls, p: Polytope) -> "ConvexChain":
        return cls([(1, p)], p.n)

    @classmethod
    def zero(cls, n: int) -> "ConvexChain":
        return cls([], n)

    @classmethod
    def unit(cls, n: int) -> "ConvexChain":
        return cls.indicator(Polytope([(0,) * n]))

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def _check(self, other: "ConvexChain"):
        if self.n != other.n:
            raise GeometryError(f"rank mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "ConvexChain") -> "ConvexChain":
        return add(self, other)

    def __neg__(self) -> "ConvexChain":
        return scale(-1, self)

    def __sub__(self, other: "ConvexChain") -> "ConvexChain":
        return add(self, scale(-1, other))

    def __rmul__(self, k: int) -> "ConvexChain":
        return scale(k, self)

    def __mul__(self, other: "ConvexChain") -> "ConvexChain":
        return star_product(self, other)

    def __len__(self):
        return len(self.terms)

    def bounding_box(self) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """Integral box containing the support, or None for the zero chain."""
        if not self.terms:
            return None
        lo = [min(floor(frac(v[i])) for _, p in self.terms for v in p.vertices) for i in range(self.n)]
        hi = [max(ceil(frac(v[i])) for _, p in self.terms for v in p.vertices) for i in range(self.n)]
        return tuple(lo), tuple(hi)

    def __repr__(self):
        return "ConvexChain(" + " + ".join(f"{c}*1{p!r}" for c, p in self.terms) + ")"


def evaluate(a: ConvexChain, x) -> int:
    """``sum coeff * [x in P]`` by exact facet tests."""
    if len(x) != a.n:
        raise GeometryError("rank mismatch")
    return sum(c for c, p in a.terms if p.contains(x))


def add(a: ConvexChain, b: ConvexChain) -> ConvexChain:
    a._check(b)
    return ConvexChain(a.terms + b.terms, a.n)


def scale(k: int, a: ConvexChain) -> ConvexChain:
    return ConvexChain([(k * c, p) for c, p in a.terms], a.n)


def star_product(a: ConvexChain, b: ConvexChain) -> ConvexChain:
    """Bilinear extension of ``1_P * 1_Q = 1_{P + Q}``."""
    a._check(b)
    return ConvexChain(
        [(c * d, minkowski_sum(p, q)) for c, p in a.terms for d, q in b.terms], a.n)


def degree(a: ConvexChain) -> int:
    return sum(c for c, _ in a.terms)


def interior_chain(p: Polytope) -> ConvexChain:
    """``sum_{faces F} (-1)^{dim F} 1_F``, pointwise ``(-1)^{dim p}`` times the relative-interior indicator."""
    if p.is_empty:
        raise GeometryError("empty polytope")
    return ConvexChain([((-1) ** d, f) for f, d in faces(p)], p.n)


def invert_indicator(p: Polytope) -> ConvexChain:
    """Inverse of ``1_p`` under the star product: the face chain of the reflected polytope."""
    if p.is_empty:
        raise GeometryError("the empty polytope has no inverse")
    return interior_chain(p.symmetric())


def virtual_polytope_chain(p: Polytope, q: Polytope) -> ConvexChain:
    """Chain of the virtual polytope ``p - q``: ``1_p * (1_q)^{-1}``."""
    return star_product(ConvexChain.indicator(p), invert_indicator(q))


def lattice_sum(a: ConvexChain) -> int:
    """``sum_{u in M} a(u)``, computed termwise as ``sum coeff * |P cap M|``."""
    return sum(c * count_lattice_points(p) for c, p in a.terms)


def box_points(lo: Sequence[int], hi: Sequence[int]) -> Iterable[tuple[int, ...]]:
    return itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi)))


def box_sum(a: ConvexChain) -> int:
    """``sum_{u in box} a(u)`` over the bounding box; equal to :func:`lattice_sum`."""
    box = a.bounding_box()
    if box is None:
        return 0
    return sum(evaluate(a, u) for u in box_points(*box))


def sample_points(chains: Sequence["ConvexChain"], margin: int = 1) -> list[tuple]:
    """Lattice and half-integer points covering the dilated joint bounding box."""
    boxes = [c.bounding_box() for c in chains if c.terms]
    n = chains[0].n
    if not boxes:
        return [(0,) * n]
    lo = [min(b[0][i] for b in boxes) - margin for i in range(n)]
    hi = [max(b[1][i] for b in boxes) + margin for i in range(n)]
    from fractions import Fraction
    half = [[Fraction(k, 2) for k in range(2 * l, 2 * h + 1)] for l, h in zip(lo, hi)]
    return [tuple(int(c) if c.denominator == 1 else c for c in x) for x in itertools.product(*half)]


def chains_equal(a: ConvexChain, b: ConvexChain, points: Iterable | None = None) -> bool:
    """Extensional equality on a finite sample (default: :func:`sample_points`)."""
    a._check(b)
    if points is None:
        points = sample_points([a, b])
    return all(evaluate(a, x) == evaluate(b, x) for x in points)


# ----------------------------------------------------------------------------
# cone chains


class ConeChain:
    """``sum coeff * 1_{apex + cone}``; evaluation only (supports are unbounded)."""

    def __init__(self, terms: Iterable[tuple[int, tuple, Cone]], n: int):
        self.n = n
        self.terms = tuple((int(c), tuple(apex), cone) for c, apex, cone in terms if c)

    def __call__(self, x) -> int:
        return evaluate_cones(self, x)

    def __repr__(self):
        return f"ConeChain({len(self.terms)} terms)"


def evaluate_cones(a: ConeChain, x) -> int:
    return sum(c for c, apex, cone in a.terms if cone.contains(sub(x, apex)))


def brianchon_gram(h: PLFunction) -> ConeChain:
    """``sum_{sigma} (-1)^{codim sigma} 1_{u_sigma - sigma^dual}`` over every cone of the fan.

    ``u_sigma`` is the slope of any maximal cone containing ``sigma``; the
    translate is well defined because ``-sigma^dual`` contains ``sigma^perp``.
    For a genuine polytope's support function this is pointwise ``1_P``.
    """
    f = h.fan
    if not f.is_complete:
        raise GeometryError("Brianchon-Gram decomposition needs a complete fan")
    terms = []
    for tau in f.cones:
        k = next(k for k, c in enumerate(f.max_cones) if tau <= set(c))
        cone = -dual_cone(f.cone(tuple(sorted(tau))))
        terms.append(((-1) ** (f.n - f.cone_dim(tau)), h.slopes[k], cone))
    return ConeChain(terms, f.n)


def pl_chain(h: PLFunction) -> ConvexChain:
    """Chain of the virtual polytope with support function ``h`` via the canonical convex split."""
    plus, minus = convex_split(h)
    return virtual_polytope_chain(polytope_of(plus), polytope_of(minus))
