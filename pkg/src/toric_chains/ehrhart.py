"""Ehrhart counting, interpolation and reciprocity for lattice polytopes."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .lattice_core import (
    Fan,
    GeometryError,
    Polytope,
    count_lattice_points,
    interior_lattice_points,
    polytope_from_divisor,
)


class EhrhartPolynomial:
    """``L_P(t) = sum coeffs[k] t^k`` with exact rational coefficients."""

    def __init__(self, coeffs: Sequence):
        cs = [Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t) -> Fraction | int:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc.numerator if acc.denominator == 1 else acc

    def __eq__(self, other):
        return isinstance(other, EhrhartPolynomial) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"EhrhartPolynomial({[str(c) for c in self.coeffs]})"


def _require_lattice(p: Polytope):
    if p.is_empty:
        raise GeometryError("the empty polytope has no Ehrhart polynomial")
    if not p.is_lattice:
        raise GeometryError("Ehrhart counting expects a lattice polytope")


def ehrhart_count(p: Polytope, t: int) -> int:
    """``|tP cap M|`` for ``t >= 1``."""
    if int(t) != t or t < 1:
        raise GeometryError("ehrhart_count needs t >= 1; use the polynomial for other t")
    _require_lattice(p)
    return count_lattice_points(p.dilate(int(t)))


def _binomial_to_monomial(deltas: Sequence[int]) -> list[Fraction]:
    """Monomial coefficients of ``sum deltas[k] * binom(t, k)``."""
    out = [Fraction(0)] * len(deltas)
    basis = [Fraction(1)]  # coefficients of binom(t, k)
    for k, d in enumerate(deltas):
        for i, c in enumerate(basis):
            out[i] += d * c
        # binom(t, k+1) = binom(t, k) * (t - k) / (k + 1)
        nxt = [Fraction(0)] * (len(basis) + 1)
        for i, c in enumerate(basis):
            nxt[i + 1] += c / (k + 1)
            nxt[i] -= c * k / (k + 1)
        basis = nxt
    return out


def ehrhart_polynomial(p: Polytope) -> EhrhartPolynomial:
    """Interpolate ``L_P`` from ``L_P(0) = 1`` and the counts at ``t = 1..d``; check ``t = d+1, d+2``."""
    _require_lattice(p)
    d = p.dim
    values = [1] + [ehrhart_count(p, t) for t in range(1, d + 1)]
    diffs = []
    row = values
    while row:
        diffs.append(row[0])
        row = [b - a for a, b in zip(row, row[1:])]
    poly = EhrhartPolynomial(_binomial_to_monomial(diffs))
    for t in (d + 1, d + 2):
        if poly(t) != ehrhart_count(p, t):
            raise GeometryError(f"interpolated polynomial disagrees with the count at t={t}")
    return poly


def reciprocity_interior_count(p: Polytope, t: int) -> int:
    """``(-1)^d L_P(-t)``, cross-checked against a direct count of ``relint(tP) cap M``."""
    if int(t) != t or t < 1:
        raise GeometryError("reciprocity_interior_count needs t >= 1")
    poly = ehrhart_polynomial(p)
    predicted = (-1) ** p.dim * poly(-int(t))
    direct = len(interior_lattice_points(p.dilate(int(t))))
    if predicted != direct:
        raise GeometryError(f"reciprocity mismatch at t={t}: polynomial {predicted}, scan {direct}")
    return direct


def line_bundle_euler(f: Fan, a: Mapping[int, int] | Sequence[int]) -> int:
    """``chi(O(sum a_rho D_rho))`` as the lattice sum of the rank-one bundle chain."""
    from .toric_bundle import euler_characteristic, line_bundle

    return euler_characteristic(line_bundle(f, a))


def serre_duality_check(f: Fan, a: Mapping[int, int] | Sequence[int]) -> bool:
    """``chi(O(D + K)) == (-1)^n chi(O(-D))`` with ``K = -sum D_rho`` on a smooth complete fan."""
    if not f.is_complete:
        raise GeometryError("Serre duality check needs a complete fan")
    if not f.is_smooth:
        raise GeometryError("Serre duality check needs a smooth fan")
    if isinstance(a, Mapping):
        a = [int(a.get(i, 0)) for i in range(len(f.rays))]
    a = [int(x) for x in a]
    lhs = line_bundle_euler(f, [x - 1 for x in a])
    rhs = (-1) ** f.n * line_bundle_euler(f, [-x for x in a])
    return lhs == rhs


def divisor_ehrhart_check(f: Fan, a: Mapping[int, int] | Sequence[int], t_max: int = 5) -> bool:
    """``chi(O(tD)) == L_{P_D}(t)`` for ``t = 1..t_max`` (meaningful for ample ``D``)."""
    if isinstance(a, Mapping):
        a = [int(a.get(i, 0)) for i in range(len(f.rays))]
    p = polytope_from_divisor(f, a)
    poly = ehrhart_polynomial(p)
    return all(line_bundle_euler(f, [t * x for x in a]) == poly(t) for t in range(1, t_max + 1))
