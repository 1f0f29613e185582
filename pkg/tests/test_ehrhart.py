from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toric_chains.ehrhart import (
    EhrhartPolynomial,
    divisor_ehrhart_check,
    ehrhart_count,
    ehrhart_polynomial,
    line_bundle_euler,
    reciprocity_interior_count,
    serre_duality_check,
)
from toric_chains.lattice_core import (
    GeometryError,
    Polytope,
    cube,
    fan_hirzebruch,
    fan_projective_plane,
    interior_lattice_points,
    point,
    simplex,
)
from toric_chains.piecewise_linear import divisor_function, is_strictly_convex

coords = st.integers(-3, 3)
polys = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.tuples(*[coords] * n), min_size=1, max_size=6)).map(Polytope)


def test_count_examples():
    assert ehrhart_count(simplex(2), 2) == 6
    assert ehrhart_count(simplex(3), 3) == 20
    assert ehrhart_count(cube(2), 5) == 36
    with pytest.raises(GeometryError):
        ehrhart_count(simplex(2), 0)
    with pytest.raises(GeometryError):
        ehrhart_count(Polytope([(0, 0), (Fraction(1, 2), 0)]), 1)


def test_polynomial_examples():
    assert ehrhart_polynomial(simplex(2)).coeffs == (1, Fraction(3, 2), Fraction(1, 2))
    assert ehrhart_polynomial(point((4, -1))).coeffs == (1,)
    assert ehrhart_polynomial(Polytope([(0,), (3,)])).coeffs == (1, 3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_simplex_binomial(n):
    poly = ehrhart_polynomial(simplex(n))
    for t in range(1, 7):
        assert ehrhart_count(simplex(n), t) == comb(t + n, n) == poly(t)


def test_reciprocity_examples():
    assert reciprocity_interior_count(simplex(2), 3) == 1
    assert reciprocity_interior_count(cube(2), 1) == 0
    big = simplex(2).dilate(2)
    assert reciprocity_interior_count(big, 1) == 0 == ehrhart_polynomial(big)(-1)


@settings(max_examples=40, deadline=None)
@given(polys)
def test_polynomial_invariants(p):
    poly = ehrhart_polynomial(p)
    assert poly.degree == p.dim
    assert poly.coeffs[0] == 1 and poly.coeffs[-1] > 0
    for t in range(-3, 4):
        assert Fraction(poly(t)).denominator == 1


@settings(max_examples=40, deadline=None)
@given(polys)
def test_finite_differences_vanish(p):
    d = p.dim
    vals = [ehrhart_count(p, t) for t in range(1, d + 4)]
    for _ in range(d + 1):
        vals = [b - a for a, b in zip(vals, vals[1:])]
    assert all(v == 0 for v in vals)


@settings(max_examples=30, deadline=None)
@given(polys, st.integers(1, 3))
def test_reciprocity_against_scan(p, t):
    assert reciprocity_interior_count(p, t) == len(interior_lattice_points(p.dilate(t)))


def test_serre_examples():
    f = fan_projective_plane()
    assert serre_duality_check(f, [3, 0, 0])
    assert serre_duality_check(f, [0, 0, 0])
    assert serre_duality_check(fan_hirzebruch(), {0: 1, 2: -2})


def test_serre_rejects_singular_fan():
    from toric_chains.lattice_core import Fan
    f = Fan([(1, 0), (1, 2), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    assert f.is_complete and not f.is_smooth
    with pytest.raises(GeometryError):
        serre_duality_check(f, [0, 0, 0])


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_serre_random_hirzebruch(a):
    assert serre_duality_check(fan_hirzebruch(), a)


def test_line_bundle_euler_of_p2():
    f = fan_projective_plane()
    for t in range(0, 6):
        assert line_bundle_euler(f, [t, 0, 0]) == comb(t + 2, 2)
    # O(-1), O(-2) have no cohomology at all; O(-3) = K has chi = 1
    assert line_bundle_euler(f, [-1, 0, 0]) == 0
    assert line_bundle_euler(f, [-2, 0, 0]) == 0
    assert line_bundle_euler(f, [-3, 0, 0]) == 1


def test_divisor_ehrhart_on_ample():
    for f, a in [(fan_projective_plane(), [1, 0, 0]), (fan_projective_plane(), [1, 1, 1]),
                 (fan_hirzebruch(), [1, 1, 1, 1]), (fan_hirzebruch(), [0, 1, 2, 1])]:
        assert is_strictly_convex(divisor_function(f, a))
        assert divisor_ehrhart_check(f, a, 5)


def test_polynomial_repr_and_eq():
    assert EhrhartPolynomial([1, 2, 0]) == EhrhartPolynomial([1, 2])
    assert EhrhartPolynomial([1, 3])(-2) == -5
