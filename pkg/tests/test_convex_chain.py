import itertools
import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from toric_chains.convex_chain import (
    ConvexChain,
    box_sum,
    brianchon_gram,
    chains_equal,
    degree,
    evaluate,
    interior_chain,
    invert_indicator,
    lattice_sum,
    pl_chain,
    star_product,
    virtual_polytope_chain,
)
from toric_chains.ehrhart import ehrhart_polynomial
from toric_chains.lattice_core import Polytope, cube, fan_projective_plane, point, simplex
from toric_chains.piecewise_linear import (
    MultiSupportFunction,
    PLFunction,
    divisor_function,
    polytope_of,
    sorted_branches,
    support_function_on,
)
from toric_chains.lattice_core import normal_fan

from conftest import random_polytope, tangent_p2

P2_TANGENT = [[(-1, 0), (-1, 1)], [(1, -1), (0, -1)], [(1, 0), (0, 1)]]
FIG2 = {(0, 0): 2, (-1, 1): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1, (1, 0): 1, (1, -1): 1}

coords = st.integers(-3, 3)
polys2 = st.lists(st.tuples(coords, coords), min_size=1, max_size=5).map(Polytope)


def grid(n=2, r=4):
    return itertools.product(range(-r, r + 1), repeat=n)


def ind(p):
    return ConvexChain.indicator(p)


def tangent_pieces():
    h1, h2 = sorted_branches(MultiSupportFunction(fan_projective_plane(), P2_TANGENT))
    p2 = polytope_of(h2)
    ps = polytope_of(h1 + h2)
    return h1, ps, p2


def test_basic_evaluation():
    p = simplex(2)
    assert all(evaluate(ind(p), v) == 1 for v in p.vertices)
    assert all(evaluate(ind(p) - ind(p), x) == 0 for x in grid())
    assert all((ind(p) + ind(p))(x) == 2 * ind(p)(x) for x in grid())


def test_tangent_chain_composition():
    h1, ps, p2 = tangent_pieces()
    alpha1 = virtual_polytope_chain(ps, p2)
    alpha = alpha1 + ind(p2)
    for x in grid():
        assert alpha(x) == FIG2.get(x, 0)
        assert alpha1(x) == FIG2.get(x, 0) - ind(p2)(x)
        assert pl_chain(h1)(x) == alpha1(x)
    assert lattice_sum(alpha) == 8 == box_sum(alpha)


def test_star_product_examples():
    p = simplex(2)
    unit = ConvexChain.unit(2)
    a = ind(p) - 2 * ind(cube(2))
    assert chains_equal(a * unit, a)
    assert chains_equal(ind(p) * ind(p), ind(p.dilate(2)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), polys2), min_size=1, max_size=3),
       st.lists(st.tuples(st.integers(-2, 2), polys2), min_size=1, max_size=3))
def test_degree_multiplicative_and_additive(ta, tb):
    a, b = ConvexChain(ta, 2), ConvexChain(tb, 2)
    assert degree(star_product(a, b)) == degree(a) * degree(b)
    assert degree(a + b) == degree(a) + degree(b)


def test_invert_examples():
    assert chains_equal(invert_indicator(point((0, 0))), ConvexChain.unit(2))
    seg = Polytope([(0, 0), (1, 0)])
    inv = invert_indicator(seg)
    expected = ind(point((-1, 0))) + ind(point((0, 0))) - ind(Polytope([(-1, 0), (0, 0)]))
    assert chains_equal(inv, expected)
    prod = inv * ind(seg)
    for x in grid(2, 3):
        assert prod(x) == (1 if x == (0, 0) else 0)


@settings(max_examples=30, deadline=None)
@given(polys2)
def test_minkowski_inversion_2d(p):
    inv = invert_indicator(p)
    assert degree(inv) == 1
    prod = inv * ind(p)
    assert all(prod(x) == (x == (0, 0)) for x in grid(2, 6))
    assert chains_equal(virtual_polytope_chain(p, p), ConvexChain.unit(2), list(grid(2, 6)))


def test_interior_chain():
    assert chains_equal(interior_chain(point((1, 2))), ind(point((1, 2))))
    c = interior_chain(simplex(2))
    assert c((Fraction(1, 3), Fraction(1, 3))) == 1
    assert c((0, 0)) == 0 and c((Fraction(1, 2), 0)) == 0
    big = simplex(2).dilate(2)
    assert lattice_sum(interior_chain(big)) == 0 == ehrhart_polynomial(big)(-1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(coords, coords, coords), min_size=1, max_size=6).map(Polytope))
def test_interior_chain_is_signed_relint(p):
    c = interior_chain(p)
    sign = (-1) ** p.dim
    for x in itertools.product(range(-3, 4), repeat=3):
        assert c(x) == (sign if p.contains_relint(x) else 0)


def test_degree_examples():
    assert degree(ind(cube(3))) == 1
    assert degree(invert_indicator(cube(3))) == 1
    assert lattice_sum(ind(simplex(2))) == 3


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), polys2), min_size=1, max_size=4))
def test_lattice_sum_matches_box_scan(terms):
    a = ConvexChain(terms, 2)
    assert lattice_sum(a) == box_sum(a)
    assert lattice_sum(a - a) == 0


def test_brianchon_gram_examples():
    f = normal_fan(simplex(2))
    bg = brianchon_gram(support_function_on(simplex(2), f))
    for x in grid(2, 3):
        assert bg(x) == (1 if simplex(2).contains(x) else 0)
    lin = brianchon_gram(PLFunction.linear(fan_projective_plane(), (2, -1)))
    assert all(lin(x) == (x == (2, -1)) for x in grid(2, 3))
    h1, ps, p2 = tangent_pieces()
    assert all(brianchon_gram(h1)(x) == virtual_polytope_chain(ps, p2)(x) for x in grid())


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_brianchon_gram_equals_pl_chain(a):
    h = divisor_function(fan_projective_plane(), a)
    bg, pc = brianchon_gram(h), pl_chain(h)
    assert all(bg(x) == pc(x) for x in grid(2, 7))


def test_minkowski_inversion_3d_random(rng):
    for _ in range(6):
        p = random_polytope(rng, 3, -2, 2, 5)
        prod = invert_indicator(p) * ind(p)
        assert all(prod(x) == (x == (0, 0, 0)) for x in grid(3, 4))
