import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toric_chains.lattice_core import (
    Cone,
    Fan,
    GeometryError,
    Polytope,
    common_refinement,
    count_lattice_points,
    cube,
    dual_cone,
    faces,
    fan_hirzebruch,
    fan_p1xp1,
    fan_projective_plane,
    fan_projective_space,
    interior_lattice_points,
    lattice_points,
    minkowski_sum,
    normal_fan,
    point,
    polytope_from_divisor,
    refines,
    simplex,
    stellar_subdivide,
    support_function_eval,
)
from toric_chains.linalg import dot
from toric_chains.piecewise_linear import support_function_on

from conftest import FIXTURES

coords = st.integers(-4, 4)


def pts(n, lo=1, hi=6):
    return st.lists(st.tuples(*[coords] * n), min_size=lo, max_size=hi)


def box(n, r):
    return itertools.product(range(-r, r + 1), repeat=n)


# ---------------------------------------------------------------- cones


def test_dual_of_orthant_is_orthant():
    c = Cone.from_generators([(1, 0), (0, 1)])
    assert dual_cone(c) == c


def test_dual_of_zero_cone_is_everything():
    d = dual_cone(Cone.from_generators([], n=2))
    assert d.dim == 2
    assert all(d.contains(x) for x in box(2, 3))


def test_dual_cone_example_by_sign_scan():
    c = Cone.from_generators([(1, 0), (1, 2)])
    d = dual_cone(c)
    assert set(d.rays) == {(0, 1), (2, -1)}
    for m in box(2, 5):
        expected = all(dot(m, g) >= 0 for g in [(1, 0), (1, 2)])
        assert d.contains(m) == expected


@settings(max_examples=40, deadline=None)
@given(pts(3, 1, 5))
def test_double_dual(gens):
    gens = [g for g in gens if any(g)]
    c = Cone.from_generators(gens, n=3)
    assert dual_cone(dual_cone(c)) == c


# ---------------------------------------------------------------- polytopes


def test_minkowski_examples():
    p = simplex(2)
    assert minkowski_sum(p, point((0, 0))) == p
    sq = minkowski_sum(Polytope([(0, 0), (1, 0)]), Polytope([(0, 0), (0, 1)]))
    assert sq == cube(2)
    assert minkowski_sum(p, p) == p.dilate(2)


@settings(max_examples=40, deadline=None)
@given(pts(2), pts(2))
def test_minkowski_sum_matches_pairwise_hull(a, b):
    p, q = Polytope(a), Polytope(b)
    direct = Polytope([tuple(x + y for x, y in zip(u, v)) for u in a for v in b])
    assert minkowski_sum(p, q) == direct


@settings(max_examples=30, deadline=None)
@given(pts(3, 1, 5), pts(3, 1, 4))
def test_minkowski_sum_matches_pairwise_hull_3d(a, b):
    p, q = Polytope(a), Polytope(b)
    direct = Polytope([tuple(x + y for x, y in zip(u, v)) for u in a for v in b])
    assert minkowski_sum(p, q) == direct


def test_lattice_points_examples():
    assert sorted(lattice_points(simplex(2))) == [(0, 0), (0, 1), (1, 0)]
    assert count_lattice_points(simplex(2).dilate(2)) == 6
    assert lattice_points(point((3, -1))) == [(3, -1)]


@settings(max_examples=40, deadline=None)
@given(pts(2, 1, 6))
def test_lattice_points_against_brute_force(a):
    p = Polytope(a)
    brute = sorted(x for x in box(2, 4) if p.contains(x))
    assert sorted(lattice_points(p)) == brute


def test_faces_of_square_and_tetrahedron():
    fs = faces(cube(2))
    assert Counter(d for _, d in fs) == {0: 4, 1: 4, 2: 1}
    assert sum((-1) ** d for _, d in fs) == 1
    fs3 = faces(simplex(3))
    assert Counter(d for _, d in fs3) == {0: 4, 1: 6, 2: 4, 3: 1}
    assert sum((-1) ** d for _, d in fs3) == 1
    assert faces(point((1, 2))) == [(point((1, 2)), 0)]


@settings(max_examples=30, deadline=None)
@given(pts(3, 1, 7))
def test_face_alternating_sum_is_one(a):
    assert sum((-1) ** d for _, d in faces(Polytope(a))) == 1


def test_support_function_examples():
    assert support_function_eval(simplex(2), (1, 1)) == 1
    assert support_function_eval(point((2, 3)), (5, -1)) == 7


@settings(max_examples=40, deadline=None)
@given(pts(2), pts(2), st.lists(st.tuples(coords, coords), min_size=20, max_size=20))
def test_support_function_additive(a, b, xs):
    p, q = Polytope(a), Polytope(b)
    s = minkowski_sum(p, q)
    for x in xs:
        assert support_function_eval(s, x) == support_function_eval(p, x) + support_function_eval(q, x)


def test_interior_points():
    assert interior_lattice_points(simplex(2).dilate(3)) == [(1, 1)]
    assert interior_lattice_points(cube(2)) == []


# ---------------------------------------------------------------- fans


def test_normal_fan_of_simplex():
    f = normal_fan(simplex(2))
    assert set(f.rays) == {(-1, 0), (0, -1), (1, 1)}
    assert f.is_complete
    h = support_function_on(simplex(2), f)
    for x in box(2, 3):
        assert h(x) == support_function_eval(simplex(2), x)


def test_normal_fan_of_square():
    f = normal_fan(cube(2))
    assert len(f.max_cones) == 4 and set(f.rays) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


@settings(max_examples=25, deadline=None)
@given(pts(2, 3, 7))
def test_support_function_linear_on_normal_fan_cones(a):
    p = Polytope(a)
    if p.dim < 2:
        return
    f = normal_fan(p)
    h = support_function_on(p, f)
    for x in box(2, 3):
        assert h(x) == support_function_eval(p, x)


def test_polytope_from_divisor_examples():
    f = fan_projective_plane()
    assert polytope_from_divisor(f, [0, 0, 0]) == point((0, 0))
    p = polytope_from_divisor(f, [1, 0, 0])
    assert count_lattice_points(p) == 3
    assert polytope_from_divisor(f, [-1, 0, 0]).is_empty


def test_polytope_from_divisor_matches_box_scan():
    f = fan_projective_plane()
    rng = random.Random(7)
    for _ in range(20):
        a = [rng.randint(-2, 3) for _ in range(3)]
        p = polytope_from_divisor(f, a)
        scan = [m for m in box(2, 8) if all(dot(m, v) >= -ai for v, ai in zip(f.rays, a))]
        assert count_lattice_points(p) == len(scan)
    # (1, 1, 1) is the anticanonical triangle with 10 lattice points
    assert count_lattice_points(polytope_from_divisor(f, [1, 1, 1])) == 10


def test_standard_fans_complete_and_smooth():
    for f in (fan_projective_plane(), fan_p1xp1(), fan_hirzebruch(), fan_projective_space(3)):
        assert f.is_complete and f.is_smooth and f.is_projective


def test_fan_validation_rejects_overlap():
    with pytest.raises(GeometryError):
        Fan([(1, 0), (0, 1), (1, 1)], [(0, 1), (0, 2)])


def test_common_refinement():
    f = fan_projective_plane()
    assert common_refinement(f, f).same_as(f)
    g = common_refinement(fan_p1xp1(), f)
    assert g.is_complete and len(g.rays) == 5
    s = stellar_subdivide(f, (1, 1))
    assert common_refinement(f, s).same_as(s)


def test_stellar_subdivision():
    f = fan_projective_plane()
    s = stellar_subdivide(f, (1, 1))
    assert len(s.max_cones) == 4 and s.is_complete and refines(s, f)
    assert stellar_subdivide(f, (1, 0)) is f
    h = stellar_subdivide(fan_hirzebruch(), (1, 1))
    assert len(h.max_cones) == 5 and h.is_complete


def test_stellar_subdivision_in_rank_three():
    f = fan_projective_space(3)
    s = stellar_subdivide(f, (1, 1, 1))
    assert s.is_complete and len(s.max_cones) == 6 and refines(s, f)


def test_non_projective_fan_detected():
    import json
    from toric_chains.serialize import fan_from_json
    fan = fan_from_json(json.loads((FIXTURES / "nonprojective_line.json").read_text())["fan"])
    assert fan.is_complete and fan.is_simplicial
    assert not fan.is_projective
