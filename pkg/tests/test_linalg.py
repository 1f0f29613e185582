from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from toric_chains.linalg import det, nullspace, orthogonal_normal, primitive, rank, rref, solve

small = st.integers(-4, 4)
matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=1, max_size=4))


def test_rref_and_rank():
    rows, piv = rref([[2, 4], [1, 2]])
    assert rows == [[1, 2]] and piv == [0]
    assert rank([[1, 0, 0], [0, 1, 0], [1, 1, 0]]) == 2


def test_primitive_scales_fractions():
    assert primitive([Fraction(1, 2), Fraction(3, 4)]) == (2, 3)
    assert primitive([0, -6, 4]) == (0, -3, 2)


def test_solve_inconsistent():
    assert solve([[1, 1], [1, 1]], [1, 2]) is None
    assert solve([[1, 1], [1, -1]], [2, 0]) == (1, 1)


def test_det_small():
    assert det([[1, 2], [3, 4]]) == -2
    assert det([[0, 1, 0], [1, 0, 0], [0, 0, 1]]) == -1
    assert det([[Fraction(1, 2), 0], [0, 4]]) == 2


def test_orthogonal_normal():
    assert orthogonal_normal([(1, 0, 0), (0, 1, 0)], 3) in {(0, 0, 1), (0, 0, -1)}
    assert orthogonal_normal([(1, 1, 0), (2, 2, 0)], 3) is None


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_nullspace_is_kernel_of_right_size(m):
    n = len(m[0])
    ker = nullspace(m, n)
    assert len(ker) == n - rank(m)
    for v in ker:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_zero_iff_rank_deficient(m):
    assert (det(m) == 0) == (rank(m) < len(m))
