"""Exact linear algebra over the rationals.

Small dense helpers used throughout the package. Vectors are tuples of
``int`` or ``Fraction``; matrices are sequences of such rows. Nothing here
touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Vector = tuple


def frac(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def normalize(x):
    """Return an int when the rational is integral, else the Fraction."""
    x = frac(x)
    return x.numerator if x.denominator == 1 else x


def vec(coords: Iterable) -> Vector:
    return tuple(normalize(c) for c in coords)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def scale(k, a: Sequence) -> Vector:
    return tuple(k * x for x in a)


def neg(a: Sequence) -> Vector:
    return tuple(-x for x in a)


def is_integral(a: Sequence) -> bool:
    return all(frac(x).denominator == 1 for x in a)


def common_denominator(a: Iterable) -> int:
    return reduce(lcm, (frac(x).denominator for x in a), 1)


def primitive(a: Sequence) -> Vector:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    d = common_denominator(a)
    ints = [int(frac(x) * d) for x in a]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form. Returns (nonzero rows, pivot columns)."""
    m = [[frac(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    return len(rref(rows)[1])


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of a nonempty point set."""
    if not points:
        return -1
    p0 = points[0]
    return rank([sub(p, p0) for p in points[1:]])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of {x : A x = 0} as primitive integer vectors."""
    red, piv = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(primitive(x))
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Vector | None:
    """One exact solution of A x = b (free variables set to 0), or None if inconsistent."""
    if not rows:
        return None if any(rhs) else ()
    n = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return vec(x)


def det(m: Sequence[Sequence]):
    """Determinant by fraction-free (Bareiss) elimination; exact for ints and Fractions."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num // prev if isinstance(num, int) and isinstance(prev, int) else num / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def orthogonal_normal(vectors: Sequence[Sequence], n: int) -> Vector | None:
    """Primitive integer normal to ``n - 1`` vectors in dimension ``n`` (generalized cross product).

    Returns None when the vectors are dependent.
    """
    if n == 1:
        return (1,)
    d = common_denominator(x for v in vectors for x in v)
    m = [[int(frac(x) * d) for x in v] for v in vectors]
    cof = []
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m]
        cof.append((-1) ** j * det(minor))
    if not any(cof):
        return None
    return primitive(cof)


def row_space_basis(rows: Sequence[Sequence]) -> list[Vector]:
    """Integer basis of the row space (primitive rows of the RREF)."""
    red, _ = rref([r for r in rows if any(r)]) if any(any(r) for r in rows) else ([], [])
    return [primitive(r) for r in red]
