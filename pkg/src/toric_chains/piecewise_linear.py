"""Integral piecewise linear functions on complete fans.

A :class:`PLFunction` stores one linear functional (a slope in ``M``) per
maximal cone. Convexity is with respect to the max convention: ``h`` is
convex iff it is the support function ``x -> max_sigma <u_sigma, x>`` of the
polytope spanned by its slopes.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from math import ceil, gcd, lcm
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .lattice_core import (
    Fan,
    GeometryError,
    NotProjectiveError,
    Polytope,
    refine_by_hyperplanes,
    refines,
)
from .linalg import dot, frac, is_integral, neg, rank, solve, sub, vec


class PLFunction:
    """Piecewise linear function, linear with integral slope on every maximal cone of ``fan``."""

    def __init__(self, fan: Fan, slopes: Mapping[int, Sequence] | Sequence[Sequence], *, check: bool = True):
        if not isinstance(slopes, Mapping):
            slopes = dict(enumerate(slopes))
        self.fan = fan
        self.slopes = tuple(vec(slopes[k]) for k in range(len(fan.max_cones)))
        if check:
            self._validate()

    def _validate(self):
        f = self.fan
        for u in self.slopes:
            if len(u) != f.n:
                raise GeometryError("slope length does not match rank")
            if not is_integral(u):
                raise GeometryError(f"slope {u} is not integral")
        for a in range(len(f.max_cones)):
            for b in range(a + 1, len(f.max_cones)):
                common = set(f.max_cones[a]) & set(f.max_cones[b])
                for i in common:
                    if dot(sub(self.slopes[a], self.slopes[b]), f.rays[i]) != 0:
                        raise GeometryError(
                            f"slopes of cones {f.max_cones[a]} and {f.max_cones[b]} disagree on ray {f.rays[i]}")

    @classmethod
    def linear(cls, fan: Fan, u: Sequence[int]) -> "PLFunction":
        return cls(fan, [tuple(u)] * len(fan.max_cones), check=False)

    @classmethod
    def from_ray_values(cls, fan: Fan, values: Sequence) -> "PLFunction":
        """The function with ``h(v_rho) = values[rho]``; needs a Cartier (consistent, integral) datum."""
        slopes = []
        for c in fan.max_cones:
            A = [fan.rays[i] for i in c]
            u = solve(A, [values[i] for i in c])
            if u is None or rank(A) < fan.n or any(dot(u, r) != values[i] for i, r in zip(c, A)):
                raise GeometryError(f"ray values are not linear on cone {c}")
            if not is_integral(u):
                raise GeometryError(f"ray values give a non-integral slope {u} on cone {c}")
            slopes.append(u)
        return cls(fan, slopes)

    # --- evaluation -----------------------------------------------------------

    def __call__(self, x):
        return evaluate(self, x)

    @cached_property
    def ray_values(self) -> tuple:
        out = []
        for i, r in enumerate(self.fan.rays):
            k = next(k for k, c in enumerate(self.fan.max_cones) if i in c)
            out.append(dot(self.slopes[k], r))
        return tuple(out)

    # --- arithmetic on a common fan ---------------------------------------------

    def _same_fan(self, other: "PLFunction"):
        if other.fan is not self.fan and not other.fan.same_as(self.fan):
            raise GeometryError("piecewise linear functions live on different fans")
        if other.fan is not self.fan and other.fan.max_cones != self.fan.max_cones:
            other = other.pullback(self.fan)
        return other

    def __add__(self, other: "PLFunction") -> "PLFunction":
        other = self._same_fan(other)
        return PLFunction(self.fan, [tuple(a + b for a, b in zip(u, w)) for u, w in zip(self.slopes, other.slopes)],
                          check=False)

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        return self + (-other)

    def __neg__(self) -> "PLFunction":
        return PLFunction(self.fan, [neg(u) for u in self.slopes], check=False)

    def __rmul__(self, k: int) -> "PLFunction":
        return PLFunction(self.fan, [tuple(k * a for a in u) for u in self.slopes], check=False)

    def pullback(self, finer: Fan) -> "PLFunction":
        """The same function viewed on a refinement of its fan."""
        if not refines(finer, self.fan):
            raise GeometryError("target fan does not refine the source fan")
        slopes = []
        for c in finer.max_cones:
            p = tuple(sum(finer.rays[i][j] for i in c) for j in range(finer.n))
            slopes.append(self.slopes[self.fan.find_max_cone(p)])
        return PLFunction(finer, slopes, check=False)

    def is_linear(self) -> bool:
        return len(set(self.slopes)) == 1

    def __repr__(self):
        return f"PLFunction(slopes={[list(u) for u in self.slopes]})"


def evaluate(h: PLFunction, x) -> Fraction | int:
    """``<u_sigma, x>`` for a maximal cone ``sigma`` containing ``x``."""
    if len(x) != h.fan.n:
        raise GeometryError("rank mismatch")
    k = h.fan.find_max_cone(x)
    return dot(h.slopes[k], x)


def _wall_gaps(h: PLFunction):
    """For each wall (a, b): ``<u_a - u_b, x>`` at a ray ``x`` of cone ``a`` off the wall."""
    f = h.fan
    out = []
    for a, b, common in f.walls:
        x = next(f.rays[i] for i in f.max_cones[a] if i not in common)
        out.append((a, b, x, dot(sub(h.slopes[a], h.slopes[b]), x)))
    return out


def is_convex(h: PLFunction, strict: bool = False) -> bool:
    """Local convexity across every wall; on a complete fan this is global convexity."""
    if not h.fan.is_complete:
        raise GeometryError("convexity is only decided on complete fans")
    for _, _, _, gap in _wall_gaps(h):
        if gap < 0 or (strict and gap == 0):
            return False
    return True


def is_strictly_convex(h: PLFunction) -> bool:
    return is_convex(h, strict=True)


def polytope_of(h: PLFunction) -> Polytope:
    """The polytope whose support function is the convex function ``h``."""
    if not is_convex(h):
        raise GeometryError("only convex functions are support functions of polytopes")
    return Polytope(sorted(set(h.slopes)), h.fan.n)


def support_function_on(p: Polytope, fan: Fan) -> PLFunction:
    """``h_p`` as a PLFunction on a fan on which it is linear (e.g. a refinement of the normal fan)."""
    slopes = []
    for c in fan.max_cones:
        x = tuple(sum(fan.rays[i][j] for i in c) for j in range(fan.n))
        vals = [dot(v, x) for v in p.vertices]
        slopes.append(p.vertices[vals.index(max(vals))])
    h = PLFunction(fan, slopes)
    for c, u in zip(fan.max_cones, h.slopes):
        for i in c:
            if dot(u, fan.rays[i]) != max(dot(v, fan.rays[i]) for v in p.vertices):
                raise GeometryError("support function is not linear on the given fan")
    return h


def divisor_function(fan: Fan, a: Mapping[int, int] | Sequence[int]) -> PLFunction:
    """PL function of the divisor datum: ``h(v_rho) = a_rho``."""
    if isinstance(a, Mapping):
        a = [int(a.get(i, 0)) for i in range(len(fan.rays))]
    if len(a) != len(fan.rays):
        raise GeometryError("one coefficient per ray is required")
    return PLFunction.from_ray_values(fan, [int(x) for x in a])


# ----------------------------------------------------------------------------
# strictly convex witness and convex splits


def _wall_system(f: Fan):
    """Linear system over the stacked slopes of all maximal cones.

    Returns ``(eq_rows, gap_rows)``: continuity across shared rays plus slope 0
    on the first cone, and one row per wall whose value is the wall gap.
    """
    n, m = f.n, len(f.max_cones)
    nv = n * m
    eq_rows = []
    for a in range(m):
        for b in range(a + 1, m):
            for i in sorted(set(f.max_cones[a]) & set(f.max_cones[b])):
                row = [0] * nv
                for j in range(n):
                    row[a * n + j] += f.rays[i][j]
                    row[b * n + j] -= f.rays[i][j]
                eq_rows.append(row)
    for j in range(n):
        row = [0] * nv
        row[j] = 1
        eq_rows.append(row)
    gap_rows = []
    for a, b, common in f.walls:
        x = next(f.rays[i] for i in f.max_cones[a] if i not in common)
        row = [0] * nv
        for j in range(n):
            row[a * n + j] += x[j]
            row[b * n + j] -= x[j]
        gap_rows.append(row)
    return eq_rows, gap_rows


def _integer_program(f: Fan, eq_rows, gap_rows, lower) -> PLFunction | None:
    """Integral PL function with every wall gap ``>= lower`` and least total gap, if found."""
    nv = f.n * len(f.max_cones)
    A = np.array(gap_rows + eq_rows, dtype=float)
    lo = np.concatenate([np.array(lower, dtype=float), np.zeros(len(eq_rows))])
    hi = np.concatenate([np.full(len(gap_rows), np.inf), np.zeros(len(eq_rows))])
    cost = np.sum(np.array(gap_rows, dtype=float), axis=0)
    res = milp(cost, constraints=LinearConstraint(A, lo, hi), integrality=np.ones(nv),
               bounds=Bounds(-10**6, 10**6), options={"time_limit": 10})
    if res.x is None:
        return None
    ints = [int(round(v)) for v in res.x]
    try:
        h = PLFunction(f, [ints[k * f.n:(k + 1) * f.n] for k in range(len(f.max_cones))])
    except GeometryError:
        return None
    gaps = [dot(r, ints) for r in gap_rows]
    return h if all(g >= l for g, l in zip(gaps, lower)) else None


def strictly_convex_witness(f: Fan) -> PLFunction:
    """A strictly convex integral PL function on ``f``, or :class:`NotProjectiveError`.

    Solves ``min sum(gaps)`` subject to ``gap >= 1`` on every wall, slope 0 on
    the first cone and continuity across shared rays. The LP decides
    existence; an integer version of the same program supplies a small
    witness. If that fails, the LP vertex is recovered exactly from its
    active constraints and scaled to integers. Either way every inequality
    is rechecked in rational arithmetic.
    """
    cache = f.__dict__.get("_witness")
    if cache is not None:
        return cache
    if not f.is_complete:
        raise GeometryError("strictly convex functions are only sought on complete fans")
    n, m = f.n, len(f.max_cones)
    nv = n * m
    eq_rows, gap_rows = _wall_system(f)
    if not gap_rows:
        raise NotProjectiveError("fan has no walls")

    res = linprog(
        np.sum(np.array(gap_rows, dtype=float), axis=0),
        A_ub=-np.array(gap_rows, dtype=float),
        b_ub=-np.ones(len(gap_rows)),
        A_eq=np.array(eq_rows, dtype=float),
        b_eq=np.zeros(len(eq_rows)),
        bounds=[(None, None)] * nv,
        method="highs",
    )
    if res.status == 2:
        raise NotProjectiveError("no strictly convex piecewise linear function exists on this fan")
    if res.status != 0:
        raise GeometryError(f"linear program failed: {res.message}")

    h = _integer_program(f, eq_rows, gap_rows, [1] * len(gap_rows))
    if h is None:
        xs = res.x
        active = [r for r in gap_rows if abs(float(np.dot(r, xs)) - 1.0) < 1e-7]
        sol = solve(eq_rows + active, [0] * len(eq_rows) + [1] * len(active))
        if sol is None or rank(eq_rows + active) < nv:
            sol = vec(Fraction(v).limit_denominator(10**6) for v in xs)
        slopes = [sol[k * n:(k + 1) * n] for k in range(m)]
        den = lcm(*(frac(c).denominator for u in slopes for c in u))
        ints = [tuple(int(frac(c) * den) for c in u) for u in slopes]
        g = 0
        for u in ints:
            for c in u:
                g = gcd(g, abs(c))
        h = PLFunction(f, [tuple(c // g for c in u) for u in ints])
    if not is_strictly_convex(h):
        raise GeometryError("failed to certify a strictly convex function exactly")
    f.__dict__["_witness"] = h
    return h


def witness_split(h: PLFunction) -> tuple[PLFunction, PLFunction]:
    """``(h + c g, c g)`` with ``g`` the witness of the fan and ``c >= 0`` minimal."""
    g = strictly_convex_witness(h.fan)
    gaps = {(a, b): gap for a, b, _, gap in _wall_gaps(h)}
    c = 0
    for a, b, _, ggap in _wall_gaps(g):
        gap = gaps[(a, b)]
        if gap < 0:
            c = max(c, ceil(Fraction(-gap, ggap)))
    minus = c * g
    return h + minus, minus


def convex_split(h: PLFunction) -> tuple[PLFunction, PLFunction]:
    """``h = h_plus - h_minus`` with both halves convex and ``h_minus`` as small as possible.

    ``h_minus`` is the integral convex function (slope 0 on the first cone)
    with least total wall gap among those making ``h + h_minus`` convex:
    each wall gap must be at least ``max(0, -gap_h)``. Convex ``h`` gives
    ``h_minus = 0``. If the integer program gives up, falls back to
    :func:`witness_split`. Non-projective fans raise
    :class:`NotProjectiveError` unless ``h`` is already convex.
    """
    if is_convex(h):
        return h, PLFunction.linear(h.fan, (0,) * h.fan.n)
    f = h.fan
    strictly_convex_witness(f)  # projectivity check
    eq_rows, gap_rows = _wall_system(f)
    lower = [max(0, -gap) for _, _, _, gap in _wall_gaps(h)]
    minus = _integer_program(f, eq_rows, gap_rows, lower)
    if minus is None:
        return witness_split(h)
    plus = h + minus
    if not (is_convex(plus) and is_convex(minus)):
        return witness_split(h)
    return plus, minus


# ----------------------------------------------------------------------------
# multi-valued support functions


class MultiSupportFunction:
    """An ``r``-valued support function: a multiset of ``r`` slopes per maximal cone."""

    def __init__(self, fan: Fan, branches: Mapping[int, Sequence[Sequence]] | Sequence[Sequence[Sequence]],
                 *, check: bool = True):
        if not isinstance(branches, Mapping):
            branches = dict(enumerate(branches))
        self.fan = fan
        self.branches = tuple(tuple(sorted(vec(u) for u in branches[k])) for k in range(len(fan.max_cones)))
        sizes = {len(b) for b in self.branches}
        if len(sizes) != 1:
            raise GeometryError("every cone needs the same number of branches")
        self.rank = sizes.pop()
        if check:
            self.check_consistency()

    def check_consistency(self):
        """Branch multisets must restrict to the same multiset on every shared face."""
        f = self.fan
        for a in range(len(f.max_cones)):
            for b in range(a + 1, len(f.max_cones)):
                common = sorted(set(f.max_cones[a]) & set(f.max_cones[b]))
                if not common:
                    continue
                ra = sorted(tuple(dot(u, f.rays[i]) for i in common) for u in self.branches[a])
                rb = sorted(tuple(dot(u, f.rays[i]) for i in common) for u in self.branches[b])
                if ra != rb:
                    raise GeometryError(
                        f"branch multisets of cones {f.max_cones[a]} and {f.max_cones[b]} disagree on their common face")

    def values(self, x) -> list:
        """Sorted multiset ``{<u, x>}`` at ``x``."""
        k = self.fan.find_max_cone(x)
        return sorted(dot(u, x) for u in self.branches[k])

    @cached_property
    def sorting_fan(self) -> Fan:
        """Refinement on which the order of the branches is constant on every cone."""
        f = self.fan
        if f.n <= 2:
            per_cone = [
                sorted({sub(u, w) for u in br for w in br if u != w})
                for br in self.branches
            ]
            return refine_by_hyperplanes(f, per_cone, per_cone=True)
        normals = sorted({sub(u, w) for br in self.branches for u in br for w in br if u != w})
        return refine_by_hyperplanes(f, normals)


def sorted_branches(m: MultiSupportFunction) -> list[PLFunction]:
    """``[h_1, ..., h_r]`` with ``h_i(x)`` the ``i``-th smallest value at ``x``."""
    if m.rank == 1:
        return [PLFunction(m.fan, [b[0] for b in m.branches], check=False)]
    fine = m.sorting_fan
    per_branch = [[] for _ in range(m.rank)]
    for c in fine.max_cones:
        p = tuple(sum(fine.rays[i][j] for i in c) for j in range(fine.n))
        k = m.fan.find_max_cone(p)
        order = sorted(m.branches[k], key=lambda u: (dot(u, p), u))
        for i, u in enumerate(order):
            per_branch[i].append(u)
    return [PLFunction(fine, s) for s in per_branch]
