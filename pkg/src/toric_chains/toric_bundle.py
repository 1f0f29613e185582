"""Toric vector bundles through their Klyachko filtrations.

A bundle of rank ``r`` on a complete fan is a vector space ``E = Q^r``
together with one decreasing integer filtration per ray. Compatibility
means that on every maximal cone the filtrations of its rays split along a
common decomposition of ``E`` into character-indexed pieces.

Weights follow the filtration convention: the weight-``u`` sections over
the chart of a cone ``tau`` are ``W(tau, u) = cap_{rho in tau} E^rho(<u, v_rho>)``.
For the line bundle ``O(D)`` with ``D = sum a_rho D_rho`` the filtration of
``rho`` jumps at ``a_rho``, so its weights fill ``{u : <u, v_rho> <= a_rho}``,
the reflection of ``P_D`` through the origin.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .convex_chain import ConvexChain, evaluate, lattice_sum, pl_chain
from .lattice_core import Fan, GeometryError, refines
from .linalg import dot, frac, is_integral, nullspace, rank, rref, solve, sub, vec
from .piecewise_linear import MultiSupportFunction, PLFunction, sorted_branches


class IncompatibleError(GeometryError):
    """Filtration data admits no compatible splitting on some maximal cone."""

    def __init__(self, message: str, *, cone=None, ray=None, threshold=None):
        super().__init__(message)
        self.cone = cone
        self.ray = ray
        self.threshold = threshold


# ----------------------------------------------------------------------------
# subspaces


class Subspace:
    """Subspace of ``Q^r`` stored by its reduced row echelon basis (canonical)."""

    __slots__ = ("r", "basis")

    def __init__(self, vectors: Iterable[Sequence], r: int):
        vectors = [tuple(frac(x) for x in v) for v in vectors]
        for v in vectors:
            if len(v) != r:
                raise GeometryError("vector length does not match the rank of E")
        rows = [v for v in vectors if any(v)]
        self.r = r
        self.basis = tuple(tuple(row) for row in rref(rows)[0]) if rows else ()

    @classmethod
    def full(cls, r: int) -> "Subspace":
        return cls([tuple(int(i == j) for j in range(r)) for i in range(r)], r)

    @classmethod
    def zero(cls, r: int) -> "Subspace":
        return cls([], r)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __contains__(self, v) -> bool:
        return rank(list(self.basis) + [tuple(v)]) == self.dim

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.basis + other.basis, self.r)

    def __and__(self, other: "Subspace") -> "Subspace":
        if self.dim == self.r:
            return other
        if other.dim == self.r:
            return self
        ann = self.annihilator() + other.annihilator()
        return Subspace(nullspace(ann, self.r), self.r) if ann else Subspace.full(self.r)

    def annihilator(self) -> list[tuple]:
        if not self.basis:
            return [tuple(int(i == j) for j in range(self.r)) for i in range(self.r)]
        return nullspace(self.basis, self.r)

    def __le__(self, other: "Subspace") -> bool:
        return all(v in other for v in self.basis)

    def __lt__(self, other: "Subspace") -> bool:
        return self <= other and self.dim < other.dim

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self.r == other.r and self.basis == other.basis

    def __hash__(self):
        return hash((self.r, self.basis))

    def __repr__(self):
        return f"Subspace({[list(map(str, b)) for b in self.basis]})"


def sum_spaces(spaces: Iterable[Subspace], r: int) -> Subspace:
    rows = [v for s in spaces for v in s.basis]
    return Subspace(rows, r)


def extend_basis(base: Subspace, target: Subspace) -> list[tuple]:
    """Rows of ``target``'s basis that extend a basis of ``base`` (``base <= target``)."""
    chosen = list(base.basis)
    new = []
    for v in target.basis:
        if rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            new.append(v)
    return new


# ----------------------------------------------------------------------------
# filtrations


class Filtration:
    """Decreasing filtration of ``E``: ``E(i) = steps[k].space`` for ``i`` in ``(t_{k-1}, t_k]``.

    ``E(i) = E`` for ``i <= t_0`` and ``E(i) = 0`` for ``i > t_last``.
    """

    def __init__(self, steps: Sequence[tuple[int, Subspace]], r: int):
        self.r = r
        self.steps = tuple((int(t), s) for t, s in steps)
        if not self.steps:
            raise GeometryError("a filtration needs at least one step")
        ts = [t for t, _ in self.steps]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise GeometryError("filtration thresholds must strictly increase")
        spaces = [s for _, s in self.steps]
        if spaces[0].dim != r:
            raise GeometryError("first space of a filtration must be all of E")
        if any(not (b < a) for a, b in zip(spaces, spaces[1:])):
            raise GeometryError("filtration spaces must strictly decrease")
        if spaces[-1].dim == 0:
            raise GeometryError("the zero space is implicit above the last threshold")

    @classmethod
    def from_values(cls, pieces: Sequence[tuple[int, Subspace]], r: int) -> "Filtration":
        """Filtration ``E(i) = sum of pieces whose value is >= i``."""
        values = sorted({v for v, _ in pieces})
        steps = []
        for t in values:
            steps.append((t, sum_spaces([s for v, s in pieces if v >= t], r)))
        return cls(steps, r)

    @cached_property
    def thresholds(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.steps)

    def step_index(self, i: int) -> int:
        """Index of the step holding ``E(i)``; ``len(steps)`` means the zero space."""
        return bisect_left(self.thresholds, i)

    def __call__(self, i: int) -> Subspace:
        k = self.step_index(i)
        return self.steps[k][1] if k < len(self.steps) else Subspace.zero(self.r)

    def __eq__(self, other):
        return isinstance(other, Filtration) and self.steps == other.steps

    def __repr__(self):
        return f"Filtration({[(t, s.dim) for t, s in self.steps]})"


@dataclass(frozen=True)
class LabeledFlag:
    """Values ``a_1 > ... > a_k`` with flag ``0 = F_0 < F_1 < ... < F_k = E``."""

    values: tuple
    spaces: tuple

    def multiset(self) -> list:
        """Each ``a_i`` repeated ``dim F_i / F_{i-1}`` times, sorted ascending."""
        out = []
        prev = 0
        for a, s in zip(self.values, self.spaces):
            out.extend([a] * (s.dim - prev))
            prev = s.dim
        return sorted(out)


# ----------------------------------------------------------------------------
# bundles


class KlyachkoBundle:
    """Complete fan plus one filtration of ``E = Q^r`` per ray."""

    def __init__(self, fan: Fan, r: int, filtrations: Mapping[int, Filtration]):
        if not fan.is_complete:
            raise GeometryError("toric bundles are only supported on complete fans")
        missing = [i for i in range(len(fan.rays)) if i not in filtrations]
        if missing:
            raise GeometryError(f"no filtration given for rays {missing}")
        self.fan = fan
        self.rank = r
        self.filtrations = {i: filtrations[i] for i in range(len(fan.rays))}
        for i, flt in self.filtrations.items():
            if flt.r != r:
                raise GeometryError(f"filtration of ray {i} lives in the wrong space")

    @cached_property
    def decomposition(self) -> tuple[tuple[tuple[tuple, Subspace], ...], ...]:
        """Per maximal cone: ``(character, piece)`` pairs splitting ``E``."""
        return tuple(_split_cone(self, k) for k in range(len(self.fan.max_cones)))

    @cached_property
    def chain(self) -> ConvexChain:
        return bundle_chain(self)

    def __repr__(self):
        return f"KlyachkoBundle(rank={self.rank}, rays={list(self.fan.rays)})"


def _split_cone(b: KlyachkoBundle, k: int) -> tuple[tuple[tuple, Subspace], ...]:
    f = b.fan
    cone = f.max_cones[k]
    rays = [f.rays[i] for i in cone]
    filts = [b.filtrations[i] for i in cone]
    r = b.rank

    cands = set()
    for js in itertools.product(*(flt.thresholds for flt in filts)):
        u = solve(rays, js)
        if u is None or not is_integral(u):
            continue
        if all(dot(u, v) == j for v, j in zip(rays, js)):
            cands.add(u)

    def pairing(u):
        return tuple(dot(u, v) for v in rays)

    def space(u):
        s = Subspace.full(r)
        for flt, v in zip(filts, rays):
            s = s & flt(dot(u, v))
        return s

    order = sorted(cands, key=pairing, reverse=True)
    W = {u: space(u) for u in order}
    pieces = []
    for u in order:
        if W[u].dim == 0:
            continue
        pu = pairing(u)
        higher = sum_spaces(
            [W[w] for w in order if w != u and all(a >= c for a, c in zip(pairing(w), pu))], r)
        new = extend_basis(higher & W[u], W[u])
        if new:
            pieces.append((u, Subspace(new, r)))

    # Every piece is nonzero, so a ray of the cone always witnesses a bad total.
    ray, thr = _first_violation(b, k, pieces)
    if ray is not None:
        raise IncompatibleError(
            f"filtrations on cone {cone} admit no compatible splitting (ray {ray}, threshold {thr})",
            cone=cone, ray=ray, threshold=thr)
    return tuple(pieces)


def _first_violation(b: KlyachkoBundle, k: int, pieces) -> tuple[int | None, int | None]:
    """First ``(ray, threshold)`` where ``E^rho(i) != sum_{<u, v_rho> >= i} E_u`` on cone ``k``."""
    f = b.fan
    r = b.rank
    for i in f.max_cones[k]:
        v = f.rays[i]
        flt = b.filtrations[i]
        pts = set(flt.thresholds) | {dot(u, v) for u, _ in pieces}
        for t in sorted(pts | {p + 1 for p in pts}):
            part = [p for u, p in pieces if dot(u, v) >= t]
            lhs = flt(t)
            if sum(p.dim for p in part) != lhs.dim or sum_spaces(part, r) != lhs:
                return i, t
    return None, None


def check_compatibility(b: KlyachkoBundle):
    """Per-cone decomposition; raises :class:`IncompatibleError` when none exists."""
    return b.decomposition


def verify_decomposition(b: KlyachkoBundle) -> bool:
    """Independent recheck of the splitting condition on every ray and threshold."""
    for k, pieces in enumerate(b.decomposition):
        if sum(p.dim for _, p in pieces) != b.rank:
            return False
        if sum_spaces([p for _, p in pieces], b.rank).dim != b.rank:
            return False
        if _first_violation(b, k, pieces)[0] is not None:
            return False
    return True


def characters(b: KlyachkoBundle, k: int) -> list[tuple]:
    """Character multiset of maximal cone ``k`` (sorted)."""
    out = []
    for u, p in b.decomposition[k]:
        out.extend([u] * p.dim)
    return sorted(out)


def support_function(b: KlyachkoBundle) -> MultiSupportFunction:
    return MultiSupportFunction(b.fan, [characters(b, k) for k in range(len(b.fan.max_cones))])


def bundle_chain(b: KlyachkoBundle) -> ConvexChain:
    """Sum over sorted branches ``h_i`` of the virtual polytope chain of ``h_i``."""
    branches = sorted_branches(support_function(b))
    total = ConvexChain.zero(b.fan.n)
    for h in branches:
        total = total + pl_chain(h)
    return total


def equivariant_euler(b: KlyachkoBundle, u) -> int:
    return evaluate(b.chain, tuple(u))


def euler_characteristic(b: KlyachkoBundle) -> int:
    return lattice_sum(b.chain)


# ----------------------------------------------------------------------------
# Cech oracle


def nerve_coefficients(f: Fan) -> dict[frozenset, int]:
    """``tau -> sum (-1)^{|S|-1}`` over nonempty sets ``S`` of maximal cones meeting in ``tau``."""
    cache = f.__dict__.get("_nerve")
    if cache is not None:
        return cache
    out: dict[frozenset, int] = {}
    cones = [frozenset(c) for c in f.max_cones]
    m = len(cones)
    for size in range(1, m + 1):
        sign = (-1) ** (size - 1)
        for S in itertools.combinations(range(m), size):
            tau = frozenset.intersection(*(cones[i] for i in S))
            out[tau] = out.get(tau, 0) + sign
    out = {t: c for t, c in out.items() if c}
    f.__dict__["_nerve"] = out
    return out


def weight_space(b: KlyachkoBundle, tau: Iterable[int], u) -> Subspace:
    """``W(tau, u) = cap_{rho in tau} E^rho(<u, v_rho>)`` (``E`` for the zero cone)."""
    s = Subspace.full(b.rank)
    for i in tau:
        s = s & b.filtrations[i](dot(u, b.fan.rays[i]))
    return s


def _weight_dim(b: KlyachkoBundle, tau: frozenset, u, cache: dict) -> int:
    # W(tau, u) only depends on the step of each filtration that <u, v_rho> falls in
    idx = tuple(sorted((i, b.filtrations[i].step_index(dot(u, b.fan.rays[i]))) for i in tau))
    d = cache.get(idx)
    if d is None:
        d = cache[idx] = weight_space(b, tau, u).dim
    return d


def cech_euler_oracle(b: KlyachkoBundle, u) -> int:
    """Alternating sum of weight-``u`` section dimensions over the Cech nerve of the maximal charts."""
    u = tuple(u)
    cache = b.__dict__.setdefault("_weight_dims", {})
    return sum(c * _weight_dim(b, tau, u, cache) for tau, c in nerve_coefficients(b.fan).items())


# ----------------------------------------------------------------------------
# pull-backs and flags


def refine_pullback(b: KlyachkoBundle, finer: Fan) -> KlyachkoBundle:
    """The pull-back to a refinement: new rays inherit the splitting of a cone containing them."""
    if finer.n != b.fan.n or not refines(finer, b.fan):
        raise GeometryError("target fan does not refine the bundle's fan")
    filts = {}
    for i, v in enumerate(finer.rays):
        old = b.fan.ray_index(v)
        if old is not None:
            filts[i] = b.filtrations[old]
            continue
        k = b.fan.find_max_cone(v)
        pieces = [(dot(u, v), p) for u, p in b.decomposition[k]]
        filts[i] = Filtration.from_values(pieces, b.rank)
    return KlyachkoBundle(finer, b.rank, filts)


def flag_at(b: KlyachkoBundle, x) -> LabeledFlag:
    """Labeled flag of the valuation at ``x``: values of the characters at ``x``, descending."""
    x = vec(x)
    k = b.fan.find_max_cone(x)
    pieces = b.decomposition[k]
    values = sorted({dot(u, x) for u, _ in pieces}, reverse=True)
    spaces = tuple(sum_spaces([p for u, p in pieces if dot(u, x) >= a], b.rank) for a in values)
    return LabeledFlag(tuple(values), spaces)


# ----------------------------------------------------------------------------
# constructors


def line_bundle(fan: Fan, a: Mapping[int, int] | Sequence[int]) -> KlyachkoBundle:
    """``O(sum a_rho D_rho)``: the filtration of ``rho`` drops from ``E`` to 0 after ``a_rho``."""
    if isinstance(a, Mapping):
        a = [int(a.get(i, 0)) for i in range(len(fan.rays))]
    if len(a) != len(fan.rays):
        raise GeometryError("one coefficient per ray is required")
    E = Subspace.full(1)
    return KlyachkoBundle(fan, 1, {i: Filtration([(int(ai), E)], 1) for i, ai in enumerate(a)})


def tangent_bundle(fan: Fan) -> KlyachkoBundle:
    """``E = N tensor Q``; ``E^rho(i)`` is ``E`` for ``i <= 0``, the line of ``v_rho`` for ``i = 1``."""
    n = fan.n
    E = Subspace.full(n)
    filts = {i: Filtration([(0, E), (1, Subspace([v], n))], n) for i, v in enumerate(fan.rays)}
    return KlyachkoBundle(fan, n, filts)


def direct_sum(*bundles: KlyachkoBundle) -> KlyachkoBundle:
    """Block direct sum of bundles on the same fan."""
    fan = bundles[0].fan
    for b in bundles[1:]:
        if not b.fan.same_as(fan) or b.fan.rays != fan.rays:
            raise GeometryError("direct sums need bundles on the same fan")
    r = sum(b.rank for b in bundles)
    filts = {}
    for i in range(len(fan.rays)):
        pieces = []
        offset = 0
        for b in bundles:
            flt = b.filtrations[i]
            for (t, s), nxt in itertools.zip_longest(flt.steps, flt.steps[1:]):
                below = nxt[1] if nxt else Subspace.zero(b.rank)
                for v in extend_basis(below, s):
                    pieces.append((t, Subspace([(0,) * offset + tuple(v) + (0,) * (r - offset - b.rank)], r)))
            offset += b.rank
        filts[i] = Filtration.from_values(pieces, r)
    return KlyachkoBundle(fan, r, filts)
