"""Exact lattice and polyhedral geometry: cones, fans and polytopes.

All coordinates are ints or Fractions. Facet and vertex descriptions are
computed by brute-force double description, which is adequate for
ambient rank up to 4 and a few dozen vertices.

Sign conventions: polytope support functions use the maximum,
``h_P(x) = max_{m in P} <m, x>``, and the normal fan of ``P`` has one maximal
cone per vertex ``v``, namely the set of ``x`` where ``v`` attains that
maximum (outer normals).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property
from math import ceil, floor
from typing import Iterable, Mapping, Sequence

from .linalg import (
    affine_rank,
    common_denominator,
    det,
    dot,
    frac,
    is_integral,
    neg,
    normalize,
    nullspace,
    orthogonal_normal,
    primitive,
    rank,
    row_space_basis,
    rref,
    scale,
    solve,
    sub,
    add,
    vec,
)


class GeometryError(ValueError):
    """Raised for ill-formed geometric input (rank mismatch, degenerate fans, ...)."""


class NotProjectiveError(GeometryError):
    """The fan admits no strictly convex piecewise linear function."""


# ----------------------------------------------------------------------------
# cones


def _dual_generators(gens: Sequence[Sequence[int]], lineality: Sequence[Sequence[int]], n: int):
    """Generators of the dual of cone(gens) + span(lineality).

    Returns ``(rays, lineality_basis)`` of ``{y : <y, x> >= 0 for x in the cone}``.
    The rays are taken inside the span of the cone; they are unique up to the
    dual's lineality space.
    """
    gens = [tuple(g) for g in gens if any(g)]
    lineality = [tuple(l) for l in lineality if any(l)]
    span = row_space_basis(gens + lineality)
    k = len(span)
    dual_lin = nullspace(span, n) if span else [tuple(int(i == j) for j in range(n)) for i in range(n)]
    if k == 0:
        return [], dual_lin
    lin_basis = row_space_basis(lineality) if lineality else []
    pool = lin_basis + gens
    found: dict[tuple, None] = {}
    for combo in itertools.combinations(range(len(pool)), k - 1):
        w = [pool[i] for i in combo]
        coords = [tuple(dot(b, wi) for b in span) for wi in w]
        z = orthogonal_normal(coords, k)
        if z is None:
            continue
        y = primitive([sum(z[i] * span[i][c] for i in range(k)) for c in range(n)])
        if any(dot(y, l) != 0 for l in lin_basis):
            continue
        vals = [dot(y, g) for g in gens]
        if all(v >= 0 for v in vals):
            found.setdefault(y)
        elif all(v <= 0 for v in vals):
            found.setdefault(neg(y))
    return sorted(found), dual_lin


class Cone:
    """Rational polyhedral cone ``cone(rays) + span(lineality)`` in a rank-``n`` lattice.

    Use :meth:`from_generators` for arbitrary generators; the constructor
    trusts that ``rays`` are primitive and extremal.
    """

    def __init__(self, rays, lineality=(), n: int | None = None, _halfspaces=None):
        rays = tuple(sorted(tuple(int(x) for x in r) for r in rays))
        lineality = tuple(tuple(int(x) for x in l) for l in lineality)
        if n is None:
            if rays:
                n = len(rays[0])
            elif lineality:
                n = len(lineality[0])
            else:
                raise GeometryError("rank of the zero cone must be given")
        self.n = n
        self.rays = rays
        self.lineality = lineality
        for r in rays + lineality:
            if len(r) != n:
                raise GeometryError("generator length does not match rank")
        if _halfspaces is not None:
            self.__dict__["_hrep"] = _halfspaces

    @classmethod
    def from_generators(cls, gens, lineality=(), n: int | None = None) -> "Cone":
        gens = [primitive(g) for g in gens if any(g)]
        lineality = [tuple(l) for l in lineality if any(l)]
        if n is None:
            n = len(gens[0]) if gens else len(lineality[0])
        d_rays, d_lin = _dual_generators(gens, lineality, n)
        rays, lin = _dual_generators(d_rays, d_lin, n)
        return cls(rays, lin, n, _halfspaces=(tuple(d_rays), tuple(d_lin)))

    @cached_property
    def _hrep(self):
        rays, lin = _dual_generators(self.rays, self.lineality, self.n)
        return tuple(rays), tuple(lin)

    @property
    def halfspaces(self) -> tuple:
        """Normals ``y`` with ``<y, x> >= 0`` on the cone."""
        return self._hrep[0]

    @property
    def equations(self) -> tuple:
        """Normals ``y`` with ``<y, x> = 0`` on the cone."""
        return self._hrep[1]

    @cached_property
    def dim(self) -> int:
        return rank(list(self.rays) + list(self.lineality))

    @property
    def is_pointed(self) -> bool:
        return not self.lineality

    def contains(self, x) -> bool:
        return all(dot(y, x) >= 0 for y in self.halfspaces) and all(dot(y, x) == 0 for y in self.equations)

    def contains_interior(self, x) -> bool:
        return all(dot(y, x) > 0 for y in self.halfspaces) and all(dot(y, x) == 0 for y in self.equations)

    def __neg__(self) -> "Cone":
        return Cone([neg(r) for r in self.rays], self.lineality, self.n,
                    _halfspaces=(tuple(neg(y) for y in self.halfspaces), self.equations))

    def _key(self):
        lin = tuple(row_space_basis(self.lineality)) if self.lineality else ()
        return self.n, self.rays, lin

    def __eq__(self, other):
        return isinstance(other, Cone) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.lineality:
            return f"Cone(rays={list(self.rays)}, lineality={list(self.lineality)})"
        return f"Cone(rays={list(self.rays)})"


def dual_cone(c: Cone) -> Cone:
    """``{y : <y, x> >= 0 for all x in c}`` with primitive extremal generators.

    A dual of a non-full-dimensional cone carries ``±`` lineality generators
    spanning the orthogonal complement.
    """
    rays, lin = c.halfspaces, c.equations
    lin_gens = [l for b in lin for l in (b, neg(b))]
    return Cone(rays, lin_gens, c.n, _halfspaces=(c.rays, tuple(row_space_basis(c.lineality)) if c.lineality else ()))


# ----------------------------------------------------------------------------
# polytopes


def _hull(points: Sequence[tuple], directions: Iterable[tuple] | None = None):
    """Exact convex hull of a finite point set.

    ``directions`` optionally lists vectors containing every edge direction of
    the hull (e.g. edges of Minkowski summands); otherwise every hyperplane
    through affinely independent point subsets is tried.

    Returns ``(vertices, facets, equations)`` where facets are
    ``(normal, offset, vertex_index_set)`` with ``<normal, m> <= offset``.
    """
    pts = sorted(set(points))
    n = len(pts[0])
    p0 = pts[0]
    diffs = [sub(p, p0) for p in pts[1:] if p != p0]
    red, piv = rref(diffs) if diffs else ([], [])
    d = len(piv)
    eq_normals = nullspace(red, n) if red else [tuple(int(i == j) for j in range(n)) for i in range(n)]
    equations = tuple((e, normalize(dot(e, p0))) for e in eq_normals)
    if d == 0:
        return (p0,), (), equations

    den = common_denominator(p[c] for p in pts for c in piv)
    S = [tuple(int(frac(p[c]) * den) for c in piv) for p in pts]

    cands: set[tuple] = set()
    if d == 1:
        cands.add((1,))
    elif directions is None:
        for combo in itertools.combinations(range(len(S)), d):
            base = S[combo[0]]
            a = orthogonal_normal([sub(S[i], base) for i in combo[1:]], d)
            if a is not None:
                cands.add(a)
    else:
        dirs = set()
        for v in directions:
            pv = tuple(v[c] for c in piv)
            if any(pv):
                p = primitive(pv)
                dirs.add(max(p, neg(p)))
        dirs = sorted(dirs)
        for combo in itertools.combinations(dirs, d - 1):
            a = orthogonal_normal(list(combo), d)
            if a is not None:
                cands.add(a)

    facets: dict[tuple, tuple] = {}
    for a0 in cands:
        for a in (a0, neg(a0)):
            vals = [dot(a, s) for s in S]
            mx = max(vals)
            tight = [i for i, v in enumerate(vals) if v == mx]
            if len(tight) < d:
                continue
            if affine_rank([S[i] for i in tight]) == d - 1:
                facets[a] = (mx, frozenset(tight))

    vert_idx = [
        i for i in range(len(S))
        if rank([a for a, (_, t) in facets.items() if i in t]) == d
    ]
    renum = {old: new for new, old in enumerate(vert_idx)}
    vertices = tuple(pts[i] for i in vert_idx)
    out = []
    for a, (mx, tight) in sorted(facets.items()):
        normal = [0] * n
        for k, c in enumerate(piv):
            normal[c] = a[k]
        out.append((tuple(normal), normalize(Fraction(mx, den)), frozenset(renum[i] for i in tight if i in renum)))
    return vertices, tuple(out), equations


class Polytope:
    """Bounded convex rational polytope, possibly empty or lower dimensional.

    Holds both a vertex description and an inequality description
    ``{m : <normal, m> <= offset for each facet, <e, m> = c for each equation}``.
    The facets are facets relative to the affine hull.
    """

    def __init__(self, points: Iterable[Sequence], n: int | None = None, *, _directions=None):
        pts = [vec(p) for p in points]
        if not pts:
            if n is None:
                raise GeometryError("ambient rank of an empty polytope must be given")
            self.n = n
            self.vertices = ()
            self._facets = ()
            self.equations = ()
            return
        self.n = len(pts[0])
        if n is not None and n != self.n:
            raise GeometryError("ambient rank mismatch")
        if any(len(p) != self.n for p in pts):
            raise GeometryError("points of differing length")
        self.vertices, self._facets, self.equations = _hull(pts, _directions)

    @classmethod
    def empty(cls, n: int) -> "Polytope":
        return cls([], n)

    @classmethod
    def from_inequalities(cls, normals: Sequence[Sequence], offsets: Sequence, n: int | None = None) -> "Polytope":
        """Polytope ``{m : <normals[i], m> <= offsets[i]}``; must be bounded."""
        if n is None:
            n = len(normals[0])
        offsets = [frac(b) for b in offsets]
        pts = set()
        for combo in itertools.combinations(range(len(normals)), n):
            A = [normals[i] for i in combo]
            if rank(A) < n:
                continue
            x = solve(A, [offsets[i] for i in combo])
            if x is None:
                continue
            if all(dot(a, x) <= b for a, b in zip(normals, offsets)):
                pts.add(x)
        return cls(sorted(pts), n)

    # --- basic data -------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @cached_property
    def dim(self) -> int:
        if self.is_empty:
            return -1
        return self.n - len(self.equations)

    @property
    def facets(self) -> tuple:
        """``(normal, offset)`` pairs of the relative facets."""
        return tuple((a, b) for a, b, _ in self._facets)

    @property
    def facet_vertex_sets(self) -> tuple:
        return tuple(t for _, _, t in self._facets)

    def inequalities(self) -> list[tuple]:
        """All ``(normal, offset)`` with ``<normal, m> <= offset``, equations split in two."""
        out = list(self.facets)
        for e, c in self.equations:
            out.append((e, c))
            out.append((neg(e), -c))
        return out

    @cached_property
    def is_lattice(self) -> bool:
        return all(is_integral(v) for v in self.vertices)

    @cached_property
    def _int_tests(self):
        # floor-offset facets and integral equations for lattice membership
        eqs = []
        for e, c in self.equations:
            if frac(c).denominator != 1:
                return None
            eqs.append((e, int(c)))
        lo = tuple(ceil(min(frac(v[i]) for v in self.vertices)) for i in range(self.n))
        hi = tuple(floor(max(frac(v[i]) for v in self.vertices)) for i in range(self.n))
        return tuple((a, floor(b)) for a, b in self.facets), tuple(eqs), lo, hi

    # --- membership -------------------------------------------------------

    def contains(self, x) -> bool:
        if self.is_empty:
            return False
        if all(type(c) is int for c in x):
            tests = self._int_tests
            if tests is None:
                return False
            ineqs, eqs, lo, hi = tests
            if any(c < l or c > h for c, l, h in zip(x, lo, hi)):
                return False
            return all(dot(a, x) <= b for a, b in ineqs) and all(dot(e, x) == c for e, c in eqs)
        return (all(dot(a, x) <= b for a, b in self.facets)
                and all(dot(e, x) == c for e, c in self.equations))

    def contains_relint(self, x) -> bool:
        """Membership in the relative interior."""
        if self.is_empty:
            return False
        if self.dim == 0:
            return tuple(x) == self.vertices[0]
        return (all(dot(a, x) < b for a, b in self.facets)
                and all(dot(e, x) == c for e, c in self.equations))

    # --- derived polytopes ----------------------------------------------------

    def dilate(self, t) -> "Polytope":
        if self.is_empty:
            return self
        return Polytope([scale(t, v) for v in self.vertices], self.n)

    def translate(self, u) -> "Polytope":
        if self.is_empty:
            return self
        return Polytope([add(v, u) for v in self.vertices], self.n)

    def symmetric(self) -> "Polytope":
        """Central reflection through the origin."""
        if self.is_empty:
            return self
        return Polytope([neg(v) for v in self.vertices], self.n)

    @cached_property
    def edges(self) -> tuple:
        """Vertex index pairs spanning edges."""
        d = self.dim
        if d < 1:
            return ()
        if d == 1:
            return ((0, 1),)
        eq = [e for e, _ in self.equations]
        out = []
        for i, j in itertools.combinations(range(len(self.vertices)), 2):
            common = [a for (a, _), t in zip(self.facets, self.facet_vertex_sets) if i in t and j in t]
            if len(common) >= d - 1 and rank(common + eq) == self.n - 1:
                out.append((i, j))
        return tuple(out)

    def edge_directions(self) -> list[tuple]:
        return [sub(self.vertices[j], self.vertices[i]) for i, j in self.edges]

    @cached_property
    def _face_sets(self) -> list[frozenset]:
        if self.is_empty:
            return []
        full = frozenset(range(len(self.vertices)))
        found = {full}
        frontier = [full]
        fsets = [frozenset(t) for t in self.facet_vertex_sets]
        while frontier:
            nxt = []
            for f in frontier:
                for t in fsets:
                    g = f & t
                    if g and g not in found:
                        found.add(g)
                        nxt.append(g)
            frontier = nxt
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def __eq__(self, other):
        return isinstance(other, Polytope) and self.n == other.n and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.n, self.vertices))

    def __repr__(self):
        if self.is_empty:
            return f"Polytope.empty({self.n})"
        return f"Polytope({[list(v) for v in self.vertices]})"


def point(p) -> Polytope:
    return Polytope([p])


def simplex(n: int) -> Polytope:
    """Standard ``n``-simplex conv(0, e_1, ..., e_n)."""
    pts = [tuple(0 for _ in range(n))] + [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return Polytope(pts)


def cube(n: int) -> Polytope:
    return Polytope(list(itertools.product((0, 1), repeat=n)))


def minkowski_sum(p: Polytope, q: Polytope) -> Polytope:
    """``{x + y : x in p, y in q}``."""
    if p.n != q.n:
        raise GeometryError(f"rank mismatch: {p.n} vs {q.n}")
    if p.is_empty or q.is_empty:
        return Polytope.empty(p.n)
    pts = {add(v, w) for v in p.vertices for w in q.vertices}
    dirs = p.edge_directions() + q.edge_directions()
    return Polytope(sorted(pts), p.n, _directions=dirs)


def faces(p: Polytope) -> list[tuple[Polytope, int]]:
    """Every nonempty face of ``p`` exactly once, with its dimension (``p`` itself included)."""
    out = []
    for s in p._face_sets:
        f = Polytope([p.vertices[i] for i in sorted(s)], p.n)
        out.append((f, f.dim))
    return out


def lattice_points(p: Polytope) -> list[tuple]:
    """Integral points of ``p`` in lexicographic order."""
    if p.is_empty:
        return []
    tests = p._int_tests
    if tests is None:
        return []
    ineqs, eqs, lo, hi = tests
    n = p.n
    if any(l > h for l, h in zip(lo, hi)):
        return []
    rows = [(a, b) for a, b in ineqs] + [(e, c) for e, c in eqs] + [(neg(e), -c) for e, c in eqs]
    last_pos = [(a, b) for a, b in rows if a[-1] > 0]
    last_neg = [(a, b) for a, b in rows if a[-1] < 0]
    rest = [(a, b) for a, b in rows if a[-1] == 0]
    out = []
    for prefix in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(n - 1))):
        if not all(dot(a, prefix) <= b for a, b in rest):
            continue
        top, bot = hi[-1], lo[-1]
        for a, b in last_pos:
            # a_last * z <= b - <a', prefix>
            top = min(top, (b - dot(a[:-1], prefix)) // a[-1])
        for a, b in last_neg:
            bot = max(bot, -((b - dot(a[:-1], prefix)) // -a[-1]))
        for z in range(bot, top + 1):
            out.append(prefix + (z,))
    return out


def count_lattice_points(p: Polytope) -> int:
    return len(lattice_points(p))


def interior_lattice_points(p: Polytope) -> list[tuple]:
    """Integral points of the relative interior, by direct scan."""
    return [x for x in lattice_points(p) if p.contains_relint(x)]


def support_function_eval(p: Polytope, x) -> Fraction | int:
    """``max_{m in p} <m, x>``."""
    if p.is_empty:
        raise GeometryError("support function of the empty polytope")
    if len(x) != p.n:
        raise GeometryError("rank mismatch")
    return max(dot(v, x) for v in p.vertices)


# ----------------------------------------------------------------------------
# fans


class Fan:
    """A fan in ``N_R`` given by primitive rays and maximal cones (sorted ray index tuples)."""

    def __init__(self, rays: Sequence[Sequence[int]], max_cones: Sequence[Sequence[int]], *, check: bool = True):
        self.rays = tuple(tuple(int(x) for x in r) for r in rays)
        if not self.rays:
            raise GeometryError("a fan needs at least one ray")
        self.n = len(self.rays[0])
        self.max_cones = tuple(tuple(sorted(int(i) for i in c)) for c in max_cones)
        if check:
            self._validate()

    def _validate(self):
        if len(set(self.rays)) != len(self.rays):
            raise GeometryError("duplicate rays")
        for r in self.rays:
            if len(r) != self.n:
                raise GeometryError("ray length does not match rank")
            if primitive(r) != r:
                raise GeometryError(f"ray {r} is not primitive")
        for c in self.max_cones:
            if not c or any(i < 0 or i >= len(self.rays) for i in c):
                raise GeometryError(f"bad cone {c}")
            cone = self.cone(c)
            if cone.lineality or len(cone.rays) != len(c):
                raise GeometryError(f"cone {c} has non-extremal rays or is not pointed")
        for a, b in itertools.combinations(range(len(self.max_cones)), 2):
            ca, cb = self.max_cones[a], self.max_cones[b]
            common = tuple(sorted(set(ca) & set(cb)))
            inter = _intersect(self.cone(ca), self.cone(cb))
            if set(inter.rays) != {self.rays[i] for i in common}:
                raise GeometryError(f"cones {ca} and {cb} do not meet in a common face")
            if frozenset(common) not in self._cone_faces(ca) or frozenset(common) not in self._cone_faces(cb):
                raise GeometryError(f"cones {ca} and {cb} do not meet in a common face")

    # --- cones ------------------------------------------------------------------

    def cone(self, idx: Iterable[int]) -> Cone:
        idx = tuple(sorted(idx))
        cache = self.__dict__.setdefault("_cone_cache", {})
        if idx not in cache:
            if idx:
                cache[idx] = Cone.from_generators([self.rays[i] for i in idx], n=self.n)
            else:
                cache[idx] = Cone((), (), self.n)
        return cache[idx]

    def _cone_faces(self, idx: tuple) -> set[frozenset]:
        cache = self.__dict__.setdefault("_face_cache", {})
        if idx in cache:
            return cache[idx]
        c = self.cone(idx)
        full = frozenset(idx)
        facets = [frozenset(i for i in idx if dot(y, self.rays[i]) == 0) for y in c.halfspaces]
        found = {full, frozenset()}
        frontier = [full]
        while frontier:
            nxt = []
            for f in frontier:
                for t in facets:
                    g = f & t
                    if g not in found:
                        found.add(g)
                        nxt.append(g)
            frontier = nxt
        cache[idx] = found
        return found

    def cone_facets(self, idx: tuple) -> list[frozenset]:
        c = self.cone(idx)
        return [frozenset(i for i in idx if dot(y, self.rays[i]) == 0) for y in c.halfspaces]

    @cached_property
    def cones(self) -> tuple[frozenset, ...]:
        """Every cone of the fan (including the zero cone) as a ray index set."""
        allc = set()
        for c in self.max_cones:
            allc |= self._cone_faces(c)
        return tuple(sorted(allc, key=lambda s: (len(s), sorted(s))))

    def cone_dim(self, idx: Iterable[int]) -> int:
        return rank([self.rays[i] for i in idx])

    def max_cones_containing(self, x) -> list[int]:
        return [k for k, c in enumerate(self.max_cones) if self.cone(c).contains(x)]

    def find_max_cone(self, x) -> int:
        for k, c in enumerate(self.max_cones):
            if self.cone(c).contains(x):
                return k
        raise GeometryError(f"{tuple(x)} lies outside the support of the fan")

    @cached_property
    def walls(self) -> tuple[tuple[int, int, frozenset], ...]:
        """Pairs of maximal cones meeting in a codimension-one cone."""
        out = []
        for a, b in itertools.combinations(range(len(self.max_cones)), 2):
            common = frozenset(self.max_cones[a]) & frozenset(self.max_cones[b])
            if common and self.cone_dim(common) == self.n - 1:
                out.append((a, b, common))
        return tuple(out)

    # --- flags ------------------------------------------------------------------

    @cached_property
    def is_complete(self) -> bool:
        for c in self.max_cones:
            if self.cone_dim(c) != self.n:
                return False
        for c in self.max_cones:
            for f in self.cone_facets(c):
                if sum(1 for d in self.max_cones if f <= set(d)) != 2:
                    return False
        for i in range(self.n):
            for s in (1, -1):
                e = tuple(s if j == i else 0 for j in range(self.n))
                if not self.max_cones_containing(e):
                    return False
        return True

    @cached_property
    def is_simplicial(self) -> bool:
        return all(len(c) == self.cone_dim(c) for c in self.max_cones)

    @cached_property
    def is_smooth(self) -> bool:
        for c in self.max_cones:
            if len(c) != self.n or abs(det([self.rays[i] for i in c])) != 1:
                return False
        return True

    @cached_property
    def is_projective(self) -> bool:
        from .piecewise_linear import strictly_convex_witness
        try:
            strictly_convex_witness(self)
        except NotProjectiveError:
            return False
        return True

    def ray_index(self, v) -> int | None:
        try:
            return self.rays.index(tuple(v))
        except ValueError:
            return None

    def _key(self):
        return self.n, frozenset(frozenset(self.rays[i] for i in c) for c in self.max_cones)

    def same_as(self, other: "Fan") -> bool:
        """Equality as sets of cones (ray order ignored)."""
        return self._key() == other._key()

    def __repr__(self):
        return f"Fan(rays={list(self.rays)}, max_cones={list(self.max_cones)})"


def _intersect(a: Cone, b: Cone) -> Cone:
    gens = list(a.halfspaces) + list(b.halfspaces)
    lin = [v for l in list(a.equations) + list(b.equations) for v in (l, neg(l))]
    return dual_cone(Cone.from_generators(gens, lin, a.n))


def intersect_cones(a: Cone, b: Cone) -> Cone:
    return _intersect(a, b)


def _fan_from_cones(cones: Iterable[Cone], n: int, check: bool = False) -> Fan:
    rays: dict[tuple, int] = {}
    maxc = []
    for c in cones:
        for r in c.rays:
            rays.setdefault(r, len(rays))
    order = sorted(rays)
    index = {r: i for i, r in enumerate(order)}
    seen = set()
    for c in cones:
        key = tuple(sorted(index[r] for r in c.rays))
        if key not in seen:
            seen.add(key)
            maxc.append(key)
    return Fan(order, sorted(maxc), check=check)


def normal_fan(p: Polytope) -> Fan:
    """Complete fan whose maximal cones are the loci where a fixed vertex maximizes ``<v, x>``."""
    if p.is_empty or p.dim != p.n:
        raise GeometryError("normal fan needs a full-dimensional polytope")
    rays = [a for a, _ in p.facets]
    cones = [
        tuple(k for k, t in enumerate(p.facet_vertex_sets) if i in t)
        for i in range(len(p.vertices))
    ]
    return Fan(rays, cones, check=False)


def polytope_from_divisor(f: Fan, a: Mapping[int, int] | Sequence[int]) -> Polytope:
    """``P_D = {m : <m, v_rho> >= -a_rho}`` for ``D = sum a_rho D_rho`` (may be empty)."""
    if not f.is_complete:
        raise GeometryError("polytope of a divisor needs a complete fan")
    coeffs = _divisor_coeffs(f, a)
    normals = [neg(v) for v in f.rays]
    return Polytope.from_inequalities(normals, coeffs, f.n)


def _divisor_coeffs(f: Fan, a) -> list[int]:
    if isinstance(a, Mapping):
        return [int(a.get(i, 0)) for i in range(len(f.rays))]
    a = [int(x) for x in a]
    if len(a) != len(f.rays):
        raise GeometryError("one coefficient per ray is required")
    return a


def common_refinement(f1: Fan, f2: Fan) -> Fan:
    """Fan of all full-dimensional intersections ``s1 ∩ s2`` of maximal cones."""
    if f1.n != f2.n:
        raise GeometryError("rank mismatch")
    if not (f1.is_complete and f2.is_complete):
        raise GeometryError("common refinement is only supported for complete fans with equal support")
    cones = []
    for c1 in f1.max_cones:
        for c2 in f2.max_cones:
            c = _intersect(f1.cone(c1), f2.cone(c2))
            if c.dim == f1.n:
                cones.append(c)
    return _fan_from_cones(cones, f1.n)


def refine_by_hyperplanes(f: Fan, normals, per_cone: bool = False) -> Fan:
    """Cut maximal cones of ``f`` by hyperplanes ``<a, x> = 0``.

    With ``per_cone`` the argument is one list of normals per maximal cone;
    this only yields a fan when walls cannot be cut (rank 2).
    """
    def canon(ns):
        return sorted({max(primitive(a), neg(primitive(a))) for a in ns if any(a)})

    if per_cone:
        jobs = [([f.cone(c)], canon(ns)) for c, ns in zip(f.max_cones, normals)]
    else:
        ns = canon(normals)
        jobs = [([f.cone(c)], ns) for c in f.max_cones]
    out = []
    for cones, ns in jobs:
        for a in ns:
            nxt = []
            for c in cones:
                nxt.extend(_cut(c, a))
            cones = nxt
        out.extend(cones)
    return _fan_from_cones(out, f.n)


def _cut(c: Cone, a) -> list[Cone]:
    vals = [dot(a, r) for r in c.rays]
    if all(v >= 0 for v in vals) or all(v <= 0 for v in vals):
        return [c]
    pos = [r for r, v in zip(c.rays, vals) if v > 0]
    negs = [r for r, v in zip(c.rays, vals) if v < 0]
    zero = [r for r, v in zip(c.rays, vals) if v == 0]
    cut = [sub(scale(dot(a, p), q), scale(dot(a, q), p)) for p in pos for q in negs]
    return [Cone.from_generators(side + zero + cut, n=c.n) for side in (pos, negs)]


def stellar_subdivide(f: Fan, ray: Sequence[int]) -> Fan:
    """Insert ``ray`` and split every maximal cone containing it into pyramids over its facets."""
    ray = tuple(int(x) for x in ray)
    if not any(ray) or primitive(ray) != ray:
        raise GeometryError(f"{ray} is not a primitive vector")
    if ray in f.rays:
        return f
    containing = f.max_cones_containing(ray)
    if not containing:
        raise GeometryError(f"{ray} lies outside the support of the fan")
    rays = list(f.rays) + [ray]
    new = len(rays) - 1
    cones = []
    for k, c in enumerate(f.max_cones):
        if k not in containing:
            cones.append(c)
            continue
        for facet in f.cone_facets(c):
            if f.cone(tuple(sorted(facet))).contains(ray):
                continue
            cones.append(tuple(sorted(facet)) + (new,))
    return Fan(rays, cones, check=False)


def refines(fine: Fan, coarse: Fan) -> bool:
    """Every maximal cone of ``fine`` lies in some maximal cone of ``coarse``."""
    for c in fine.max_cones:
        if not any(all(coarse.cone(d).contains(fine.rays[i]) for i in c) for d in coarse.max_cones):
            return False
    return True


# ----------------------------------------------------------------------------
# standard fans


def fan_projective_plane() -> Fan:
    """Fan of P^2 with rays v1=(1,0), v2=(0,1), v3=(-1,-1).

    Maximal cones are ordered as ``sigma_1 = cone(v2, v3)``,
    ``sigma_2 = cone(v3, v1)``, ``sigma_3 = cone(v1, v2)``.
    """
    return Fan([(1, 0), (0, 1), (-1, -1)], [(1, 2), (0, 2), (0, 1)])


def fan_p1xp1() -> Fan:
    return Fan([(1, 0), (0, 1), (-1, 0), (0, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)])


def fan_hirzebruch() -> Fan:
    """First Hirzebruch surface with rays (1,0), (0,1), (-1,1), (0,-1).

    Maximal cones in the order sigma_{1,2}, sigma_{2,3}, sigma_{3,4}, sigma_{4,1}.
    """
    return Fan([(1, 0), (0, 1), (-1, 1), (0, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)])


def fan_projective_space(n: int) -> Fan:
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple(-1 for _ in range(n))]
    cones = [tuple(j for j in range(n + 1) if j != i) for i in range(n + 1)]
    return Fan(rays, cones)
