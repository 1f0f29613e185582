import random
from pathlib import Path

import pytest

from toric_chains.lattice_core import Polytope, fan_hirzebruch, fan_p1xp1, fan_projective_plane
from toric_chains.linalg import det
from toric_chains.toric_bundle import Filtration, KlyachkoBundle, Subspace, tangent_bundle

FIXTURES = Path(__file__).parent / "fixtures"


def hirzebruch_example() -> KlyachkoBundle:
    E = Subspace.full(2)

    def line(*v):
        return Subspace([v], 2)

    filts = {
        0: Filtration([(-2, E), (4, line(1, 0))], 2),
        1: Filtration([(2, E), (3, line(1, 0))], 2),
        2: Filtration([(0, E), (5, line(0, 1))], 2),
        3: Filtration([(-1, E), (3, line(1, 1))], 2),
    }
    return KlyachkoBundle(fan_hirzebruch(), 2, filts)


def tangent_p2() -> KlyachkoBundle:
    return tangent_bundle(fan_projective_plane())


SMALL_FANS = {"P2": fan_projective_plane, "P1xP1": fan_p1xp1, "H1": fan_hirzebruch}


def random_basis(rng: random.Random, r: int, lo: int = -2, hi: int = 2) -> list[tuple]:
    while True:
        rows = [tuple(rng.randint(lo, hi) for _ in range(r)) for _ in range(r)]
        if det(rows) != 0:
            return rows


def random_filtration(rng: random.Random, r: int, lo: int = -3, hi: int = 3) -> Filtration:
    """Random strictly decreasing flag cut from one random basis."""
    basis = random_basis(rng, r)
    k = rng.randint(1, r)
    dims = [r] + sorted(rng.sample(range(1, r), k - 1), reverse=True)
    ts = sorted(rng.sample(range(lo, hi + 1), k))
    return Filtration([(t, Subspace(basis[:d], r)) for t, d in zip(ts, dims)], r)


def random_bundle(rng: random.Random, fan, r: int) -> KlyachkoBundle:
    """Any family of flags on a rank-2 fan is compatible (two flags always admit a common basis)."""
    return KlyachkoBundle(fan, r, {i: random_filtration(rng, r) for i in range(len(fan.rays))})


def random_polytope(rng: random.Random, n: int, lo: int = -5, hi: int = 5, max_points: int = 7) -> Polytope:
    k = rng.randint(1, max_points)
    return Polytope([tuple(rng.randint(lo, hi) for _ in range(n)) for _ in range(k)], n)


@pytest.fixture
def rng():
    return random.Random(20240611)
