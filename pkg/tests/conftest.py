import random

import pytest

from dgatiyah.cohomology import abelian, ce_manifold, heisenberg3, sl2, solvable2
from dgatiyah.connections import Connection, random_connection
from dgatiyah.manifest import load
from dgatiyah.vector_fields import DgManifold


def r11():
    return DgManifold.from_strings([("x", 0), ("xi", 1)], {"x": "xi"})


def r11n():
    return DgManifold.from_strings([("x", 0), ("xi", 1)], {"x": "x^2*xi"})


def emin():
    return load("emin").manifold


def manifolds():
    return {
        "abelian3": ce_manifold(abelian(3)),
        "solvable2": ce_manifold(solvable2()),
        "sl2": ce_manifold(sl2()),
        "heisenberg3": ce_manifold(heisenberg3()),
        "r11": r11(),
        "r11n": r11n(),
        "emin": emin(),
        "graded12": load("graded12").manifold,
    }


def connections(M, seed=0, torsion_free=False):
    """Trivial connection plus one random degree-correct connection where one exists."""
    rng = random.Random(seed)
    out = [Connection.trivial(M.ctx)]
    nabla = random_connection(M.ctx, rng, torsion_free=torsion_free)
    if nabla.gamma:
        out.append(nabla)
    return out


MANIFOLDS = manifolds()


@pytest.fixture(params=sorted(MANIFOLDS))
def manifold(request):
    return MANIFOLDS[request.param]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
