import random
from fractions import Fraction

import pytest

from dgatiyah import linalg
from dgatiyah.cohomology import (SIGMA, JacobiError, LieAlgebraData, UnboundedSliceError,
                                 abelian, assemble_slice, bracket_class_check, catalog,
                                 ce_cohomology_dim, ce_manifold, cohomology_dim, duflo_compare,
                                 duflo_oracle, heisenberg3, invariants_dim, is_exact, sl2,
                                 solvable2, structure_tensor)
from dgatiyah.connections import (Connection, atiyah_tangent, complex_differential,
                                  connection_difference, random_connection, tangent_bundle)
from dgatiyah.manifest import load
from dgatiyah.vector_fields import VectorField, validate_homological

ALGEBRAS = [abelian(1), abelian(3), solvable2(), sl2(), heisenberg3()]


def test_linalg_basics():
    A = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    assert linalg.rank(A) == 2
    ns = linalg.nullspace(A, 3)
    assert len(ns) == 1
    assert linalg.matvec(A, ns[0]) == [0, 0, 0]
    x = linalg.solve(A, [6, 12, 2], 3)
    assert linalg.matvec(A, x) == [6, 12, 2]
    assert linalg.solve(A, [1, 0, 0], 3) is None


def test_ce_examples():
    assert not ce_manifold(abelian(3)).Q
    M = ce_manifold(solvable2())
    assert M.Q == VectorField.from_dict(M.ctx, {"xi2": "-xi1*xi2"})
    assert validate_homological(ce_manifold(sl2())).passed


def test_jacobi_violation_reported():
    bad = LieAlgebraData.from_constants(3, [(1, 2, 3, 1), (2, 3, 1, 1), (1, 3, 3, 1)])
    with pytest.raises(JacobiError) as err:
        ce_manifold(bad)
    assert err.value.triple == (1, 2, 3)
    assert not validate_homological(ce_manifold(bad, check=False)).passed


def test_catalog():
    assert catalog("abelian4").dim == 4
    assert catalog("sl2").jacobi_violation() is None
    with pytest.raises(KeyError):
        catalog("so3x")


def test_unbounded_slice_rejected():
    with pytest.raises(UnboundedSliceError):
        assemble_slice(load("r11").manifold, "tensor", 1)


@pytest.mark.parametrize("g", ALGEBRAS, ids=lambda g: g.name)
def test_d_squared_zero(g):
    M = ce_manifold(g)
    for space in ("functions", "omega:1", "omega:2", "tensor"):
        for d in range(0, 3):
            a, b = assemble_slice(M, space, d), assemble_slice(M, space, d + 1)
            if not (a.basis and b.basis and b.target_basis):
                continue
            for c in range(len(a.basis)):
                col = [row[c] for row in a.matrix]
                assert not any(linalg.matvec(b.matrix, col))


def test_abelian_differential_zero():
    M = ce_manifold(abelian(2))
    for space in ("functions", "omega:1", "tensor"):
        for d in range(0, 3):
            s = assemble_slice(M, space, d)
            assert s.rank == 0
            assert cohomology_dim(M, space, d) == len(s.basis)


@pytest.mark.parametrize("g", [abelian(2), abelian(3), solvable2(), sl2(), heisenberg3()],
                         ids=lambda g: g.name)
@pytest.mark.parametrize("k", [0, 1, 2])
def test_forms_match_invariants(g, k):
    assert cohomology_dim(ce_manifold(g), f"omega:{k}", k) == invariants_dim(g, k)


def test_named_dimensions():
    assert cohomology_dim(ce_manifold(sl2()), "omega:2", 2) == 1
    assert invariants_dim(sl2(), 2) == 1
    assert cohomology_dim(ce_manifold(solvable2()), "omega:1", 1) == 1


@pytest.mark.parametrize("g", [solvable2(), sl2(), heisenberg3()], ids=lambda g: g.name)
def test_tensor_dimensions_match_ce(g):
    M = ce_manifold(g)
    for k in (1, 2):
        assert cohomology_dim(M, "tensor", k) == ce_cohomology_dim(g, k - 1)


def test_ce_oracle_on_trivial_module():
    # H^*(sl2, R) = R in degrees 0 and 3
    g = sl2()
    triv = [[[Fraction(0)]] for _ in range(3)]
    assert [ce_cohomology_dim(g, p, triv) for p in range(4)] == [1, 0, 0, 1]


def test_is_exact_zero_and_primitive():
    zero = structure_tensor(abelian(3), ce_manifold(abelian(3)))
    assert is_exact(ce_manifold(abelian(3)), "tensor", zero, degree=1)[0]
    m = load("graded12")
    At = atiyah_tangent(m.manifold, m.connection)
    At0 = atiyah_tangent(m.manifold, Connection.trivial(m.manifold.ctx))
    ok, prim = is_exact(m.manifold, "tensor", At - At0)
    assert ok
    assert complex_differential(prim, tangent_bundle(m.manifold)) == At - At0
    assert not connection_difference(m.connection, Connection.trivial(m.manifold.ctx)).is_zero()


def test_sl2_atiyah_not_exact():
    M = ce_manifold(sl2())
    At = atiyah_tangent(M, Connection.trivial(M.ctx))
    assert not is_exact(M, "tensor", At)[0]


def test_non_cocycle_rejected():
    M = ce_manifold(sl2())
    with pytest.raises(ValueError):
        is_exact(M, "functions", M.ctx.var(0))


@pytest.mark.parametrize("g", ALGEBRAS, ids=lambda g: g.name)
def test_bracket_class(g):
    rep = bracket_class_check(g)
    assert rep.passed
    assert rep.data["literal_match"]
    assert rep.data["atiyah_exact"] == (not g.c)


@pytest.mark.parametrize("g", ALGEBRAS, ids=lambda g: g.name)
def test_random_connection_degenerates_to_trivial(g):
    M = ce_manifold(g)
    nabla = random_connection(M.ctx, random.Random(0))
    assert not nabla.gamma
    assert bracket_class_check(g, nabla).passed


def test_duflo_oracle_values():
    x = duflo_oracle(solvable2(), 2)
    assert str(x) == "1/6*x1^2 - 1/2*x1 + 1"
    assert str(duflo_oracle(abelian(2), 3)) == "1"


@pytest.mark.parametrize("g", ALGEBRAS, ids=lambda g: g.name)
@pytest.mark.parametrize("K", [1, 2, 3])
def test_duflo(g, K):
    rep = duflo_compare(g, K)
    assert rep.passed, rep.failures
    assert rep.data["sigma"] == SIGMA


def test_duflo_wrong_sigma_fails():
    assert not duflo_compare(solvable2(), 2, sigma=1).passed
    assert not duflo_compare(sl2(), 2, sigma=1).passed
