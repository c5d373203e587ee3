import random
from fractions import Fraction
from math import comb, factorial

import pytest

from conftest import MANIFOLDS, connections
from dgatiyah.algebra import Polynomial, monomials_of_degree
from dgatiyah.char_classes import (EndValuedForm, FormContext, apply_form, as_end_valued_form,
                                   atiyah_form, end_differential, from_end_valued_form,
                                   matrix_power, scalar_atiyah, series_coefficients,
                                   supercommutator, supertrace, todd)
from dgatiyah.connections import (Connection, Tensor, atiyah_tangent, complex_differential,
                                  section_lmul, tangent_bundle)
from dgatiyah.manifest import load
from dgatiyah.vector_fields import VectorField


def bernoulli(n):
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B


def todd_log_oracle(n):
    # log((1 - e^{-t})/t) = -t/2 + sum_{k>=1} B_{2k} t^{2k} / (2k (2k)!)
    B = bernoulli(n)
    out = [Fraction(0)] * (n + 1)
    if n >= 1:
        out[1] = Fraction(-1, 2)
    for k in range(2, n + 1, 2):
        out[k] = B[k] / (k * factorial(k))
    return out


def test_series_examples():
    assert series_coefficients("exp", 3) == [1, 1, Fraction(1, 2), Fraction(1, 6)]
    assert series_coefficients("log", 3) == [0, 1, Fraction(-1, 2), Fraction(1, 3)]
    a = series_coefficients("todd-log", 4)
    assert a[1:] == [Fraction(-1, 2), Fraction(1, 24), 0, Fraction(-1, 2880)]
    with pytest.raises(KeyError):
        series_coefficients("sin", 3)


@pytest.mark.parametrize("n", [6, 10])
def test_todd_log_against_bernoulli(n):
    assert series_coefficients("todd-log", n) == todd_log_oracle(n)


def test_as_form_of_zero_cocycle():
    M = MANIFOLDS["abelian3"]
    assert not atiyah_form(M, Connection.trivial(M.ctx))


def test_solvable_form_entries():
    M = MANIFOLDS["solvable2"]
    alpha = atiyah_form(M, Connection.trivial(M.ctx))
    f = alpha.fctx
    assert alpha.entries == {(1, 1): f.dx(0), (1, 0): -f.dx(1)}


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_form_roundtrip_and_evaluation(name):
    M = MANIFOLDS[name]
    ctx = M.ctx
    E = tangent_bundle(M)
    rng = random.Random(1)
    monos = [m for d in range(-2, 3) for m in monomials_of_degree(ctx, d, 2)]
    for nabla in connections(M, seed=2):
        At = atiyah_tangent(M, nabla)
        alpha = as_end_valued_form(At)
        assert from_end_valued_form(alpha) == At
        assert alpha.degree in (2, None)
        for _ in range(6):
            f = Polynomial(ctx, {rng.choice(monos): Fraction(rng.randint(1, 3))})
            g = Polynomial(ctx, {rng.choice(monos): Fraction(rng.randint(1, 3))})
            X = f * VectorField.coordinate(ctx, rng.randrange(len(ctx)))
            s = section_lmul(g, E.basis(rng.randrange(E.rank)))
            assert apply_form(alpha, X, s) == At.evaluate(X, s)


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_form_differential_matches_tensor_differential(name):
    M = MANIFOLDS[name]
    ctx = M.ctx
    E = tangent_bundle(M)
    rng = random.Random(3)
    for p in (0, 1, 2):
        probe = Tensor(ctx, E.frame, p, {})
        table = {}
        for i in range(len(ctx)):
            for b in range(E.rank):
                row = [ctx.zero()] * E.rank
                for a in range(E.rank):
                    want = probe.required_degree(i, b, a)
                    for m in monomials_of_degree(ctx, want, 2):
                        if rng.random() < 0.4:
                            row[a] = row[a] + Polynomial(ctx, {m: Fraction(rng.randint(-2, 2))})
                table[(i, b)] = tuple(row)
        phi = Tensor(ctx, E.frame, p, table)
        lhs = as_end_valued_form(complex_differential(phi, E))
        rhs = end_differential(as_end_valued_form(phi), E)
        assert lhs == rhs


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_atiyah_form_closed_and_traces_closed(name):
    M = MANIFOLDS[name]
    E = tangent_bundle(M)
    for nabla in connections(M, seed=4):
        alpha = atiyah_form(M, nabla)
        assert not end_differential(alpha, E)
        LQ = alpha.fctx.lie_derivative(M)
        for k in range(1, 4):
            assert not LQ.apply(supertrace(matrix_power(alpha, k)))


def test_powers():
    M = MANIFOLDS["sl2"]
    alpha = atiyah_form(M, Connection.trivial(M.ctx))
    assert matrix_power(alpha, 0) == EndValuedForm.identity(alpha.fctx, alpha.frame)
    assert matrix_power(alpha, 1) == alpha
    assert matrix_power(alpha, 3) == (alpha @ alpha) @ alpha == alpha @ (alpha @ alpha)
    for k in range(4):
        p = matrix_power(alpha, k)
        for v in p.entries.values():
            assert {alpha.fctx.wedge_degree(m) for m in v.terms} == {k}


def test_nilpotent_on_heisenberg():
    M = MANIFOLDS["heisenberg3"]
    alpha = atiyah_form(M, Connection.trivial(M.ctx))
    assert alpha and not matrix_power(alpha, 2)
    assert todd(M, Connection.trivial(M.ctx), 5) == alpha.fctx.ctx.one()


def test_supertrace_examples():
    M = MANIFOLDS["r11"]
    f = FormContext(M.ctx)
    assert supertrace(EndValuedForm.identity(f, (0, 1))) == f.ctx.zero()
    assert supertrace(EndValuedForm.zero(f, (0, 1))) == f.ctx.zero()


def random_form_matrix(fctx, frame, rng, length=2):
    monos = [m for d in range(-3, 5) for m in monomials_of_degree(fctx.ctx, d, length)]
    entries = {}
    for a in range(len(frame)):
        for b in range(len(frame)):
            if rng.random() < 0.6:
                entries[(a, b)] = Polynomial(fctx.ctx, {rng.choice(monos): Fraction(rng.randint(-3, 3))})
    return EndValuedForm(fctx, frame, entries)


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_supertrace_kills_commutators(name):
    M = MANIFOLDS[name]
    fctx = FormContext(M.ctx)
    frame = tangent_bundle(M).frame
    rng = random.Random(len(name))
    for _ in range(25):
        A = random_form_matrix(fctx, frame, rng)
        B = random_form_matrix(fctx, frame, rng)
        assert not supertrace(supercommutator(A, B))


def test_scalar_classes():
    M = MANIFOLDS["abelian3"]
    assert not scalar_atiyah(M, Connection.trivial(M.ctx), 1).form
    M = MANIFOLDS["solvable2"]
    c1 = scalar_atiyah(M, Connection.trivial(M.ctx), 1)
    assert c1.form == -FormContext(M.ctx).dx(0)
    assert c1.prefactor == "(i/2pi)^1"
    c2 = scalar_atiyah(M, Connection.trivial(M.ctx), 2)
    assert c2.form == (FormContext(M.ctx).dx(0) ** 2).scale(Fraction(-1, 2))


def test_todd_without_q():
    for name in ("abelian3",):
        M = MANIFOLDS[name]
        for K in range(4):
            assert todd(M, Connection.trivial(M.ctx), K) == FormContext(M.ctx).ctx.one()


def test_todd_solvable():
    M = MANIFOLDS["solvable2"]
    f = FormContext(M.ctx)
    got = todd(M, Connection.trivial(M.ctx), 2)
    assert got == f.ctx.one() + f.dx(0).scale(Fraction(1, 2)) + (f.dx(0) ** 2).scale(Fraction(1, 12))


def _matrix_log_route(alpha, K):
    """exp(str(log M)) with M = (1 - e^{-alpha})/alpha expanded as matrix series."""
    fctx = alpha.fctx
    one = EndValuedForm.identity(fctx, alpha.frame)
    N = EndValuedForm.zero(fctx, alpha.frame)
    power = one
    for k in range(1, K + 1):
        power = (power @ alpha).truncate(K)
        N = N + power.scale(Fraction((-1) ** k, factorial(k + 1)))
    L = EndValuedForm.zero(fctx, alpha.frame)
    power = one
    for j in range(1, K + 1):
        power = (power @ N).truncate(K)
        L = L + power.scale(Fraction((-1) ** (j + 1), j))
    w = supertrace(L)
    out, term = fctx.ctx.one(), fctx.ctx.one()
    for j in range(1, K + 1):
        term = fctx.truncate(term * w, K).scale(Fraction(1, j))
        out = out + term
    return out


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_todd_matches_matrix_log(name):
    M = MANIFOLDS[name]
    for nabla in connections(M, seed=9):
        alpha = atiyah_form(M, nabla)
        K = 3
        assert todd(M, nabla, K) == _matrix_log_route(alpha, K)


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_todd_components_closed(name):
    M = MANIFOLDS[name]
    f = FormContext(M.ctx)
    LQ = f.lie_derivative(M)
    for nabla in connections(M, seed=10):
        td = todd(M, nabla, 3)
        for k in range(4):
            assert not LQ.apply(f.wedge_component(td, k))


def test_todd_truncation_consistent():
    M = MANIFOLDS["sl2"]
    f = FormContext(M.ctx)
    nabla = Connection.trivial(M.ctx)
    assert f.truncate(todd(M, nabla, 4), 2) == todd(M, nabla, 2)


def test_bundle_classes():
    m = load("emin")
    w = scalar_atiyah(m.manifold, m.bundle_connection, 1, m.bundle).form
    LQ = FormContext(m.manifold.ctx).lie_derivative(m.manifold)
    assert not LQ.apply(w)
