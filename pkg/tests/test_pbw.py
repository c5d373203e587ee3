import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import MANIFOLDS, connections, r11n
from dgatiyah.algebra import GradedContext, koszul, monomials_of_degree, Polynomial
from dgatiyah.connections import Connection, DegreeError, atiyah_tangent, random_connection
from dgatiyah.manifest import load
from dgatiyah.pbw import (PBW, DiffOperator, SymTensor, TransferredBrackets, default_generators,
                          jacobi_residual, linfty_check, lq_diffop, pbw, pbw_inverse,
                          pbw_roundtrip_check, sym_product, words_up_to)
from dgatiyah.vector_fields import VectorField, bracket

X_CTX = GradedContext([("x", 0)])
XI_CTX = GradedContext([("xi", 1)])


def test_composition_leibniz():
    x = X_CTX.var(0)
    got = DiffOperator.partial(X_CTX, 0) @ DiffOperator.function(x)
    assert got == DiffOperator.identity(X_CTX) + DiffOperator.partial(X_CTX, 0).lmul(x)
    xi = XI_CTX.var(0)
    got = DiffOperator.partial(XI_CTX, 0) @ DiffOperator.function(xi)
    assert got == DiffOperator.identity(XI_CTX) - DiffOperator.partial(XI_CTX, 0).lmul(xi)
    f, g = x ** 2, x + 1
    assert DiffOperator.function(f) @ DiffOperator.function(g) == DiffOperator.function(f * g)


def test_composition_acts_as_composition():
    M = MANIFOLDS["r11n"]
    ctx = M.ctx
    D1 = DiffOperator.vector_field(VectorField.from_dict(ctx, {"x": "x*xi", "xi": "x"}))
    D2 = DiffOperator(ctx, {(1, 1): ctx.parse("x^2"), (0, 1): ctx.one()})
    for f in (ctx.parse("x^3*xi"), ctx.parse("x^2 + xi"), ctx.parse("xi*x")):
        assert (D1 @ D2).apply(f) == D1.apply(D2.apply(f))


def test_pbw_base_cases():
    M = MANIFOLDS["r11n"]
    nabla = load("r11n").connection
    f = M.ctx.parse("x^2*xi + x")
    assert pbw(SymTensor.function(f), nabla) == DiffOperator.function(f)
    X = VectorField.from_dict(M.ctx, {"x": "x", "xi": "x^3"})
    assert pbw(SymTensor.vector_field(X), nabla) == DiffOperator.vector_field(X)
    assert pbw_inverse(DiffOperator.function(f), nabla) == SymTensor.function(f)


def test_trivial_connection_normal_orders():
    ctx = GradedContext([("x", 0), ("y", 0), ("xi", 1), ("eta", 1)])
    P = PBW(Connection.trivial(ctx))
    for i in range(4):
        for j in range(4):
            word = SymTensor.word(ctx, [int(k == i) for k in range(4)]).sym(
                SymTensor.word(ctx, [int(k == j) for k in range(4)]))
            op = DiffOperator.partial(ctx, i) @ DiffOperator.partial(ctx, j)
            assert P(word) == op
            assert P.inverse(op) == word


def test_pbw_needs_torsion_free():
    with pytest.raises(DegreeError):
        PBW(load("r11").connection)


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_roundtrip(name):
    M = MANIFOLDS[name]
    for nabla in connections(M, seed=4, torsion_free=True):
        assert pbw_roundtrip_check(nabla, 3, coeff_length=2).passed


def _ops(ctx, order):
    words = words_up_to(ctx, order)
    monos = []
    for d in range(-2, 4):
        monos += monomials_of_degree(ctx, d, 2)
    entry = st.tuples(st.sampled_from(words), st.sampled_from(monos), st.integers(-3, 3))
    return st.lists(entry, max_size=4).map(
        lambda es: DiffOperator(ctx, _collect(ctx, es)))


def _collect(ctx, entries):
    out = {}
    for w, m, c in entries:
        out[w] = out.get(w, ctx.zero()) + Polynomial(ctx, {m: Fraction(c)})
    return out


R11N = MANIFOLDS["r11n"]
R11N_NABLA = load("r11n").connection


@given(_ops(R11N.ctx, 3))
@settings(max_examples=40, deadline=None)
def test_random_operator_roundtrip(D):
    P = PBW(R11N_NABLA)
    assert P(P.inverse(D)) == D


@given(_ops(R11N.ctx, 3))
@settings(max_examples=40, deadline=None)
def test_lq_squares_to_zero(D):
    assert not lq_diffop(R11N, lq_diffop(R11N, D))


def test_lq_on_functions_and_fields():
    M = R11N
    f = M.ctx.parse("x^3")
    assert lq_diffop(M, DiffOperator.function(f)) == DiffOperator.function(M.Q.apply(f))
    X = VectorField.coordinate(M.ctx, "xi")
    assert lq_diffop(M, DiffOperator.vector_field(X)) == DiffOperator.vector_field(bracket(M.Q, X))


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_delta_squares_to_zero(name):
    M = MANIFOLDS[name]
    for nabla in connections(M, seed=6, torsion_free=True):
        br = TransferredBrackets(M, nabla)
        for alpha in words_up_to(M.ctx, 3):
            s = SymTensor.word(M.ctx, alpha)
            assert not br.delta(br.delta(s)), alpha


def test_delta_low_orders():
    M = R11N
    br = TransferredBrackets(M, R11N_NABLA)
    f = M.ctx.parse("x^2")
    assert br.delta(SymTensor.function(f)) == SymTensor.function(M.Q.apply(f))
    X = VectorField.from_dict(M.ctx, {"x": "xi"})
    assert br.delta(SymTensor.vector_field(X)) == SymTensor.vector_field(bracket(M.Q, X))


@pytest.mark.parametrize("name", sorted(MANIFOLDS))
def test_lambda2_is_atiyah(name):
    M = MANIFOLDS[name]
    ctx = M.ctx
    fields = [VectorField.coordinate(ctx, i) for i in range(len(ctx))]
    for nabla in connections(M, seed=7, torsion_free=True):
        br = TransferredBrackets(M, nabla)
        At = atiyah_tangent(M, nabla)
        for X in fields:
            assert br([X]) == bracket(M.Q, X)
            for Y in fields:
                assert br([X, Y]) == At.evaluate_fields(X, Y)
                assert br.lambda_direct([X, Y]) == br([X, Y])


def test_solvable_lambda2_value():
    M = MANIFOLDS["solvable2"]
    br = TransferredBrackets(M, Connection.trivial(M.ctx))
    d1, d2 = (VectorField.coordinate(M.ctx, i) for i in range(2))
    assert br([d1, d2]) == d2


def test_brackets_vanish_without_q():
    M = MANIFOLDS["abelian3"]
    br = TransferredBrackets(M, Connection.trivial(M.ctx))
    gens = default_generators(M.ctx, 1)
    for k in (1, 2, 3):
        for i in range(0, len(gens), 5):
            assert not br(gens[i:i + k])


@pytest.mark.parametrize("k", [2, 3])
def test_multilinear_over_functions(k):
    M = R11N
    ctx = M.ctx
    br = TransferredBrackets(M, R11N_NABLA)
    rng = random.Random(k)
    gens = default_generators(ctx, 1)
    for _ in range(10):
        xs = [rng.choice(gens) for _ in range(k)]
        direct = br.lambda_direct(xs)
        assert br(xs) == direct
        for f in (ctx.parse("x"), ctx.parse("xi"), ctx.parse("x*xi")):
            pos = rng.randrange(k)
            ys = list(xs)
            ys[pos] = f * xs[pos]
            passed = 1 + sum(x.degree for x in xs[:pos])
            expect = (f * direct).scale(koszul(f.degree, passed))
            assert br.lambda_direct(ys) == expect


@pytest.mark.parametrize("name", ["solvable2", "sl2", "r11n", "emin"])
def test_generalized_jacobi_to_arity_three(name):
    M = MANIFOLDS[name]
    for nabla in connections(M, seed=8, torsion_free=True):
        rep = linfty_check(M, nabla, 3, generators=default_generators(M.ctx, 1), max_tuples=150)
        assert rep.passed, rep.failures[:1]


class _Corrupted(TransferredBrackets):
    def __call__(self, fields):
        out = super().__call__(fields)
        return out.scale(2) if len(fields) == 3 else out


def test_jacobi_residual_detects_wrong_bracket():
    M = R11N
    br = _Corrupted(M, R11N_NABLA)
    gens = default_generators(M.ctx, 1)
    found = False
    for a in gens:
        for b in gens:
            for c in gens:
                for d in gens[:4]:
                    if jacobi_residual(br, [a, b, c, d]):
                        found = True
                        break
    assert found
