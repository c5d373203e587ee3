"""Differential operators, the PBW map and the transferred L-infinity[1] brackets.

A :class:`DiffOperator` is stored in normal form ``sum f_alpha d^alpha`` with
the partials ordered by coordinate declaration order (functions to the
left).  A :class:`SymTensor` is an element ``sum f_alpha d^{.alpha}`` of
Gamma(S(TM)), with the symmetric product of coordinate fields canonicalised
by the Koszul rule.  The partial ``d_i`` has degree ``-|x_i|``; parity is
that of ``x_i``, so the monomial sign rule of :mod:`dgatiyah.algebra`
applies verbatim to both.
"""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Optional, Sequence

from .algebra import GradedContext, Polynomial, koszul, mono_mul, monomials_of_degree
from .connections import Connection, DegreeError, is_torsion_free
from .report import CheckReport
from .vector_fields import DgManifold, VectorField, bracket


def _exp_degree(ctx: GradedContext, alpha) -> int:
    return -sum(a * d for a, d in zip(alpha, ctx.degrees))


def _expand(alpha) -> list:
    out = []
    for i, a in enumerate(alpha):
        out.extend([i] * a)
    return out


def _unit(ctx, i) -> tuple:
    e = [0] * len(ctx)
    e[i] = 1
    return tuple(e)


class _Terms:
    """Shared storage for ``alpha -> coefficient polynomial`` maps."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: GradedContext, terms: Optional[dict] = None):
        self.ctx = ctx
        self.terms = {a: p for a, p in (terms or {}).items() if p}

    def _new(self, terms):
        return type(self)(self.ctx, terms)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        t = dict(self.terms)
        for a, p in other.terms.items():
            t[a] = t[a] + p if a in t else p
        return self._new(t)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        return self._new({a: p.scale(c) for a, p in self.terms.items()})

    def lmul(self, f: Polynomial):
        """Left multiplication by a function."""
        return self._new({a: f * p for a, p in self.terms.items()})

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def component(self, n: int):
        return self._new({a: p for a, p in self.terms.items() if sum(a) == n})

    def truncate(self, n: int):
        return self._new({a: p for a, p in self.terms.items() if sum(a) <= n})

    def term_degrees(self):
        for a, p in self.terms.items():
            e = _exp_degree(self.ctx, a)
            for m in p.terms:
                yield self.ctx.monomial_degree(m) + e

    @property
    def degree(self):
        degs = set(self.term_degrees())
        return degs.pop() if len(degs) == 1 else None

    def homogeneous_parts(self) -> dict:
        parts: dict = {}
        for a, p in self.terms.items():
            e = _exp_degree(self.ctx, a)
            for d, piece in p.homogeneous_parts().items():
                bucket = parts.setdefault(d + e, {})
                bucket[a] = bucket[a] + piece if a in bucket else piece
        return {d: self._new(t) for d, t in sorted(parts.items())}

    _symbol = "d"
    _join = "*"

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.ctx.names
        out = []
        for a in sorted(self.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
            word = self._join.join(
                f"{self._symbol}_{names[i]}" + (f"^{k}" if k > 1 else "")
                for i, k in enumerate(a) if k
            )
            coef = f"({self.terms[a]})"
            out.append(f"{coef}*{word}" if word else coef)
        return " + ".join(out)

    def __repr__(self):
        return f"{type(self).__name__}({self})"

    def to_dict(self) -> dict:
        names = self.ctx.names
        out = {}
        for a, p in sorted(self.terms.items()):
            key = self._join.join(f"d_{names[i]}" + (f"^{k}" if k > 1 else "")
                                  for i, k in enumerate(a) if k) or "1"
            out[key] = str(p)
        return out


class DiffOperator(_Terms):
    """Normal-ordered differential operator with polynomial coefficients."""

    __slots__ = ()

    @classmethod
    def function(cls, f: Polynomial) -> "DiffOperator":
        return cls(f.ctx, {(0,) * len(f.ctx): f})

    @classmethod
    def identity(cls, ctx: GradedContext) -> "DiffOperator":
        return cls.function(ctx.one())

    @classmethod
    def vector_field(cls, X: VectorField) -> "DiffOperator":
        return cls(X.ctx, {_unit(X.ctx, k): c for k, c in enumerate(X.coeffs) if c})

    @classmethod
    def partial(cls, ctx: GradedContext, i: int) -> "DiffOperator":
        return cls(ctx, {_unit(ctx, i): ctx.one()})

    def apply(self, f: Polynomial) -> Polynomial:
        out = self.ctx.zero()
        for a, c in self.terms.items():
            g = f
            for i in reversed(_expand(a)):
                g = g.partial(i)
                if not g:
                    break
            if g:
                out = out + c * g
        return out

    __call__ = apply

    def _partial_then(self, i: int) -> "DiffOperator":
        """d_i o self, normal ordered."""
        ctx = self.ctx
        di = ctx.degrees[i]
        odd_i = ctx.odd[i]
        out: dict = {}

        def add(a, p):
            if p:
                out[a] = out[a] + p if a in out else p

        for a, g in self.terms.items():
            add(a, g.partial(i))
            if odd_i and a[i]:
                continue
            passed = sum(a[j] * ctx.degrees[j] for j in range(i))
            s_word = koszul(di, passed)
            b = list(a)
            b[i] += 1
            b = tuple(b)
            for mono in g.monomials():
                add(b, mono.scale(s_word * koszul(di, mono.degree)))
        return DiffOperator(ctx, out)

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """self o other."""
        total = DiffOperator(self.ctx)
        for a, f in self.terms.items():
            d = other
            for i in reversed(_expand(a)):
                d = d._partial_then(i)
            total = total + d.lmul(f)
        return total

    def __matmul__(self, other):
        return self.compose(other)


def compose(D1: DiffOperator, D2: DiffOperator) -> DiffOperator:
    return D1.compose(D2)


class SymTensor(_Terms):
    """Element of Gamma(S(TM)): sum f_alpha d_{i1}.d_{i2}...  (symmetric product)."""

    __slots__ = ()
    _symbol = "d"
    _join = "."

    @classmethod
    def function(cls, f: Polynomial) -> "SymTensor":
        return cls(f.ctx, {(0,) * len(f.ctx): f})

    @classmethod
    def vector_field(cls, X: VectorField) -> "SymTensor":
        return cls(X.ctx, {_unit(X.ctx, k): c for k, c in enumerate(X.coeffs) if c})

    @classmethod
    def word(cls, ctx: GradedContext, alpha) -> "SymTensor":
        return cls(ctx, {tuple(alpha): ctx.one()})

    def sym(self, other: "SymTensor") -> "SymTensor":
        """(f u).(g v) = (-1)^{|u||g|} f g (u.v)."""
        ctx = self.ctx
        out: dict = {}
        for a, f in self.terms.items():
            da = _exp_degree(ctx, a)
            for b, g in other.terms.items():
                r = mono_mul(ctx, a, b)
                if r is None:
                    continue
                s, ab = r
                for mono in g.monomials():
                    v = (f * mono).scale(s * koszul(da, mono.degree))
                    if v:
                        out[ab] = out[ab] + v if ab in out else v
        return SymTensor(ctx, out)

    def vector_part(self) -> VectorField:
        """The S^1 component as a vector field."""
        ctx = self.ctx
        co = [ctx.zero()] * len(ctx)
        for a, p in self.terms.items():
            if sum(a) == 1:
                co[a.index(1)] = p
        return VectorField(ctx, co)


def sym_product(tensors: Sequence[SymTensor], ctx: GradedContext) -> SymTensor:
    out = SymTensor.function(ctx.one())
    for t in tensors:
        out = out.sym(t)
    return out


def lq_diffop(M: DgManifold, D: DiffOperator) -> DiffOperator:
    """[Q, D] = Q o D - (-1)^{|D|} D o Q, bilinearly over homogeneous parts."""
    Qop = DiffOperator.vector_field(M.Q)
    out = DiffOperator(M.ctx)
    for d, part in D.homogeneous_parts().items():
        out = out + Qop.compose(part) - part.compose(Qop).scale(koszul(1, d))
    return out


def lq_word_sum(M: DgManifold, fields: Sequence[VectorField]) -> DiffOperator:
    """sum_k (-1)^{|X_1|+...+|X_{k-1}|} X_1...X_{k-1}[Q,X_k]X_{k+1}...X_n for homogeneous X's."""
    ctx = M.ctx
    ops = [DiffOperator.vector_field(X) for X in fields]
    out = DiffOperator(ctx)
    prefix_deg = 0
    for k, X in enumerate(fields):
        term = DiffOperator.identity(ctx)
        for j, op in enumerate(ops):
            term = term.compose(DiffOperator.vector_field(bracket(M.Q, X)) if j == k else op)
        out = out + term.scale(koszul(1, prefix_deg))
        prefix_deg += X.degree or 0
    return out


class PBW:
    """The PBW isomorphism Gamma(S(TM)) -> D(M) of a torsion-free connection.

    Values on coordinate words are memoised; the cache is private and only
    ever holds results of the pure recursion.
    """

    def __init__(self, nabla: Connection):
        if not nabla.is_tangent:
            raise DegreeError("PBW needs an affine connection on the tangent bundle")
        if not is_torsion_free(nabla):
            raise DegreeError("PBW map requires a torsion-free connection")
        self.nabla = nabla
        self.ctx = nabla.ctx
        self._words: dict = {}

    def _nabla_word(self, i: int, letters: Sequence[int]) -> SymTensor:
        """nabla_{d_i}(d_{l1} . ... . d_{lm}) as a symmetric tensor."""
        ctx = self.ctx
        di = -ctx.degrees[i]
        total = SymTensor(ctx)
        prefix_deg = 0
        for pos, j in enumerate(letters):
            cov = {}
            for k in range(len(ctx)):
                g = self.nabla.coefficient(i, j, k)
                if g:
                    cov[_unit(ctx, k)] = g
            if cov:
                pieces = [SymTensor.word(ctx, _unit(ctx, l)) for l in letters[:pos]]
                pieces.append(SymTensor(ctx, cov))
                pieces += [SymTensor.word(ctx, _unit(ctx, l)) for l in letters[pos + 1:]]
                total = total + sym_product(pieces, ctx).scale(koszul(di, prefix_deg))
            prefix_deg += -ctx.degrees[j]
        return total

    def word(self, alpha) -> DiffOperator:
        alpha = tuple(alpha)
        hit = self._words.get(alpha)
        if hit is not None:
            return hit
        ctx = self.ctx
        letters = _expand(alpha)
        n1 = len(letters)
        if n1 == 0:
            res = DiffOperator.identity(ctx)
        elif n1 == 1:
            res = DiffOperator.partial(ctx, letters[0])
        else:
            res = DiffOperator(ctx)
            degs = [-ctx.degrees[l] for l in letters]
            for k, i in enumerate(letters):
                sign = koszul(degs[k], sum(degs[:k]))
                rest = letters[:k] + letters[k + 1:]
                rest_alpha = [0] * len(ctx)
                for l in rest:
                    rest_alpha[l] += 1
                head = DiffOperator.partial(ctx, i).compose(self.word(rest_alpha))
                tail = self(self._nabla_word(i, rest))
                res = res + (head - tail).scale(sign)
            res = res.scale(Fraction(1, n1))
        self._words[alpha] = res
        return res

    def __call__(self, s: SymTensor) -> DiffOperator:
        out = DiffOperator(self.ctx)
        for a, f in s.terms.items():
            out = out + self.word(a).lmul(f)
        return out

    def inverse(self, D: DiffOperator) -> SymTensor:
        """Strip the principal symbol, subtract its image, recurse down the filtration."""
        acc = SymTensor(self.ctx)
        while D:
            n = D.order
            top = SymTensor(self.ctx, D.component(n).terms)
            acc = acc + top
            D = D - self(top)
            if D.order >= n and D:
                raise ArithmeticError("PBW map is not triangular on this input")
        return acc


def pbw(s: SymTensor, nabla: Connection) -> DiffOperator:
    return PBW(nabla)(s)


def pbw_inverse(D: DiffOperator, nabla: Connection) -> SymTensor:
    return PBW(nabla).inverse(D)


class TransferredBrackets:
    """delta = pbw^{-1} o L_Q o pbw and the brackets lambda_k it induces.

    ``lambda_k`` is ``(-1)^{k-1}`` times the S^1 component of
    ``delta(X_1 . ... . X_k)``.  The rescaling by ``(-1)^{k-1}`` is the
    automorphism x -> -x of the underlying space, so the L-infinity[1]
    relations are unaffected, and it makes lambda_2 the Atiyah cocycle
    with the orientation used in :mod:`dgatiyah.connections`.
    """

    def __init__(self, M: DgManifold, nabla: Connection):
        self.M = M
        self.ctx = M.ctx
        self.pbw = PBW(nabla)
        self._table: dict = {}

    def delta(self, s: SymTensor) -> SymTensor:
        return self.pbw.inverse(lq_diffop(self.M, self.pbw(s)))

    def lambda_direct(self, fields: Sequence[VectorField]) -> VectorField:
        k = len(fields)
        if k == 1:
            return bracket(self.M.Q, fields[0])
        s = sym_product([SymTensor.vector_field(X) for X in fields], self.ctx)
        return self.delta(s).vector_part().scale(koszul(1, k - 1))

    def on_word(self, alpha) -> VectorField:
        alpha = tuple(alpha)
        if alpha not in self._table:
            k = sum(alpha)
            self._table[alpha] = self.delta(SymTensor.word(self.ctx, alpha)).vector_part().scale(
                koszul(1, k - 1))
        return self._table[alpha]

    def __call__(self, fields: Sequence[VectorField]) -> VectorField:
        """lambda_k via C-infinity multilinearity for k >= 2 (L_Q for k = 1)."""
        k = len(fields)
        if k == 1:
            return bracket(self.M.Q, fields[0])
        ctx = self.ctx
        terms = [SymTensor.vector_field(X) for X in fields]
        # expand f_1 d_{i1} . ... . f_k d_{ik}; pulling every f_l to the far left
        # past the degree-1 bracket and the earlier partials
        out = VectorField.zero(ctx)

        def rec(pos, coef, sign, alpha, word_deg):
            nonlocal out
            if pos == k:
                val = self.on_word(alpha)
                if val:
                    out = out + VectorField(ctx, [coef * c for c in val.coeffs]).scale(sign)
                return
            for a, f in terms[pos].terms.items():
                i = a.index(1)
                r = mono_mul(ctx, alpha, a)
                if r is None:
                    continue
                s_word, alpha2 = r
                for mono in f.monomials():
                    s = sign * s_word * koszul(mono.degree, 1 + word_deg)
                    rec(pos + 1, coef * mono, s, alpha2, word_deg - ctx.degrees[i])

        rec(0, ctx.one(), 1, (0,) * len(ctx), 0)
        return out


def lambda_k(M: DgManifold, nabla: Connection, fields: Sequence[VectorField]) -> VectorField:
    return TransferredBrackets(M, nabla).lambda_direct(fields)


def delta(M: DgManifold, nabla: Connection, s: SymTensor) -> SymTensor:
    return TransferredBrackets(M, nabla).delta(s)


def _koszul_perm_sign(degrees: Sequence[int], order: Sequence[int]) -> int:
    sign = 1
    for p in range(len(order)):
        for q in range(p + 1, len(order)):
            if order[p] > order[q]:
                sign *= koszul(degrees[order[p]], degrees[order[q]])
    return sign


def jacobi_residual(br: TransferredBrackets, xs: Sequence[VectorField]) -> VectorField:
    """sum_{i+j=m+1} sum_{unshuffles} eps * lambda_j(lambda_i(x_S), x_rest)."""
    m = len(xs)
    degs = [x.degree or 0 for x in xs]
    out = VectorField.zero(br.ctx)
    for i in range(1, m + 1):
        for S in combinations(range(m), i):
            rest = [t for t in range(m) if t not in S]
            eps = _koszul_perm_sign(degs, list(S) + rest)
            inner = br([xs[t] for t in S])
            if not inner:
                continue
            outer = br([inner] + [xs[t] for t in rest])
            out = out + outer.scale(eps)
    return out


def default_generators(ctx: GradedContext, max_length: int = 2) -> list:
    """Coordinate fields times monomials of polynomial degree <= max_length."""
    gens = []
    monos = []
    for d in sorted(set(_all_degrees(ctx, max_length))):
        monos += monomials_of_degree(ctx, d, max_length)
    for m in monos:
        f = Polynomial(ctx, {m: Fraction(1)})
        for k in range(len(ctx)):
            gens.append(f * VectorField.coordinate(ctx, k))
    return gens


def _all_degrees(ctx, max_length):
    degs = {0}
    for _ in range(max_length):
        degs |= {a + b for a in degs for b in ctx.degrees}
    return degs


def linfty_check(M: DgManifold, nabla: Connection, max_arity: int,
                 generators: Optional[Sequence[VectorField]] = None,
                 max_tuples: Optional[int] = 400, seed: int = 0) -> CheckReport:
    """Generalized Jacobi residuals on multisets of generators, for each arity <= max_arity.

    When an arity has more than ``max_tuples`` multisets a seeded sample of
    that size is checked; the report records which arities were exhaustive.
    """
    rep = CheckReport("linfty")
    br = TransferredBrackets(M, nabla)
    gens = list(generators) if generators is not None else default_generators(M.ctx)
    gens = [g for g in gens if g and g.degree is not None]
    rng = random.Random(seed)
    coverage = {}
    for m in range(1, max_arity + 1):
        tuples = list(combinations_with_replacement(range(len(gens)), m))
        exhaustive = max_tuples is None or len(tuples) <= max_tuples
        if not exhaustive:
            tuples = sorted(rng.sample(tuples, max_tuples))
        coverage[str(m)] = {"tuples": len(tuples), "exhaustive": exhaustive}
        for tup in tuples:
            xs = [gens[t] for t in tup]
            r = jacobi_residual(br, xs)
            if r:
                rep.fail({"arity": m, "tuple": [str(x) for x in xs], "residual": r.to_dict()})
    rep.data["coverage"] = coverage
    rep.data["generators"] = len(gens)
    return rep


def words_up_to(ctx: GradedContext, order: int) -> list:
    """Exponent vectors of coordinate words of length <= order (odd letters at most once)."""
    out = []

    def rec(i, left, acc):
        if i == len(ctx):
            out.append(tuple(acc))
            return
        top = 1 if ctx.odd[i] else left
        for e in range(min(top, left) + 1):
            rec(i + 1, left - e, acc + [e])

    rec(0, order, [])
    return sorted(out, key=lambda a: (sum(a), [-e for e in a]))


def pbw_roundtrip_check(nabla: Connection, order: int, coeff_length: int = 3) -> CheckReport:
    """pbw^{-1} o pbw = id on f * (word) and pbw o pbw^{-1} = id on f * d^alpha.

    ``f`` runs over 1 and the sum of all coefficient monomials of length
    <= coeff_length; both maps are linear over functions from the left, so
    this covers every coefficient of that size.
    """
    rep = CheckReport("pbw-roundtrip")
    P = PBW(nabla)
    ctx = P.ctx
    generic = ctx.zero()
    for d in sorted(_all_degrees(ctx, coeff_length)):
        for m in monomials_of_degree(ctx, d, coeff_length):
            generic = generic + Polynomial(ctx, {m: Fraction(1)})
    words = words_up_to(ctx, order)
    for alpha in words:
        for f in (ctx.one(), generic):
            s = SymTensor(ctx, {alpha: f})
            if P.inverse(P(s)) != s:
                rep.fail({"direction": "inverse(pbw)", "word": list(alpha), "coefficient": str(f)})
            D = DiffOperator(ctx, {alpha: f})
            if P(P.inverse(D)) != D:
                rep.fail({"direction": "pbw(inverse)", "word": list(alpha), "coefficient": str(f)})
    rep.data.update({"order": order, "words": len(words), "coefficient_length": coeff_length})
    return rep
