"""End-valued forms, supertraces, scalar Atiyah classes and the Todd class.

Forms live in the doubled context ``{x_i} u {d_x_i}`` with
``|d_x_i| = |x_i| + 1``.  The Atiyah cocycle becomes the End-valued 1-form
``alpha_ab = sum_i d_x_i At^a_{ib}`` (row ``a`` acts on frame element
``e_b``), which has total degree 2, so formal power series in ``alpha`` make
sense.  The form slot pairs with the shifted field X[1], so a degree-p
tensor is recovered as ``phi(X, s) = (-1)^{p(|X|+1)} (i_X omega)(s)``; with
this encoding the form differential ``L_Q + [q, -]`` matches the tensor
differential exactly.  The supertrace is ``str(m) = sum_a (-1)^{|e_a|} m_aa``; on the frame
``d/dx_k`` of the tangent bundle the sign uses ``|d/dx_k| = -|x_k|``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Optional, Sequence

from .algebra import GradedContext, Polynomial, koszul
from .connections import Connection, DgVectorBundle, Tensor, atiyah_bundle, tangent_bundle
from .vector_fields import DgManifold, VectorField


class FormContext:
    """The doubled chart carrying differential forms of a graded chart."""

    def __init__(self, ctx: GradedContext):
        self.base = ctx
        names = [f"d_{n}" for n in ctx.names]
        clash = set(names) & set(ctx.names)
        if clash:
            raise ValueError(f"coordinate names clash with form generators: {sorted(clash)}")
        self.ctx = GradedContext(
            list(zip(ctx.names, ctx.degrees)) + [(n, d + 1) for n, d in zip(names, ctx.degrees)]
        )
        self.n = len(ctx)

    def __eq__(self, other):
        return isinstance(other, FormContext) and self.base == other.base

    def embed(self, f: Polynomial) -> Polynomial:
        return f.substitute_context(self.ctx, list(range(self.n)))

    def project(self, w: Polynomial) -> Polynomial:
        """Inverse of :meth:`embed` for forms of wedge degree 0."""
        terms = {}
        for m, c in w.terms.items():
            if any(m[self.n:]):
                raise ValueError("form has positive wedge degree")
            terms[m[: self.n]] = c
        return Polynomial(self.base, terms)

    def dx(self, i: int) -> Polynomial:
        return self.ctx.var(self.n + i)

    def wedge_degree(self, m) -> int:
        return sum(m[self.n:])

    def wedge_component(self, w: Polynomial, k: int) -> Polynomial:
        return Polynomial(self.ctx, {m: c for m, c in w.terms.items() if self.wedge_degree(m) == k})

    def truncate(self, w: Polynomial, k: int) -> Polynomial:
        return Polynomial(self.ctx, {m: c for m, c in w.terms.items() if self.wedge_degree(m) <= k})

    def de_rham(self) -> VectorField:
        """d = sum_i d_x_i d/dx_i as a degree-1 derivation of the doubled algebra."""
        co = [self.dx(i) for i in range(self.n)] + [self.ctx.zero()] * self.n
        return VectorField(self.ctx, co)

    def lie_derivative(self, M: DgManifold) -> VectorField:
        """L_Q on forms: x_i -> Q_i, d_x_i -> -d(Q_i), so that [L_Q, d] = 0."""
        d = self.de_rham()
        qs = [self.embed(q) for q in M.Q.coeffs]
        return VectorField(self.ctx, qs + [-d.apply(q) for q in qs])

    def contract(self, X: VectorField, w: Polynomial) -> Polynomial:
        """Interior product: i_{f d_i} w = f * (left derivative in d_x_i)."""
        out = self.ctx.zero()
        for i, f in enumerate(X.coeffs):
            if f:
                out = out + self.embed(f) * w.partial(self.n + i)
        return out


class EndValuedForm:
    """Square matrix of forms over a graded frame; entry (a, b) is the e_a-component of the image of e_b."""

    def __init__(self, fctx: FormContext, frame: Sequence[int], entries: dict):
        self.fctx = fctx
        self.frame = tuple(frame)
        self.entries = {k: v for k, v in entries.items() if v}

    @property
    def rank(self):
        return len(self.frame)

    def entry(self, a, b) -> Polynomial:
        return self.entries.get((a, b), self.fctx.ctx.zero())

    @classmethod
    def identity(cls, fctx, frame) -> "EndValuedForm":
        return cls(fctx, frame, {(a, a): fctx.ctx.one() for a in range(len(frame))})

    @classmethod
    def zero(cls, fctx, frame) -> "EndValuedForm":
        return cls(fctx, frame, {})

    def __eq__(self, other):
        return (isinstance(other, EndValuedForm) and self.frame == other.frame
                and self.entries == other.entries)

    def __bool__(self):
        return bool(self.entries)

    def __add__(self, other):
        keys = set(self.entries) | set(other.entries)
        return EndValuedForm(self.fctx, self.frame,
                             {k: self.entry(*k) + other.entry(*k) for k in keys})

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return EndValuedForm(self.fctx, self.frame, {k: v.scale(c) for k, v in self.entries.items()})

    def lmul(self, w: Polynomial):
        """w * M for a scalar form w (w placed to the left of every entry)."""
        return EndValuedForm(self.fctx, self.frame, {k: w * v for k, v in self.entries.items()})

    def map_entries(self, fn):
        return EndValuedForm(self.fctx, self.frame, {k: fn(v) for k, v in self.entries.items()})

    def __matmul__(self, other: "EndValuedForm") -> "EndValuedForm":
        """(m E_ab)(n E_bc) = (-1)^{(|e_a|-|e_b|)|n|} m n E_ac."""
        out: dict = {}
        by_row: dict = {}
        for (b, c), v in other.entries.items():
            by_row.setdefault(b, []).append((c, v))
        for (a, b), m in self.entries.items():
            shift = self.frame[a] - self.frame[b]
            for c, n in by_row.get(b, ()):
                if shift % 2:
                    prod = Polynomial(n.ctx, {})
                    for mono in n.monomials():
                        prod = prod + (m * mono).scale(koszul(shift, mono.degree))
                else:
                    prod = m * n
                out[(a, c)] = out[(a, c)] + prod if (a, c) in out else prod
        return EndValuedForm(self.fctx, self.frame, out)

    def power(self, k: int) -> "EndValuedForm":
        out = EndValuedForm.identity(self.fctx, self.frame)
        for _ in range(k):
            out = out @ self
        return out

    def degree_parts(self) -> dict:
        parts: dict = {}
        for (a, b), v in self.entries.items():
            shift = self.frame[a] - self.frame[b]
            for d, piece in v.homogeneous_parts().items():
                parts.setdefault(d + shift, {})[(a, b)] = piece
        return {d: EndValuedForm(self.fctx, self.frame, e) for d, e in parts.items()}

    @property
    def degree(self):
        parts = self.degree_parts()
        return next(iter(parts)) if len(parts) == 1 else None

    def truncate(self, k: int) -> "EndValuedForm":
        return self.map_entries(lambda v: self.fctx.truncate(v, k))

    def to_dict(self, names=None) -> dict:
        names = names or [str(a) for a in range(self.rank)]
        return {f"{names[a]},{names[b]}": str(v) for (a, b), v in sorted(self.entries.items())}


def supercommutator(A: EndValuedForm, B: EndValuedForm) -> EndValuedForm:
    out = EndValuedForm.zero(A.fctx, A.frame)
    for da, Ap in A.degree_parts().items():
        for db, Bp in B.degree_parts().items():
            out = out + (Ap @ Bp) - (Bp @ Ap).scale(koszul(da, db))
    return out


def matrix_power(alpha: EndValuedForm, k: int) -> EndValuedForm:
    if k < 0:
        raise ValueError("k must be non-negative")
    return alpha.power(k)


def supertrace(m: EndValuedForm) -> Polynomial:
    out = m.fctx.ctx.zero()
    for a in range(m.rank):
        v = m.entry(a, a)
        if v:
            out = out + v.scale(koszul(1, m.frame[a]))
    return out


def _slot_sign(p: int, field_degree: int) -> int:
    return koszul(p, field_degree + 1)


def as_end_valued_form(at: Tensor, fctx: Optional[FormContext] = None) -> EndValuedForm:
    """alpha_ab = sum_i (-1)^{p(|x_i|+1)} d_x_i At^a_{ib} for a tensor of degree p."""
    fctx = fctx or FormContext(at.ctx)
    entries: dict = {}
    for (i, b), s in at.table.items():
        sign = _slot_sign(at.degree, at.ctx.degrees[i])
        for a, p in enumerate(s):
            if p:
                v = (fctx.dx(i) * fctx.embed(p)).scale(sign)
                entries[(a, b)] = entries[(a, b)] + v if (a, b) in entries else v
    return EndValuedForm(fctx, at.frame, entries)


def from_end_valued_form(alpha: EndValuedForm, degree: int = 1) -> Tensor:
    fctx = alpha.fctx
    table: dict = {}
    for i in range(fctx.n):
        sign = _slot_sign(degree, fctx.base.degrees[i])
        for b in range(alpha.rank):
            table[(i, b)] = tuple(
                fctx.project(alpha.entry(a, b).partial(fctx.n + i)).scale(sign)
                for a in range(alpha.rank)
            )
    return Tensor(fctx.base, alpha.frame, degree, table)


def apply_form(alpha: EndValuedForm, X: VectorField, s, degree: int = 1) -> tuple:
    """Evaluate a wedge-degree-1 form on (X, s) as the degree-``degree`` tensor it encodes."""
    fctx = alpha.fctx
    base = fctx.base
    out = [base.zero()] * alpha.rank
    for dX, Xp in X.homogeneous_parts().items():
        end = alpha.map_entries(lambda v: fctx.contract(Xp, v))
        outer = _slot_sign(degree, dX)
        for (a, b), m in end.entries.items():
            m0 = fctx.project(m)
            for mono in m0.monomials():
                for g in s[b].monomials():
                    sign = outer * koszul(g.degree, mono.degree + alpha.frame[a] - alpha.frame[b])
                    out[a] = out[a] + (g * mono).scale(sign)
    return tuple(out)


def end_differential(alpha: EndValuedForm, E: DgVectorBundle) -> EndValuedForm:
    """D(M) = L_Q(M) + q M - (-1)^{|M|} M q with q the matrix of Q on the frame."""
    fctx = alpha.fctx
    LQ = fctx.lie_derivative(E.base)
    qmat = EndValuedForm(fctx, E.frame, {k: fctx.embed(v) for k, v in E.q.items()})
    out = alpha.map_entries(LQ.apply)
    for d, part in alpha.degree_parts().items():
        out = out + (qmat @ part) - (part @ qmat).scale(koszul(1, d))
    return out


# --- formal power series --------------------------------------------------------

def _series_mul(a, b, n):
    out = [Fraction(0)] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                out[i + j] += x * y
    return out


def _series_compose(outer, inner, n):
    """outer(inner(t)) for inner with zero constant term."""
    if inner and inner[0]:
        raise ValueError("inner series must have zero constant term")
    out = [Fraction(0)] * (n + 1)
    power = [Fraction(1)] + [Fraction(0)] * n
    for k, c in enumerate(outer[: n + 1]):
        if c:
            out = [o + c * p for o, p in zip(out, power)]
        power = _series_mul(power, inner, n)
    return out


def series_coefficients(name: str, n: int) -> list:
    """Exact coefficients c_0..c_n of a named series: 'exp', 'log' (log(1+t)), 'todd-log'."""
    if name == "exp":
        return [Fraction(1, factorial(k)) for k in range(n + 1)]
    if name == "log":
        return [Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, n + 1)]
    if name == "todd-log":
        # (1 - e^{-t})/t = sum (-1)^k t^k/(k+1)!, then log(1 + (g - 1))
        g_minus_1 = [Fraction(0)] + [Fraction((-1) ** k, factorial(k + 1)) for k in range(1, n + 1)]
        return _series_compose(series_coefficients("log", n), g_minus_1, n)
    raise KeyError(f"unknown series {name!r}")


# --- classes ----------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarClass:
    """str(alpha^k)/k!; the omitted prefactor is (i/2pi)^k."""

    k: int
    form: Polynomial
    prefactor: str

    def to_dict(self):
        return {"k": self.k, "form": str(self.form), "prefactor": self.prefactor}


def atiyah_form(M: DgManifold, nabla: Connection, E: Optional[DgVectorBundle] = None) -> EndValuedForm:
    E = E or tangent_bundle(M)
    return as_end_valued_form(atiyah_bundle(E, nabla))


def scalar_atiyah(M: DgManifold, nabla: Connection, k: int,
                  E: Optional[DgVectorBundle] = None) -> ScalarClass:
    if k < 1:
        raise ValueError("k must be >= 1")
    alpha = atiyah_form(M, nabla, E)
    return ScalarClass(k, supertrace(alpha.power(k)).scale(Fraction(1, factorial(k))),
                       f"(i/2pi)^{k}")


def _exp_truncated(fctx: FormContext, w: Polynomial, K: int) -> Polynomial:
    """exp(w) for an even form w without wedge-degree-0 part, truncated at wedge degree K."""
    out = fctx.ctx.one()
    term = fctx.ctx.one()
    for j in range(1, K + 1):
        term = fctx.truncate(term * w, K).scale(Fraction(1, j))
        if not term:
            break
        out = out + term
    return out


def todd_from_traces(fctx: FormContext, traces: Sequence[Polynomial], K: int) -> Polynomial:
    """exp(sum_k a_k str(alpha^k)); ``traces[k-1] = str(alpha^k)``."""
    a = series_coefficients("todd-log", K)
    w = fctx.ctx.zero()
    for k in range(1, K + 1):
        if traces[k - 1]:
            w = w + traces[k - 1].scale(a[k])
    return _exp_truncated(fctx, w, K)


def todd(M: DgManifold, nabla: Connection, K: int,
         E: Optional[DgVectorBundle] = None) -> Polynomial:
    """Ber((1 - e^{-alpha})/alpha) = exp(str log(...)), truncated at wedge degree K."""
    if K < 0:
        raise ValueError("K must be >= 0")
    alpha = atiyah_form(M, nabla, E)
    fctx = alpha.fctx
    traces = []
    power = EndValuedForm.identity(fctx, alpha.frame)
    for _ in range(K):
        power = power @ alpha
        traces.append(supertrace(power))
    return todd_from_traces(fctx, traces, K)
