"""Connections, torsion and Atiyah cocycles of dg-vector bundles.

Everything is expressed in a global chart.  A bundle is free with a graded
frame ``e_a``; its sections are tuples of coefficient polynomials
``s = sum_a s_a e_a``.  The tangent bundle uses the frame ``d/dx_k`` of
degree ``-|x_k|``.

Conventions:

* ``Connection.gamma[(i, b, a)]`` is the coefficient in
  ``nabla_{d_i} e_b = sum_a Gamma^a_{ib} e_a``; for the tangent bundle this
  is the Christoffel symbol ``Gamma^k_{ij}`` with ``(i, j, k)``.
* ``Tensor.table[(i, b)]`` is the section ``phi(d_i, e_b)``.
* ``DgVectorBundle.q[(a, b)]`` is the coefficient in ``Q(e_b) = sum_a q_ab e_a``.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import GradedContext, Polynomial, koszul, monomials_of_degree, realizable_degrees
from .report import CheckReport
from .vector_fields import DgManifold, VectorField, bracket, lie_derivative


class DegreeError(ValueError):
    pass


def tangent_frame(ctx: GradedContext) -> tuple:
    return tuple(-d for d in ctx.degrees)


def _zero_section(ctx, rank):
    return (ctx.zero(),) * rank


def section_add(s, t):
    return tuple(a + b for a, b in zip(s, t))


def section_sub(s, t):
    return tuple(a - b for a, b in zip(s, t))


def section_scale(s, c):
    return tuple(a.scale(c) for a in s)


def section_lmul(f: Polynomial, s):
    return tuple(f * a for a in s)


def section_terms(s, frame):
    """Yield (b, f, deg) with f a single-term polynomial and deg = |f e_b|."""
    for b, p in enumerate(s):
        for mono in p.monomials():
            m = next(iter(mono.terms))
            yield b, mono, mono.ctx.monomial_degree(m) + frame[b]


def section_is_zero(s) -> bool:
    return not any(s)


def section_str(s, names) -> dict:
    return {n: str(p) for n, p in zip(names, s) if p}


class Connection:
    """Degree-0 connection on a free bundle over a chart (tangent bundle by default)."""

    def __init__(self, ctx: GradedContext, gamma: Optional[dict] = None,
                 frame_degrees: Optional[Sequence[int]] = None, check: bool = True):
        self.ctx = ctx
        self.frame = tuple(frame_degrees) if frame_degrees is not None else tangent_frame(ctx)
        self.is_tangent = frame_degrees is None or self.frame == tangent_frame(ctx)
        table = {}
        for key, p in (gamma or {}).items():
            if isinstance(p, str):
                p = ctx.parse(p)
            if p:
                table[tuple(key)] = p
        self.gamma = table
        if check:
            for (i, b, a), p in table.items():
                want = self.required_degree(i, b, a)
                if p.degree != want:
                    raise DegreeError(
                        f"Gamma^{a}_{{{i}{b}}} = {p} must be homogeneous of degree {want}"
                    )

    @classmethod
    def trivial(cls, ctx, frame_degrees=None) -> "Connection":
        return cls(ctx, {}, frame_degrees)

    @property
    def rank(self) -> int:
        return len(self.frame)

    def required_degree(self, i: int, b: int, a: int) -> int:
        return self.frame[b] - self.frame[a] - self.ctx.degrees[i]

    def __eq__(self, other):
        return (isinstance(other, Connection) and self.ctx == other.ctx
                and self.frame == other.frame and self.gamma == other.gamma)

    def coefficient(self, i, b, a) -> Polynomial:
        return self.gamma.get((i, b, a), self.ctx.zero())

    def along_coordinate(self, i: int, s) -> tuple:
        """nabla_{d_i} s."""
        ctx = self.ctx
        out = [p.partial(i) for p in s]
        di = ctx.degrees[i]
        for b, p in enumerate(s):
            if not p:
                continue
            for mono in p.monomials():
                sign = koszul(di, mono.degree)
                for a in range(self.rank):
                    g = self.gamma.get((i, b, a))
                    if g is not None:
                        out[a] = out[a] + (mono * g).scale(sign)
        return tuple(out)

    def covariant(self, X: VectorField, s) -> tuple:
        """nabla_X s for a vector field X and a section s."""
        out = _zero_section(self.ctx, self.rank)
        for i, xi in enumerate(X.coeffs):
            if xi:
                out = section_add(out, section_lmul(xi, self.along_coordinate(i, s)))
        return out

    def covariant_field(self, X: VectorField, Y: VectorField) -> VectorField:
        return VectorField(self.ctx, self.covariant(X, Y.coeffs))

    def __add__(self, other: "Connection") -> "Connection":
        keys = set(self.gamma) | set(other.gamma)
        return Connection(self.ctx, {k: self.coefficient(*k) + other.coefficient(*k) for k in keys},
                          self.frame, check=False)

    def scale(self, c) -> "Connection":
        return Connection(self.ctx, {k: p.scale(c) for k, p in self.gamma.items()},
                          self.frame, check=False)

    def to_dict(self, names=None) -> dict:
        cn = self.ctx.names
        fn = names or cn
        return {f"{fn[a]},{cn[i]},{fn[b]}": str(p) for (i, b, a), p in sorted(self.gamma.items())}


class Tensor:
    """A C-infinity bilinear map phi(X, s) of fixed degree, stored on coordinate fields and frame."""

    def __init__(self, ctx: GradedContext, frame_degrees, degree: int, table: dict,
                 check: bool = True):
        self.ctx = ctx
        self.frame = tuple(frame_degrees)
        self.degree = degree
        rank = len(self.frame)
        clean = {}
        for key, s in table.items():
            s = tuple(s)
            if len(s) != rank:
                raise ValueError("section length does not match the frame")
            if any(s):
                clean[tuple(key)] = s
        self.table = clean
        if check:
            for (i, b), s in clean.items():
                for a, p in enumerate(s):
                    want = self.required_degree(i, b, a)
                    for d in p.homogeneous_parts():
                        if d != want:
                            raise DegreeError(
                                f"entry ({i},{b})->{a} = {p} is not of degree {want}; "
                                "inhomogeneous tensor"
                            )

    def required_degree(self, i, b, a) -> int:
        return self.degree - self.ctx.degrees[i] + self.frame[b] - self.frame[a]

    @property
    def rank(self):
        return len(self.frame)

    def entry(self, i: int, b: int) -> tuple:
        return self.table.get((i, b), _zero_section(self.ctx, self.rank))

    def coefficient(self, i, b, a) -> Polynomial:
        return self.entry(i, b)[a]

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (self.ctx == other.ctx and self.frame == other.frame
                and self.table == other.table
                and (self.degree == other.degree or not self.table))

    def is_zero(self) -> bool:
        return not self.table

    def __add__(self, other: "Tensor") -> "Tensor":
        keys = set(self.table) | set(other.table)
        return Tensor(self.ctx, self.frame, self.degree,
                      {k: section_add(self.entry(*k), other.entry(*k)) for k in keys}, check=False)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + other.scale(-1)

    def scale(self, c) -> "Tensor":
        return Tensor(self.ctx, self.frame, self.degree,
                      {k: section_scale(s, c) for k, s in self.table.items()}, check=False)

    def evaluate(self, X: VectorField, s) -> tuple:
        """phi(X, s) using phi(fX, s) = (-1)^{p|f|} f phi(X, s) and
        phi(X, g s) = (-1)^{|g|(|X| + p)} g phi(X, s)."""
        ctx = self.ctx
        p = self.degree
        out = _zero_section(ctx, self.rank)
        for i, xi in enumerate(X.coeffs):
            for f in xi.monomials():
                sf = koszul(p, f.degree)
                for b, g, _ in section_terms(s, self.frame):
                    val = self.table.get((i, b))
                    if val is None:
                        continue
                    sign = sf * koszul(g.degree, p - ctx.degrees[i])
                    out = section_add(out, section_scale(section_lmul(f * g, val), sign))
        return out

    def evaluate_fields(self, X: VectorField, Y: VectorField) -> VectorField:
        return VectorField(self.ctx, self.evaluate(X, Y.coeffs))

    def to_dict(self, frame_names=None) -> dict:
        cn = self.ctx.names
        fn = frame_names or [f"d_{n}" for n in cn]
        out = {}
        for (i, b), s in sorted(self.table.items()):
            out[f"d_{cn[i]},{fn[b]}"] = section_str(s, fn)
        return out


class DgVectorBundle:
    """Free dg-module over a dg-manifold: Q(f e_b) = Q(f) e_b + (-1)^{|f|} f Q(e_b)."""

    def __init__(self, base: DgManifold, frame: Sequence, q: Optional[dict] = None,
                 check: bool = True):
        self.base = base
        ctx = base.ctx
        self.names = tuple(n for n, _ in frame)
        self.frame = tuple(d for _, d in frame)
        table = {}
        for key, p in (q or {}).items():
            if isinstance(p, str):
                p = ctx.parse(p)
            if p:
                table[tuple(key)] = p
        self.q = table
        if check:
            rep = self.validate()
            if not rep.passed:
                raise DegreeError(f"invalid dg-module structure: {rep.failures}")

    @property
    def ctx(self) -> GradedContext:
        return self.base.ctx

    @property
    def rank(self) -> int:
        return len(self.frame)

    def entry(self, a, b) -> Polynomial:
        return self.q.get((a, b), self.ctx.zero())

    def basis(self, b: int) -> tuple:
        ctx = self.ctx
        return tuple(ctx.one() if a == b else ctx.zero() for a in range(self.rank))

    def apply(self, s) -> tuple:
        ctx = self.ctx
        Q = self.base.Q
        out = [Q.apply(p) for p in s]
        for b, f, _ in section_terms(s, self.frame):
            sign = koszul(1, f.degree)
            for a in range(self.rank):
                g = self.q.get((a, b))
                if g is not None:
                    out[a] = out[a] + (f * g).scale(sign)
        return tuple(out)

    def validate(self) -> CheckReport:
        rep = CheckReport("dg_module")
        for (a, b), p in self.q.items():
            want = self.frame[b] + 1 - self.frame[a]
            if p.degree != want:
                rep.fail({"entry": [self.names[a], self.names[b]], "expected_degree": want,
                          "value": str(p)})
        for b in range(self.rank):
            sq = self.apply(self.apply(self.basis(b)))
            if any(sq):
                rep.fail({"Q^2": self.names[b], "value": section_str(sq, self.names)})
        return rep


def tangent_bundle(M: DgManifold) -> DgVectorBundle:
    """T M with the Lie derivative: q_ab = -(-1)^{|x_b|} d_b Q_a."""
    ctx = M.ctx
    q = {}
    for a, Qa in enumerate(M.Q.coeffs):
        for b in range(len(ctx)):
            v = Qa.partial(b).scale(-koszul(1, ctx.degrees[b]))
            if v:
                q[(a, b)] = v
    frame = [(f"d_{n}", -d) for n, d in zip(ctx.names, ctx.degrees)]
    return DgVectorBundle(M, frame, q, check=False)


# --- torsion ------------------------------------------------------------------

def torsion(nabla: Connection) -> Tensor:
    """T^k_ij = Gamma^k_ij - (-1)^{|x_i||x_j|} Gamma^k_ji."""
    ctx = nabla.ctx
    n = len(ctx)
    table = {}
    for i in range(n):
        for j in range(n):
            s = koszul(ctx.degrees[i], ctx.degrees[j])
            table[(i, j)] = tuple(
                nabla.coefficient(i, j, k) - nabla.coefficient(j, i, k).scale(s) for k in range(n)
            )
    return Tensor(ctx, tangent_frame(ctx), 0, table, check=False)


def opposite(nabla: Connection) -> Connection:
    """nabla^op_X Y = nabla_X Y - T(X, Y); on coordinates Gamma^k_ij -> (-1)^{|x_i||x_j|} Gamma^k_ji."""
    ctx = nabla.ctx
    gamma = {}
    for (j, i, k), p in nabla.gamma.items():
        gamma[(i, j, k)] = p.scale(koszul(ctx.degrees[i], ctx.degrees[j]))
    return Connection(ctx, gamma)


def symmetrize(nabla: Connection) -> Connection:
    return (nabla + opposite(nabla)).scale(Fraction(1, 2))


def is_torsion_free(nabla: Connection) -> bool:
    return torsion(nabla).is_zero()


def connection_difference(n1: Connection, n2: Connection) -> Tensor:
    """The degree-0 tensor (X, s) -> nabla1_X s - nabla2_X s."""
    ctx = n1.ctx
    table = {}
    for i in range(len(ctx)):
        for b in range(n1.rank):
            table[(i, b)] = tuple(n1.coefficient(i, b, a) - n2.coefficient(i, b, a)
                                  for a in range(n1.rank))
    return Tensor(ctx, n1.frame, 0, table, check=False)


# --- Atiyah cocycles ----------------------------------------------------------

def _check_inputs(M: DgManifold, nabla: Connection):
    if nabla.ctx != M.ctx:
        raise ValueError("connection and manifold use different charts")
    for k, qk in enumerate(M.Q.coeffs):
        if qk and qk.degree != M.ctx.degrees[k] + 1:
            raise DegreeError(f"Q is not of degree +1 along {M.ctx.names[k]}")


def atiyah_tangent(M: DgManifold, nabla: Connection) -> Tensor:
    """At(X, Y) = L_Q(nabla_X Y) - nabla_{L_Q X} Y - (-1)^{|X|} nabla_X(L_Q Y) on coordinate fields."""
    _check_inputs(M, nabla)
    ctx = M.ctx
    n = len(ctx)
    d = [VectorField.coordinate(ctx, i) for i in range(n)]
    lq = [lie_derivative(M, X) for X in d]
    table = {}
    for i in range(n):
        for j in range(n):
            v = (lie_derivative(M, nabla.covariant_field(d[i], d[j]))
                 - nabla.covariant_field(lq[i], d[j])
                 - nabla.covariant_field(d[i], lq[j]).scale(koszul(1, ctx.degrees[i])))
            table[(i, j)] = v.coeffs
    return Tensor(ctx, tangent_frame(ctx), 1, table)


def atiyah_bundle(E: DgVectorBundle, nabla: Connection) -> Tensor:
    """At(d_i, e_b) = Q(nabla_{d_i} e_b) - nabla_{L_Q d_i} e_b - (-1)^{|x_i|} nabla_{d_i}(Q e_b)."""
    M = E.base
    _check_inputs(M, nabla)
    if nabla.frame != E.frame:
        raise DegreeError("connection frame does not match the bundle frame")
    rep = E.validate()
    if not rep.passed:
        raise DegreeError(f"invalid dg-module structure: {rep.failures}")
    ctx = M.ctx
    table = {}
    for i in range(len(ctx)):
        di = VectorField.coordinate(ctx, i)
        lqi = lie_derivative(M, di)
        for b in range(E.rank):
            eb = E.basis(b)
            v = section_sub(
                E.apply(nabla.along_coordinate(i, eb)),
                nabla.covariant(lqi, eb),
            )
            v = section_sub(v, section_scale(nabla.along_coordinate(i, E.apply(eb)),
                                             koszul(1, ctx.degrees[i])))
            table[(i, b)] = v
    return Tensor(ctx, E.frame, 1, table)


def velociraptor(M: DgManifold) -> Tensor:
    """Closed form for the trivial connection: (-1)^{|x_i|+|x_j|} d_i d_j Q_k."""
    ctx = M.ctx
    n = len(ctx)
    table = {}
    for i in range(n):
        for j in range(n):
            s = -1 if (ctx.degrees[i] + ctx.degrees[j]) % 2 else 1
            table[(i, j)] = tuple(Qk.partial(j).partial(i).scale(s) for Qk in M.Q.coeffs)
    return Tensor(ctx, tangent_frame(ctx), 1, table)


def complex_differential(phi: Tensor, E: DgVectorBundle) -> Tensor:
    """(Q phi)(X, s) = Q(phi(X, s)) - (-1)^p phi(L_Q X, s) - (-1)^{p+|X|} phi(X, Q s)."""
    if phi.frame != E.frame:
        raise DegreeError("tensor frame does not match the bundle frame")
    M = E.base
    ctx = M.ctx
    p = phi.degree
    table = {}
    for i in range(len(ctx)):
        di = VectorField.coordinate(ctx, i)
        lqi = lie_derivative(M, di)
        for b in range(E.rank):
            eb = E.basis(b)
            v = E.apply(phi.entry(i, b))
            v = section_sub(v, section_scale(phi.evaluate(lqi, eb), koszul(1, p)))
            v = section_sub(v, section_scale(phi.evaluate(di, E.apply(eb)),
                                             -1 if (p + ctx.degrees[i]) % 2 else 1))
            table[(i, b)] = v
    return Tensor(ctx, E.frame, p + 1, table)


# --- identity checks ----------------------------------------------------------

def antisymmetrization_check(M: DgManifold, nabla: Connection) -> CheckReport:
    """At(X,Y) - (-1)^{|X||Y|} At(Y,X) equals L_Q T on all coordinate pairs."""
    ctx = M.ctx
    rep = CheckReport("antisymmetrization")
    At = atiyah_tangent(M, nabla)
    T = torsion(nabla)
    LT = complex_differential(T, tangent_bundle(M))
    n = len(ctx)
    names = [f"d_{x}" for x in ctx.names]
    for i in range(n):
        for j in range(n):
            s = koszul(ctx.degrees[i], ctx.degrees[j])
            lhs = section_sub(At.entry(i, j), section_scale(At.entry(j, i), s))
            rhs = LT.entry(i, j)
            if lhs != rhs:
                rep.fail({"pair": [ctx.names[i], ctx.names[j]],
                          "alt_at": section_str(lhs, names), "lq_torsion": section_str(rhs, names)})
    rep.data["torsion_free"] = T.is_zero()
    if T.is_zero():
        rep.data["graded_symmetric"] = rep.passed
    rep.data["torsion"] = T.to_dict()
    return rep


def _homogeneous_field(X: VectorField):
    d = X.degree
    return 0 if d is None else d


def jacobiator(At: Tensor, X: VectorField, Y: VectorField, Z: VectorField) -> VectorField:
    """At(X,At(Y,Z)) - {(-1)^{|X|+1} At(At(X,Y),Z) + (-1)^{(|X|+1)(|Y|+1)} At(Y,At(X,Z))}."""
    dx, dy = _homogeneous_field(X), _homogeneous_field(Y)
    a = At.evaluate_fields(X, At.evaluate_fields(Y, Z))
    b = At.evaluate_fields(At.evaluate_fields(X, Y), Z).scale(koszul(1, dx + 1))
    c = At.evaluate_fields(Y, At.evaluate_fields(X, Z)).scale(-1 if ((dx + 1) * (dy + 1)) % 2 else 1)
    return a - (b + c)


def covariant_atiyah(At: Tensor, nabla: Connection, X: VectorField, Y: VectorField,
                     Z: VectorField) -> VectorField:
    """(nabla_X At)(Y, Z) for homogeneous X, Y, Z; At has degree 1."""
    dx, dy = _homogeneous_field(X), _homogeneous_field(Y)
    p = At.degree
    v = nabla.covariant_field(X, At.evaluate_fields(Y, Z))
    v = v - At.evaluate_fields(nabla.covariant_field(X, Y), Z).scale(koszul(dx, p))
    v = v - At.evaluate_fields(Y, nabla.covariant_field(X, Z)).scale(koszul(dx, p + dy))
    return v


def _split(X: VectorField):
    return list(X.homogeneous_parts().values())


def _multilinear(fn, *args):
    """Evaluate ``fn`` on homogeneous parts and sum."""
    parts = [_split(a) for a in args]
    out = None
    from itertools import product
    for combo in product(*parts):
        v = fn(*combo)
        out = v if out is None else out + v
    return out if out is not None else VectorField.zero(args[0].ctx)


def lq_covariant_atiyah(M: DgManifold, At: Tensor, nabla: Connection, X, Y, Z) -> VectorField:
    """Differential of X -> nabla_X At.

    The first slot is a 1-form slot (nabla_{fX} = f nabla_X, no sign), the
    value nabla_X At is a two-slot tensor of degree |X| + 1:

        L_Q(psi(X,Y,Z)) - psi(L_Q X,Y,Z) + (-1)^{|X|} psi(X,L_Q Y,Z)
        + (-1)^{|X|+|Y|} psi(X,Y,L_Q Z)
    """
    def psi(a, b, c):
        return _multilinear(lambda u, v, w: covariant_atiyah(At, nabla, u, v, w), a, b, c)

    dx, dy = _homogeneous_field(X), _homogeneous_field(Y)
    v = lie_derivative(M, psi(X, Y, Z))
    v = v - psi(lie_derivative(M, X), Y, Z)
    v = v + psi(X, lie_derivative(M, Y), Z).scale(koszul(1, dx))
    v = v + psi(X, Y, lie_derivative(M, Z)).scale(koszul(1, dx + dy))
    return v


#: Sign s in Jacobiator(At) = s * L_Q(nabla At), pinned on nonlinear R^{1|1} examples.
JACOBIATOR_SIGN = 1


def jacobiator_check(M: DgManifold, nabla: Connection) -> CheckReport:
    """Jacobiator of At equals s * L_Q(nabla At) with the global sign s = JACOBIATOR_SIGN."""
    rep = CheckReport("jacobiator")
    if not is_torsion_free(nabla):
        raise DegreeError("jacobiator_check requires a torsion-free connection")
    ctx = M.ctx
    n = len(ctx)
    At = atiyah_tangent(M, nabla)
    d = [VectorField.coordinate(ctx, i) for i in range(n)]
    signs = set()
    nonzero = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                J = jacobiator(At, d[i], d[j], d[k])
                R = lq_covariant_atiyah(M, At, nabla, d[i], d[j], d[k])
                triple = [ctx.names[i], ctx.names[j], ctx.names[k]]
                if J.is_zero() and R.is_zero():
                    continue
                nonzero += 1
                if J == R:
                    signs.add(1)
                elif J == -R:
                    signs.add(-1)
                else:
                    rep.fail({"triple": triple, "jacobiator": J.to_dict(), "lq_nabla_at": R.to_dict()})
    if len(signs) > 1:
        rep.fail({"inconsistent_signs": sorted(signs)})
    observed = signs.pop() if len(signs) == 1 else None
    if observed is not None and observed != JACOBIATOR_SIGN:
        rep.fail({"observed_sign": observed, "global_sign": JACOBIATOR_SIGN})
    rep.data["sign"] = observed
    rep.data["global_sign"] = JACOBIATOR_SIGN
    rep.data["nonzero_triples"] = nonzero
    return rep


def lemma_dog_check(ctx: GradedContext) -> bool:
    """True iff no Christoffel symbol can be a nonzero polynomial, i.e. only the trivial connection exists."""
    ok = realizable_degrees(ctx)
    degs = ctx.degrees
    for i in degs:
        for j in degs:
            for k in degs:
                if ok(k - i - j):
                    return False
    return True


def random_connection(ctx: GradedContext, rng: random.Random, max_length: int = 2,
                      density: float = 0.5, torsion_free: bool = False,
                      frame_degrees=None) -> Connection:
    """A connection with random rational coefficients of the required degrees."""
    frame = tuple(frame_degrees) if frame_degrees is not None else tangent_frame(ctx)
    gamma = {}
    n = len(ctx)
    for i in range(n):
        for b in range(len(frame)):
            for a in range(len(frame)):
                want = frame[b] - frame[a] - ctx.degrees[i]
                terms = {}
                for m in monomials_of_degree(ctx, want, max_length):
                    if rng.random() < density:
                        terms[m] = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
                p = Polynomial(ctx, terms)
                if p:
                    gamma[(i, b, a)] = p
    nabla = Connection(ctx, gamma, frame_degrees)
    return symmetrize(nabla) if torsion_free else nabla
