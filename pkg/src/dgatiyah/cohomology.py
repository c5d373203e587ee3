"""Finite-dimensional Q-cohomology for manifolds with positive coordinate degrees.

The main inhabitants are the Chevalley-Eilenberg manifolds ``g[1]``.  Each
slice of a complex in a fixed degree is spanned by finitely many monomials,
so kernels, images and exactness reduce to exact rank computations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial
from typing import Optional

from . import linalg
from .algebra import GradedContext, Polynomial, monomials_of_degree
from .char_classes import FormContext, todd
from .connections import (Connection, Tensor, atiyah_tangent, complex_differential,
                          tangent_bundle)
from .report import CheckReport
from .vector_fields import DgManifold, VectorField, validate_homological

#: Supertrace sign on the shifted frame of g[1]: str = SIGMA * tr there, and
#: the Todd class of g[1] equals the adjoint det-series raised to SIGMA.
SIGMA = -1


class JacobiError(ValueError):
    def __init__(self, triple, component):
        self.triple = triple
        super().__init__(f"Jacobi identity fails on basis triple {triple} (component {component})")


class UnboundedSliceError(ValueError):
    pass


# --- Lie algebras -----------------------------------------------------------------

@dataclass
class LieAlgebraData:
    """Structure constants ``c[(i, j, k)] = c^k_{ij}`` (0-based), antisymmetric in (i, j)."""

    dim: int
    c: dict = field(default_factory=dict)
    name: str = ""

    @classmethod
    def from_constants(cls, dim: int, constants, name: str = "", one_based: bool = True):
        """``constants`` lists ``(i, j, k, value)`` meaning [e_i, e_j] = value e_k + ..."""
        c: dict = {}
        off = 1 if one_based else 0
        for i, j, k, v in constants:
            i, j, k = i - off, j - off, k - off
            if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                raise ValueError(f"structure constant index out of range: {(i + off, j + off, k + off)}")
            if i == j:
                raise ValueError("c^k_ii must vanish")
            v = Fraction(v)
            c[(i, j, k)] = c.get((i, j, k), 0) + v
            c[(j, i, k)] = c.get((j, i, k), 0) - v
        return cls(dim, {key: v for key, v in c.items() if v}, name)

    def const(self, i, j, k) -> Fraction:
        return self.c.get((i, j, k), Fraction(0))

    def bracket(self, u, v) -> list:
        out = [Fraction(0)] * self.dim
        for (i, j, k), val in self.c.items():
            out[k] += val * u[i] * v[j]
        return out

    def jacobi_violation(self):
        """First (i, j, k, component) where the Jacobiator is nonzero, else None."""
        n = self.dim
        basis = [[Fraction(int(a == b)) for b in range(n)] for a in range(n)]
        for i, j, k in combinations(range(n), 3):
            x, y, z = basis[i], basis[j], basis[k]
            t1 = self.bracket(x, self.bracket(y, z))
            t2 = self.bracket(y, self.bracket(z, x))
            t3 = self.bracket(z, self.bracket(x, y))
            for m in range(n):
                if t1[m] + t2[m] + t3[m]:
                    return (i + 1, j + 1, k + 1), m + 1
        return None

    def ad(self, i) -> list:
        """Matrix of ad_{e_i}: entry [a][b] = c^a_{ib}."""
        return [[self.const(i, b, a) for b in range(self.dim)] for a in range(self.dim)]

    def to_dict(self) -> dict:
        return {"dim": self.dim, "structure_constants": [
            [i + 1, j + 1, k + 1, str(v)] for (i, j, k), v in sorted(self.c.items()) if i < j]}


def abelian(n: int) -> LieAlgebraData:
    return LieAlgebraData(n, {}, f"abelian{n}")


def solvable2() -> LieAlgebraData:
    return LieAlgebraData.from_constants(2, [(1, 2, 2, 1)], "solvable2")


def sl2() -> LieAlgebraData:
    # basis e, f, h: [h, e] = 2e, [h, f] = -2f, [e, f] = h
    return LieAlgebraData.from_constants(3, [(3, 1, 1, 2), (3, 2, 2, -2), (1, 2, 3, 1)], "sl2")


def heisenberg3() -> LieAlgebraData:
    return LieAlgebraData.from_constants(3, [(1, 2, 3, 1)], "heisenberg3")


def catalog(name: str) -> LieAlgebraData:
    if name.startswith("abelian"):
        return abelian(int(name[len("abelian"):] or 1))
    table = {"solvable2": solvable2, "sl2": sl2, "heisenberg3": heisenberg3}
    if name not in table:
        raise KeyError(f"unknown Lie algebra {name!r}")
    return table[name]()


def ce_manifold(g: LieAlgebraData, check: bool = True, prefix: str = "xi") -> DgManifold:
    """g[1] with Q_k = -1/2 sum_{ij} c^k_{ij} xi^i xi^j."""
    if check:
        bad = g.jacobi_violation()
        if bad:
            raise JacobiError(*bad)
    ctx = GradedContext([(f"{prefix}{i + 1}", 1) for i in range(g.dim)])
    Q = [ctx.zero()] * g.dim
    for (i, j, k), v in g.c.items():
        Q[k] = Q[k] + (ctx.var(i) * ctx.var(j)).scale(Fraction(-1, 2) * v)
    return DgManifold(ctx, VectorField(ctx, Q))


def validate_lie(g: LieAlgebraData) -> CheckReport:
    rep = validate_homological(ce_manifold(g, check=False))
    bad = g.jacobi_violation()
    if bad:
        rep.fail({"jacobi_triple": list(bad[0]), "component": bad[1]})
    return rep


# --- slices -----------------------------------------------------------------------

def _require_positive(M: DgManifold):
    low = [n for n, d in zip(M.ctx.names, M.ctx.degrees) if d <= 0]
    if low:
        raise UnboundedSliceError(f"coordinates of non-positive degree make slices infinite: {low}")


class _Space:
    name = ""

    def basis(self, d):
        raise NotImplementedError

    def to_vector(self, obj, d):
        raise NotImplementedError

    def from_vector(self, v, d):
        raise NotImplementedError

    def differential(self, obj):
        raise NotImplementedError

    def degree_of(self, obj):
        raise NotImplementedError


class _Functions(_Space):
    name = "functions"

    def __init__(self, M):
        self.M = M

    def basis(self, d):
        return monomials_of_degree(self.M.ctx, d, max(d, 0))

    def to_vector(self, obj, d):
        b = self.basis(d)
        idx = {m: n for n, m in enumerate(b)}
        v = [Fraction(0)] * len(b)
        for m, c in obj.terms.items():
            v[idx[m]] = c
        return v

    def from_vector(self, v, d):
        return Polynomial(self.M.ctx, {m: c for m, c in zip(self.basis(d), v) if c})

    def differential(self, obj):
        return self.M.Q.apply(obj)

    def degree_of(self, obj):
        return obj.degree


class _Forms(_Functions):
    """Omega^k in internal degree d: doubled degree d + k, wedge degree k."""

    def __init__(self, M, k):
        self.M = M
        self.k = k
        self.fctx = FormContext(M.ctx)
        self.LQ = self.fctx.lie_derivative(M)
        self.name = f"omega:{k}"

    def basis(self, d):
        D = d + self.k
        return [m for m in monomials_of_degree(self.fctx.ctx, D, max(D, 0))
                if self.fctx.wedge_degree(m) == self.k]

    def from_vector(self, v, d):
        return Polynomial(self.fctx.ctx, {m: c for m, c in zip(self.basis(d), v) if c})

    def differential(self, obj):
        return self.LQ.apply(obj)

    def degree_of(self, obj):
        return None if obj.degree is None else obj.degree - self.k


class _Tensors(_Space):
    """Gamma(T^v (x) End T): tensors phi(X, s) on the tangent bundle, graded by their degree."""

    name = "tensor"

    def __init__(self, M):
        self.M = M
        self.E = tangent_bundle(M)
        self.frame = self.E.frame
        self.n = len(M.ctx)

    def basis(self, d):
        probe = Tensor(self.M.ctx, self.frame, d, {})
        out = []
        for i, b, a in product(range(self.n), range(len(self.frame)), range(len(self.frame))):
            want = probe.required_degree(i, b, a)
            for m in monomials_of_degree(self.M.ctx, want, max(want, 0)):
                out.append((i, b, a, m))
        return out

    def to_vector(self, obj, d):
        b = self.basis(d)
        idx = {k: n for n, k in enumerate(b)}
        v = [Fraction(0)] * len(b)
        for (i, bb), s in obj.table.items():
            for a, p in enumerate(s):
                for m, c in p.terms.items():
                    v[idx[(i, bb, a, m)]] = c
        return v

    def from_vector(self, v, d):
        ctx = self.M.ctx
        rank = len(self.frame)
        table: dict = {}
        for (i, b, a, m), c in zip(self.basis(d), v):
            if c:
                row = table.setdefault((i, b), [ctx.zero()] * rank)
                row[a] = row[a] + Polynomial(ctx, {m: c})
        return Tensor(ctx, self.frame, d, {k: tuple(r) for k, r in table.items()})

    def differential(self, obj):
        return complex_differential(obj, self.E)

    def degree_of(self, obj):
        return obj.degree


def space_for(M: DgManifold, space: str) -> _Space:
    _require_positive(M)
    if space == "functions":
        return _Functions(M)
    if space == "tensor":
        return _Tensors(M)
    if space.startswith("omega"):
        _, _, k = space.partition(":")
        return _Forms(M, int(k or 0))
    raise ValueError(f"unknown space {space!r}; expected functions, omega:K or tensor")


@dataclass
class FiniteComplexSlice:
    space: str
    degree: int
    basis: list
    target_basis: list
    matrix: list  # rows indexed by target_basis, columns by basis

    @property
    def rank(self) -> int:
        return linalg.rank(self.matrix) if self.matrix and self.basis else 0


def assemble_slice(M: DgManifold, space: str, degree: int) -> FiniteComplexSlice:
    sp = space_for(M, space) if isinstance(space, str) else space
    src = sp.basis(degree)
    tgt = sp.basis(degree + 1)
    cols = []
    for n in range(len(src)):
        e = [Fraction(0)] * len(src)
        e[n] = Fraction(1)
        cols.append(sp.to_vector(sp.differential(sp.from_vector(e, degree)), degree + 1))
    matrix = [[cols[c][r] for c in range(len(src))] for r in range(len(tgt))]
    return FiniteComplexSlice(sp.name, degree, src, tgt, matrix)


def cohomology_dim(M: DgManifold, space: str, k: int) -> int:
    sp = space_for(M, space)
    here = assemble_slice(M, sp, k)
    before = assemble_slice(M, sp, k - 1)
    return len(here.basis) - here.rank - before.rank


def _is_zero(obj) -> bool:
    return obj.is_zero() if isinstance(obj, Tensor) else not obj


def is_exact(M: DgManifold, space: str, cocycle, degree: Optional[int] = None):
    """(True, primitive) when cocycle = d(primitive), else (False, None)."""
    sp = space_for(M, space)
    d = degree if degree is not None else sp.degree_of(cocycle)
    if d is None:
        if _is_zero(cocycle):
            return True, None
        raise ValueError("cocycle must be homogeneous")
    if not _is_zero(sp.differential(cocycle)):
        raise ValueError("input is not a cocycle")
    prev = assemble_slice(M, sp, d - 1)
    v = sp.to_vector(cocycle, d)
    x = linalg.solve(prev.matrix, v, len(prev.basis)) if prev.basis else (
        [] if not any(v) else None)
    if x is None:
        return False, None
    return True, sp.from_vector(x, d - 1)


# --- independent oracles -------------------------------------------------------------

def _sym_monomials(n, k):
    out = []

    def rec(i, left, acc):
        if i == n - 1:
            out.append(tuple(acc + [left]))
            return
        for e in range(left, -1, -1):
            rec(i + 1, left - e, acc + [e])

    if n == 0:
        return [()] if k == 0 else []
    rec(0, k, [])
    return out


def invariants_dim(g: LieAlgebraData, k: int) -> int:
    """dim (S^k g^v)^g by solving the coadjoint invariance equations."""
    n = g.dim
    ctx = GradedContext([(f"x{i + 1}", 0) for i in range(n)])
    basis = _sym_monomials(n, k)
    idx = {m: r for r, m in enumerate(basis)}
    rows = []
    for a in range(n):
        # e_a acts on the linear coordinate x_j by x_j -> -sum_m c^j_{am} x_m
        act = VectorField(ctx, [
            Polynomial(ctx, {tuple(int(t == m) for t in range(n)): -g.const(a, m, j)
                             for m in range(n) if g.const(a, m, j)})
            for j in range(n)])
        images = [act.apply(Polynomial(ctx, {m: Fraction(1)})) for m in basis]
        for target in basis:
            rows.append([img.terms.get(target, Fraction(0)) for img in images])
    return len(basis) - (linalg.rank(rows) if basis else 0)


def _rep_matrices_ggg(g: LieAlgebraData) -> list:
    """rho(e_a) on g^v (x) g^v (x) g in the basis (u, v, w) -> index u n^2 + v n + w."""
    n = g.dim
    ad = [g.ad(a) for a in range(n)]
    N = n ** 3
    mats = []
    for a in range(n):
        m = [[Fraction(0)] * N for _ in range(N)]
        for u, v, w in product(range(n), repeat=3):
            col = u * n * n + v * n + w
            for t in range(n):
                # coadjoint on the dual slots: e^u -> -sum_t ad[u][t] e^t
                if ad[a][u][t]:
                    m[t * n * n + v * n + w][col] -= ad[a][u][t]
                if ad[a][v][t]:
                    m[u * n * n + t * n + w][col] -= ad[a][v][t]
                if ad[a][t][w]:
                    m[u * n * n + v * n + t][col] += ad[a][t][w]
        mats.append(m)
    return mats


def _sorted_sign(seq):
    if len(set(seq)) < len(seq):
        return 0, None
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return (-1) ** inv, tuple(sorted(seq))


def ce_differential_matrix(g: LieAlgebraData, rho: list, p: int) -> tuple:
    """Matrix of d: C^p(g, V) -> C^{p+1}(g, V) for the representation rho."""
    n = g.dim
    dimV = len(rho[0]) if rho else 0
    src = [(I, v) for I in combinations(range(n), p) for v in range(dimV)]
    tgt = [(J, v) for J in combinations(range(n), p + 1) for v in range(dimV)]
    sidx = {k: r for r, k in enumerate(src)}
    rows = [[Fraction(0)] * len(src) for _ in tgt]
    for r, (J, v) in enumerate(tgt):
        for s, js in enumerate(J):
            rest = J[:s] + J[s + 1:]
            for w in range(dimV):
                coef = rho[js][v][w]
                if coef:
                    rows[r][sidx[(rest, w)]] += (-1) ** s * coef
        for s, t in combinations(range(len(J)), 2):
            rest = J[:s] + J[s + 1:t] + J[t + 1:]
            for m in range(n):
                c = g.const(J[s], J[t], m)
                if not c:
                    continue
                sign, key = _sorted_sign((m,) + rest)
                if sign:
                    rows[r][sidx[(key, v)]] += (-1) ** (s + t) * sign * c
    return src, tgt, rows


def ce_cohomology_dim(g: LieAlgebraData, p: int, rho: Optional[list] = None) -> int:
    """dim H^p_CE(g, V); V defaults to g^v (x) g^v (x) g."""
    if p < 0:
        return 0
    rho = rho if rho is not None else _rep_matrices_ggg(g)
    src, _, d_here = ce_differential_matrix(g, rho, p)
    rank_here = linalg.rank(d_here) if d_here and src else 0
    rank_before = 0
    if p > 0:
        src0, _, d_before = ce_differential_matrix(g, rho, p - 1)
        rank_before = linalg.rank(d_before) if d_before and src0 else 0
    return len(src) - rank_here - rank_before


def tensor_dimension_check(g: LieAlgebraData, kmax: int) -> CheckReport:
    """dim H^k(Gamma(T^v (x) End T)) against dim H^{k-1}_CE(g, g^v (x) g^v (x) g)."""
    rep = CheckReport("tensor-cohomology-dimensions")
    M = ce_manifold(g)
    rho = _rep_matrices_ggg(g)
    rows = []
    for k in range(1, kmax + 1):
        lhs = cohomology_dim(M, "tensor", k)
        rhs = ce_cohomology_dim(g, k - 1, rho)
        rows.append({"k": k, "tensor": lhs, "ce": rhs})
        if lhs != rhs:
            rep.fail({"k": k, "tensor": lhs, "ce": rhs})
    rep.data["dimensions"] = rows
    return rep


def omega_dimension_check(g: LieAlgebraData, kmax: int) -> CheckReport:
    """dim H^k(Omega^k) against dim (S^k g^v)^g."""
    rep = CheckReport("omega-cohomology-dimensions")
    M = ce_manifold(g)
    rows = []
    for k in range(kmax + 1):
        lhs = cohomology_dim(M, f"omega:{k}", k)
        rhs = invariants_dim(g, k)
        rows.append({"k": k, "omega": lhs, "invariants": rhs})
        if lhs != rhs:
            rep.fail({"k": k, "omega": lhs, "invariants": rhs})
    rep.data["dimensions"] = rows
    return rep


# --- Atiyah class and Todd class of g[1] ---------------------------------------------

def structure_tensor(g: LieAlgebraData, M: Optional[DgManifold] = None) -> Tensor:
    """The bracket as a tensor: (d_i, d_j) -> sum_k c^k_{ij} d_k."""
    M = M or ce_manifold(g)
    ctx = M.ctx
    table = {}
    for i in range(g.dim):
        for j in range(g.dim):
            row = tuple(ctx.const(g.const(i, j, k)) for k in range(g.dim))
            if any(row):
                table[(i, j)] = row
    return Tensor(ctx, tangent_bundle(M).frame, 1, table)


def bracket_class_check(g: LieAlgebraData, nabla: Optional[Connection] = None) -> CheckReport:
    rep = CheckReport("bracket-class")
    M = ce_manifold(g)
    nabla = nabla or Connection.trivial(M.ctx)
    E = tangent_bundle(M)
    at = atiyah_tangent(M, nabla)
    C = structure_tensor(g, M)
    for label, t in (("atiyah", at), ("bracket", C)):
        if not complex_differential(t, E).is_zero():
            rep.fail({"not_a_cocycle": label})
    rep.data["literal_match"] = at == C
    rep.data["connection_trivial"] = not nabla.gamma
    if rep.passed:
        exact, primitive = is_exact(M, "tensor", at - C, degree=1)
        rep.data["difference_exact"] = exact
        if not exact:
            rep.fail({"difference_not_exact": (at - C).to_dict()})
        elif primitive is not None and not primitive.is_zero():
            rep.data["primitive"] = primitive.to_dict()
        rep.data["atiyah_exact"] = is_exact(M, "tensor", at, degree=1)[0]
    rep.data["atiyah"] = at.to_dict()
    return rep


def _truncate(p: Polynomial, K: int) -> Polynomial:
    return Polynomial(p.ctx, {m: c for m, c in p.terms.items() if sum(m) <= K})


def _det(mat, K):
    n = len(mat)
    ctx = mat[0][0].ctx
    out = ctx.zero()
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = ctx.const((-1) ** inv)
        for r in range(n):
            term = _truncate(term * mat[r][perm[r]], K)
            if not term:
                break
        out = out + term
    return out


def duflo_oracle(g: LieAlgebraData, K: int) -> Polynomial:
    """det((1 - e^{-ad_x})/ad_x) in S(g^v) = Q[x_1..x_n], truncated at order K."""
    n = g.dim
    ctx = GradedContext([(f"x{i + 1}", 0) for i in range(n)])
    if n == 0:
        return ctx.one()
    adx = [[sum((ctx.var(i).scale(g.const(i, b, a)) for i in range(n)), ctx.zero())
            for b in range(n)] for a in range(n)]

    def matmul(A, B):
        return [[_truncate(sum((A[r][t] * B[t][c] for t in range(n)), ctx.zero()), K)
                 for c in range(n)] for r in range(n)]

    total = [[ctx.const(int(r == c)) for c in range(n)] for r in range(n)]
    power = total
    for k in range(1, K + 1):
        power = matmul(power, adx)
        coef = Fraction((-1) ** k, factorial(k + 1))
        total = [[total[r][c] + power[r][c].scale(coef) for c in range(n)] for r in range(n)]
    return _det(total, K)


def series_power(p: Polynomial, e: int, K: int) -> Polynomial:
    """p^e for p with constant term 1 (e may be negative), truncated at order K."""
    ctx = p.ctx
    one = ctx.one()
    N = p - one
    if e >= 0:
        out = one
        for _ in range(e):
            out = _truncate(out * p, K)
        return out
    # (1 + N)^{-1} = sum (-N)^j
    inv = one
    term = one
    for _ in range(K):
        term = _truncate(term * (-N), K)
        if not term:
            break
        inv = inv + term
    return series_power(inv, -e, K)


def forms_to_symmetric(w: Polynomial, fctx: FormContext, ctx: GradedContext) -> Polynomial:
    """d_xi-monomials -> symmetric monomials in x (the degree-forced identification)."""
    terms = {}
    for m, c in w.terms.items():
        if any(m[: fctx.n]):
            raise ValueError("form has a non-constant coefficient")
        terms[m[fctx.n:]] = terms.get(m[fctx.n:], 0) + c
    return Polynomial(ctx, terms)


def duflo_compare(g: LieAlgebraData, K: int, sigma: int = SIGMA) -> CheckReport:
    rep = CheckReport("duflo")
    M = ce_manifold(g)
    oracle = duflo_oracle(g, K)
    fctx = FormContext(M.ctx)
    td = todd(M, Connection.trivial(M.ctx), K)
    LQ = fctx.lie_derivative(M)
    for k in range(K + 1):
        if LQ.apply(fctx.wedge_component(td, k)):
            rep.fail({"not_a_cocycle": k})
    artifact = forms_to_symmetric(td, fctx, oracle.ctx)
    expected = series_power(oracle, sigma, K)
    if artifact != expected:
        diff = artifact - expected
        rep.fail({"difference": str(diff)})
    if K >= 1:
        lower = duflo_oracle(g, K - 1)
        td_lower = forms_to_symmetric(todd(M, Connection.trivial(M.ctx), K - 1), fctx, oracle.ctx)
        consistent = _truncate(artifact, K - 1) == td_lower and _truncate(oracle, K - 1) == lower
        rep.data["truncation_consistent"] = consistent
        if not consistent:
            rep.fail({"truncation_inconsistent": K})
    rep.data.update({"order": K, "sigma": sigma, "oracle": str(oracle),
                     "todd": str(td), "todd_symmetric": str(artifact)})
    return rep
