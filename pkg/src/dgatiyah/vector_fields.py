"""Graded derivations of polynomial function algebras."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .algebra import GradedContext, Polynomial, koszul
from .report import CheckReport


class VectorField:
    """X = sum_k X_k d/dx_k, stored by coefficients so equality is decidable."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: GradedContext, coeffs: Sequence[Polynomial]):
        if len(coeffs) != len(ctx):
            raise ValueError("one coefficient per coordinate required")
        self.ctx = ctx
        self.coeffs = tuple(coeffs)

    @classmethod
    def zero(cls, ctx: GradedContext) -> "VectorField":
        return cls(ctx, [ctx.zero()] * len(ctx))

    @classmethod
    def coordinate(cls, ctx: GradedContext, i: Union[int, str]) -> "VectorField":
        i = ctx.index(i)
        return cls(ctx, [ctx.one() if k == i else ctx.zero() for k in range(len(ctx))])

    @classmethod
    def from_dict(cls, ctx: GradedContext, coeffs: dict) -> "VectorField":
        out = [ctx.zero()] * len(ctx)
        for key, p in coeffs.items():
            if isinstance(p, str):
                p = ctx.parse(p)
            out[ctx.index(key)] = p
        return cls(ctx, out)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def is_zero(self) -> bool:
        return not self

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.ctx, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "VectorField":
        return VectorField(self.ctx, [-a for a in self.coeffs])

    def __rmul__(self, f) -> "VectorField":
        # left multiplication by a function or scalar: (fX)_k = f X_k
        return VectorField(self.ctx, [f * a for a in self.coeffs])

    def scale(self, c) -> "VectorField":
        return VectorField(self.ctx, [a.scale(c) for a in self.coeffs])

    def term_degrees(self):
        for k, p in enumerate(self.coeffs):
            for m in p.terms:
                yield self.ctx.monomial_degree(m) - self.ctx.degrees[k]

    @property
    def degree(self):
        """Degree if homogeneous and nonzero, else None."""
        degs = set(self.term_degrees())
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self) -> bool:
        return len(set(self.term_degrees())) <= 1

    def homogeneous_parts(self) -> dict:
        parts: dict = {}
        for k, p in enumerate(self.coeffs):
            for d, piece in p.homogeneous_parts().items():
                deg = d - self.ctx.degrees[k]
                row = parts.setdefault(deg, [self.ctx.zero()] * len(self.ctx))
                row[k] = row[k] + piece
        return {d: VectorField(self.ctx, row) for d, row in sorted(parts.items())}

    def apply(self, f: Polynomial) -> Polynomial:
        out = self.ctx.zero()
        for k, a in enumerate(self.coeffs):
            if a:
                out = out + a * f.partial(k)
        return out

    __call__ = apply

    def __str__(self):
        parts = [
            f"({p})*d_{name}" for name, p in zip(self.ctx.names, self.coeffs) if p
        ]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"VectorField({self})"

    def to_dict(self) -> dict:
        return {n: str(p) for n, p in zip(self.ctx.names, self.coeffs) if p}


def apply(X: VectorField, f: Polynomial) -> Polynomial:
    return X.apply(f)


def _bracket_homogeneous(X: VectorField, Y: VectorField, dx: int, dy: int) -> VectorField:
    s = koszul(dx, dy)
    return VectorField(
        X.ctx, [X.apply(b) - Y.apply(a).scale(s) for a, b in zip(X.coeffs, Y.coeffs)]
    )


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Graded commutator [X, Y] = X o Y - (-1)^{|X||Y|} Y o X, extended bilinearly."""
    out = VectorField.zero(X.ctx)
    for dx, Xp in X.homogeneous_parts().items():
        for dy, Yp in Y.homogeneous_parts().items():
            out = out + _bracket_homogeneous(Xp, Yp, dx, dy)
    return out


@dataclass(frozen=True)
class DgManifold:
    ctx: GradedContext
    Q: VectorField

    @classmethod
    def from_strings(cls, coordinates, q: dict) -> "DgManifold":
        ctx = coordinates if isinstance(coordinates, GradedContext) else GradedContext(coordinates)
        return cls(ctx, VectorField.from_dict(ctx, q))


def validate_homological(M: DgManifold) -> CheckReport:
    """Q must have degree +1 coefficientwise and satisfy [Q, Q] = 0."""
    rep = CheckReport("validate")
    ctx = M.ctx
    for k, qk in enumerate(M.Q.coeffs):
        if not qk:
            continue
        want = ctx.degrees[k] + 1
        for d in qk.homogeneous_parts():
            if d != want:
                rep.fail({"coordinate": ctx.names[k], "expected_degree": want,
                          "found_degree": d, "coefficient": str(qk)})
                break
    QQ = bracket(M.Q, M.Q)
    for name, p in zip(ctx.names, QQ.coeffs):
        if p:
            rep.fail({"coordinate": name, "[Q,Q]": str(p)})
    rep.data["Q"] = M.Q.to_dict()
    return rep


def lie_derivative(M: DgManifold, X: VectorField) -> VectorField:
    return bracket(M.Q, X)
