"""Exact graded-commutative polynomials with Koszul signs.

A :class:`GradedContext` fixes an ordered list of coordinates with integer
degrees.  Monomials are exponent tuples in declaration order; odd-degree
coordinates appear with exponent at most one.  Coefficients are
:class:`fractions.Fraction` throughout.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

Monomial = tuple  # tuple[int, ...], one exponent per coordinate

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class ParseError(ValueError):
    """Raised for malformed expressions; ``pos`` is the 0-based offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


@dataclass(frozen=True)
class Coordinate:
    name: str
    degree: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not _IDENT.match(self.name):
            raise ValueError(f"invalid coordinate name {self.name!r}")
        if isinstance(self.degree, bool) or not isinstance(self.degree, int):
            raise ValueError(f"degree of {self.name} must be an integer")


class GradedContext:
    """Ordered coordinates of a graded chart.  Immutable."""

    def __init__(self, coordinates: Iterable[Union[Coordinate, tuple]]):
        coords = []
        for c in coordinates:
            if not isinstance(c, Coordinate):
                c = Coordinate(*c)
            coords.append(c)
        names = [c.name for c in coords]
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be unique")
        self._coords = tuple(coords)
        self._index = {c.name: i for i, c in enumerate(coords)}
        self.degrees = tuple(c.degree for c in coords)
        self.names = tuple(names)
        self.odd = tuple(d % 2 == 1 for d in self.degrees)

    @property
    def coordinates(self) -> tuple:
        return self._coords

    def __len__(self):
        return len(self._coords)

    def __eq__(self, other):
        return isinstance(other, GradedContext) and self._coords == other._coords

    def __hash__(self):
        return hash(self._coords)

    def __repr__(self):
        inner = ", ".join(f"{c.name}:{c.degree}" for c in self._coords)
        return f"GradedContext({inner})"

    def index(self, key: Union[int, str]) -> int:
        if isinstance(key, int):
            if not 0 <= key < len(self):
                raise IndexError(f"coordinate index {key} out of range")
            return key
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"unknown coordinate {key!r}") from None

    # constructors
    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def const(self, c) -> "Polynomial":
        return Polynomial(self, {(0,) * len(self): Fraction(c)})

    def var(self, key: Union[int, str]) -> "Polynomial":
        i = self.index(key)
        e = [0] * len(self)
        e[i] = 1
        return Polynomial(self, {tuple(e): Fraction(1)})

    def parse(self, text: str) -> "Polynomial":
        return parse_poly(text, self)

    def monomial_degree(self, m: Monomial) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))


def mono_mul(ctx: GradedContext, a: Monomial, b: Monomial):
    """Return (sign, a*b) for normal-form monomials, or None when the product vanishes."""
    odd = ctx.odd
    flips = 0
    later_odd = 0  # odd factors of `a` strictly to the right of position j
    for j in range(len(a) - 1, -1, -1):
        if odd[j]:
            if b[j]:
                if a[j]:
                    return None
                flips += later_odd
            if a[j]:
                later_odd += 1
    return (-1 if flips % 2 else 1), tuple(x + y for x, y in zip(a, b))


def mono_partial(ctx: GradedContext, i: int, m: Monomial):
    """Left derivative of a monomial: (coefficient, monomial) or None."""
    e = m[i]
    if e == 0:
        return None
    sign = 1
    if ctx.odd[i]:
        passed = sum(m[j] for j in range(i) if ctx.odd[j])
        if passed % 2:
            sign = -1
    out = list(m)
    out[i] -= 1
    return sign * e, tuple(out)


def _term_key(m: Monomial):
    return (-sum(m), tuple(-e for e in m))


class Polynomial:
    """Immutable exact polynomial in a graded context."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: GradedContext, terms: dict):
        clean = {}
        for m, c in terms.items():
            if c:
                clean[m] = c if isinstance(c, Fraction) else Fraction(c)
        self.ctx = ctx
        self.terms = clean
        self._hash = None

    # --- structure -----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self) -> Iterator:
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ctx == other.ctx and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == self.ctx.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx, frozenset(self.terms.items())))
        return self._hash

    @property
    def degree(self):
        """Common degree of all terms, or None if zero or inhomogeneous."""
        degs = {self.ctx.monomial_degree(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self) -> bool:
        return not self.terms or self.degree is not None

    def homogeneous_parts(self) -> dict:
        parts: dict = {}
        for m, c in self.terms.items():
            parts.setdefault(self.ctx.monomial_degree(m), {})[m] = c
        return {d: Polynomial(self.ctx, t) for d, t in sorted(parts.items())}

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.ctx), Fraction(0))

    def max_length(self) -> int:
        """Largest total exponent among the terms (polynomial degree)."""
        return max((sum(m) for m in self.terms), default=0)

    # --- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ctx != self.ctx:
                raise ValueError("polynomials live in different contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return Polynomial(self.ctx, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return self.ctx.zero()
        return Polynomial(self.ctx, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict = {}
        ctx = self.ctx
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                r = mono_mul(ctx, a, b)
                if r is None:
                    continue
                s, m = r
                terms[m] = terms.get(m, 0) + s * ca * cb
        return Polynomial(ctx, terms)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        out = self.ctx.one()
        for _ in range(n):
            out = out * self
        return out

    def partial(self, i: Union[int, str]) -> "Polynomial":
        """Left derivative with respect to coordinate ``i``."""
        i = self.ctx.index(i)
        terms: dict = {}
        for m, c in self.terms.items():
            r = mono_partial(self.ctx, i, m)
            if r is not None:
                k, mm = r
                terms[mm] = terms.get(mm, 0) + k * c
        return Polynomial(self.ctx, terms)

    def monomials(self) -> Iterator["Polynomial"]:
        """Yield each term as a single-term polynomial (each is homogeneous)."""
        for m, c in self.terms.items():
            yield Polynomial(self.ctx, {m: c})

    def substitute_context(self, ctx: GradedContext, mapping) -> "Polynomial":
        """Re-embed into ``ctx``; ``mapping[i]`` is the target index of coordinate i."""
        terms = {}
        n = len(ctx)
        for m, c in self.terms.items():
            e = [0] * n
            for i, k in enumerate(m):
                if k:
                    e[mapping[i]] = k
            # declaration order is preserved by an increasing mapping, so no sign
            terms[tuple(e)] = c
        return Polynomial(ctx, terms)

    # --- printing ------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _term_key(t[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            factors = []
            for name, e in zip(self.ctx.names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            neg = c < 0
            a = -c if neg else c
            body = "*".join(factors)
            if not factors:
                body = str(a)
            elif a != 1:
                body = f"{a}*{body}"
            if k == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self):
        return f"Polynomial({self})"


def degree_of(p: Polynomial):
    """Common degree of ``p``, or the strings ``"zero"`` / ``"inhomogeneous"``."""
    if not p.terms:
        return "zero"
    d = p.degree
    return "inhomogeneous" if d is None else d


def partial(i, p: Polynomial) -> Polynomial:
    return p.partial(i)


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def koszul(a: int, b: int) -> int:
    return -1 if (a * b) % 2 else 1


def monomials_of_degree(ctx: GradedContext, degree: int, max_length: int) -> list:
    """All normal-form monomials of the given degree with total exponent <= max_length."""
    n = len(ctx)
    out = []

    def rec(i, remaining, acc):
        if i == n:
            if ctx.monomial_degree(acc) == degree:
                out.append(tuple(acc))
            return
        top = 1 if ctx.odd[i] else remaining
        for e in range(min(top, remaining) + 1):
            acc.append(e)
            rec(i + 1, remaining - e, acc)
            acc.pop()

    rec(0, max_length, [])
    out.sort(key=_term_key)
    return out


def realizable_degrees(ctx: GradedContext):
    """Predicate ``r -> bool``: is ``r`` the degree of some nonzero monomial?

    Odd coordinates contribute a subset sum; even coordinates of nonzero
    degree generate a numerical semigroup (or a full subgroup when both
    signs occur).
    """
    from math import gcd

    odd_degs = [d for d, o in zip(ctx.degrees, ctx.odd) if o]
    even_degs = [d for d, o in zip(ctx.degrees, ctx.odd) if not o and d != 0]
    offsets = {0}
    for d in odd_degs:
        offsets |= {o + d for o in offsets}
    g = 0
    for d in even_degs:
        g = gcd(g, abs(d))
    pos = sorted({d for d in even_degs if d > 0})
    neg = sorted({-d for d in even_degs if d < 0})

    def semigroup_contains(gens, t):
        if t < 0:
            return False
        reach = [False] * (t + 1)
        reach[0] = True
        for v in range(1, t + 1):
            reach[v] = any(v >= s and reach[v - s] for s in gens)
        return reach[t]

    def check(r):
        for o in offsets:
            t = r - o
            if t == 0:
                return True
            if g == 0 or t % g:
                continue
            if pos and neg:
                return True
            if pos and semigroup_contains(pos, t):
                return True
            if neg and semigroup_contains(neg, -t):
                return True
        return False

    return check


# --- parser ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


def parse_poly(text: str, ctx: GradedContext) -> Polynomial:
    """Parse ``text`` into normal form.

    Grammar::

        expr   := ['-'] term { ('+'|'-') term }
        term   := coef { '*' factor } | factor { '*' factor }
        factor := ident [ '^' nat ]
        coef   := int [ '/' nat ]
    """
    toks = _tokenize(text)
    k = 0

    def peek():
        return toks[k]

    def take(kind=None, value=None):
        nonlocal k
        t = toks[k]
        if (kind and t[0] != kind) or (value and t[1] != value):
            what = value or kind
            found = t[1] or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", t[2], text)
        k += 1
        return t

    def factor():
        t = take("id")
        name = t[1]
        if name not in ctx.names:
            raise ParseError(f"unknown coordinate {name!r}", t[2], text)
        i = ctx.index(name)
        e = 1
        if peek()[1] == "^":
            take("op", "^")
            n = take("num")
            e = int(n[1])
            if e >= 2 and ctx.odd[i]:
                raise ParseError(f"exponent {e} on odd coordinate {name!r}", n[2], text)
        return ctx.var(i) ** e

    def term():
        t = peek()
        if t[0] == "num":
            take()
            num = int(t[1])
            if peek()[1] == "/":
                take("op", "/")
                d = take("num")
                den = int(d[1])
                if den == 0:
                    raise ParseError("division by zero", d[2], text)
                val = ctx.const(Fraction(num, den))
            else:
                val = ctx.const(num)
        elif t[0] == "id":
            val = factor()
        else:
            raise ParseError(f"expected term, found {t[1] or 'end of input'!r}", t[2], text)
        while peek()[1] == "*":
            take("op", "*")
            val = val * factor()
        return val

    sign = 1
    if peek()[1] == "-":
        take()
        sign = -1
    result = term().scale(sign)
    while peek()[1] in ("+", "-"):
        op = take()[1]
        t = term()
        result = result + t if op == "+" else result - t
    if peek()[0] != "end":
        t = peek()
        raise ParseError(f"unexpected token {t[1]!r}", t[2], text)
    return result

