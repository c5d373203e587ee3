"""Exact linear algebra over Q on dense row lists of Fractions."""
from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

Matrix = List[List[Fraction]]


def to_matrix(rows: Sequence[Sequence], ncols: Optional[int] = None) -> Matrix:
    out = [[Fraction(x) for x in r] for r in rows]
    if ncols is not None and any(len(r) != ncols for r in out):
        raise ValueError("ragged matrix")
    return out


def rref(rows: Sequence[Sequence]) -> tuple:
    """Reduced row echelon form and pivot columns."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of {v : A v = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -m[r][f]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int) -> Optional[List[Fraction]]:
    """Some x with A x = rhs, or None when the system is inconsistent."""
    if not rows:
        return [Fraction(0)] * ncols if not any(rhs) else None
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    m, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, p in enumerate(pivots):
        x[p] = m[r][ncols]
    return x


def matvec(rows: Sequence[Sequence], v: Sequence) -> List[Fraction]:
    return [sum((a * b for a, b in zip(r, v)), Fraction(0)) for r in rows]
