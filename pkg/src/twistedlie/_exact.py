"""Small exact linear-algebra helpers over ``fractions.Fraction``."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

Matrix = list[list[Fraction]]


def frac(x) -> Fraction:
    if isinstance(x, np.integer):
        x = int(x)
    return Fraction(x)


def to_fraction_matrix(m) -> Matrix:
    return [[frac(x) for x in row] for row in m]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def det(a: Matrix) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    m = [row[:] for row in a]
    n = len(m)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            out = -out
        out *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return out


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    m = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def solve(a: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    inv = inverse(a)
    return [sum((x * y for x, y in zip(row, b)), Fraction(0)) for row in inv]


def as_float(a: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a], dtype=float)


def dot(u: Sequence, gram: Matrix, v: Sequence) -> Fraction:
    return sum((frac(u[i]) * gram[i][j] * frac(v[j])
                for i in range(len(u)) for j in range(len(v))
                if u[i] and v[j]), Fraction(0))
