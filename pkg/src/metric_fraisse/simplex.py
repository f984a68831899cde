"""Exact feasibility of ``A x = b, x >= 0`` over the rationals.

Phase one of the tableau simplex method with Bland's rule (which cannot
cycle).  Sizes here are tiny (a few dozen columns), so a dense list-of-Fractions
tableau is simpler and faster than anything vectorized.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .foundation import rational


@dataclass(frozen=True)
class Feasibility:
    """Either a solution ``x`` or a Farkas vector ``y`` (yA <= 0, yb > 0)."""

    x: tuple | None
    certificate: tuple | None

    @property
    def feasible(self) -> bool:
        return self.x is not None


def _pivot(T: list[list[Fraction]], r: int, c: int) -> None:
    row = T[r]
    p = row[c]
    if p != 1:
        T[r] = row = [v / p for v in row]
    for i, other in enumerate(T):
        if i != r and other[c]:
            f = other[c]
            T[i] = [a - f * b for a, b in zip(other, row)]


def find_nonnegative_solution(A: Sequence[Sequence], b: Sequence) -> Feasibility:
    """Solve ``A x = b`` with ``x >= 0`` exactly, or certify that no solution exists."""
    A = [[rational(v) for v in row] for row in A]
    b = [rational(v) for v in b]
    m = len(A)
    k = len(A[0]) if m else 0
    if any(len(row) != k for row in A) or len(b) != m:
        raise ValueError("A must be rectangular with one row per entry of b")
    sign = [1 if bi >= 0 else -1 for bi in b]
    # columns: k originals, m artificials, then the right-hand side
    T = []
    for i in range(m):
        row = [sign[i] * v for v in A[i]] + [Fraction(int(i == j)) for j in range(m)]
        T.append(row + [sign[i] * b[i]])
    # objective row holds reduced costs of "minimize the sum of artificials"
    obj = [-sum((T[i][j] for i in range(m)), Fraction(0)) for j in range(k)]
    obj += [Fraction(0)] * m + [-sum((T[i][-1] for i in range(m)), Fraction(0))]
    T.append(obj)
    basis = [k + i for i in range(m)]

    while True:
        obj = T[-1]
        enter = next((j for j in range(k + m) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        # phase one is bounded below by zero, so some row always qualifies
        _pivot(T, best[1], enter)
        basis[best[1]] = enter

    value = -T[-1][-1]
    if value == 0:
        x = [Fraction(0)] * k
        for i, j in enumerate(basis):
            if j < k:
                x[j] = T[i][-1]
        return Feasibility(tuple(x), None)
    # reduced cost of artificial i is 1 - y_i for the phase-one duals y
    y = tuple(sign[i] * (1 - T[-1][k + i]) for i in range(m))
    return Feasibility(None, y)


def check_certificate(A, b, y) -> bool:
    """True when ``y`` proves ``A x = b, x >= 0`` infeasible."""
    A = [[rational(v) for v in row] for row in A]
    k = len(A[0]) if A else 0
    for j in range(k):
        if sum((y[i] * A[i][j] for i in range(len(A))), Fraction(0)) > 0:
            return False
    return sum((yi * rational(bi) for yi, bi in zip(y, b)), Fraction(0)) > 0
