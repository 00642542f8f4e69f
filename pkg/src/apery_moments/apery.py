"""The Apery sequence by two independent routes, plus the exact Hankel
positivity checks that a Stieltjes moment sequence must satisfy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple


@dataclass(frozen=True)
class AperySequence:
    values: Tuple[int, ...]
    provenance: str  # "binomial" or "recurrence"

    def __post_init__(self):
        if self.values[0] != 1:
            raise ValueError("sequence must start at 1")

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def apery_binomial(n: int) -> int:
    """A_n as the double binomial sum, evaluated with exact integers."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    total = 0
    for k in range(n + 1):
        total += math.comb(n, k) ** 2 * math.comb(n + k, k) ** 2
    return total


def _recurrence_step(n: int, a_n: int, a_prev: int) -> int:
    # (n+1)^3 A_{n+1} = (34n^3+51n^2+27n+5) A_n - n^3 A_{n-1}
    numerator = (34 * n**3 + 51 * n**2 + 27 * n + 5) * a_n - n**3 * a_prev
    cube = (n + 1) ** 3
    quotient, remainder = divmod(numerator, cube)
    if remainder:
        raise ArithmeticError(
            f"inexact division at n={n}: {numerator} not divisible by {cube}"
        )
    return quotient


def apery_recurrence(n_max: int) -> AperySequence:
    """A_0..A_{n_max} from the three-term recurrence.

    Every step solves for A_{n+1} in exact integers and insists that the
    division by (n+1)^3 is exact; an inexact division would mean the
    recurrence was transcribed wrong.
    """
    if n_max < 1:
        raise ValueError("need n_max >= 1")
    values = [1, 5]
    for n in range(1, n_max):
        values.append(_recurrence_step(n, values[n], values[n - 1]))
    return AperySequence(tuple(values), provenance="recurrence")


def apery_binomial_sequence(n_max: int) -> AperySequence:
    return AperySequence(
        tuple(apery_binomial(n) for n in range(n_max + 1)), provenance="binomial"
    )


def bareiss_determinant(matrix: List[List[int]]) -> int:
    """Fraction-free Bareiss elimination; exact for integer matrices."""
    m = [row[:] for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")
    sign = 1
    prev_pivot = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for swap in range(k + 1, n):
                if m[swap][k] != 0:
                    m[k], m[swap] = m[swap], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev_pivot
            m[i][k] = 0
        prev_pivot = m[k][k]
    return sign * m[n - 1][n - 1]


def hankel_determinants(n_max: int) -> Tuple[List[int], List[int]]:
    """Exact determinants of [A_{i+j}] and [A_{i+j+1}] for sizes m <= n_max."""
    if n_max < 0:
        raise ValueError("need n_max >= 0")
    seq = apery_recurrence(max(2 * n_max + 1, 1)).values
    plain, shifted = [], []
    for m in range(n_max + 1):
        plain.append(
            bareiss_determinant([[seq[i + j] for j in range(m + 1)] for i in range(m + 1)])
        )
        shifted.append(
            bareiss_determinant(
                [[seq[i + j + 1] for j in range(m + 1)] for i in range(m + 1)]
            )
        )
    return plain, shifted


def hankel_positivity(n_max: int) -> Tuple[List[int], List[int]]:
    """Signs of the Hankel and shifted-Hankel determinants for m <= n_max."""

    def signs(values: List[int]) -> List[int]:
        return [0 if v == 0 else (1 if v > 0 else -1) for v in values]

    plain, shifted = hankel_determinants(n_max)
    return signs(plain), signs(shifted)


def ratio_monotone_check(n_max: int, limit: Fraction | float) -> bool:
    """True if A_n/A_{n-1} increases and stays below the given limit."""
    seq = apery_recurrence(n_max).values
    prev = Fraction(0)
    for n in range(1, n_max + 1):
        ratio = Fraction(seq[n], seq[n - 1])
        if ratio <= prev or ratio >= limit:
            return False
        prev = ratio
    return True
