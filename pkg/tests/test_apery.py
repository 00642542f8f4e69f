import time
from fractions import Fraction

import pytest

from apery_moments.apery import (
    apery_binomial,
    apery_binomial_sequence,
    apery_recurrence,
    bareiss_determinant,
    hankel_determinants,
    hankel_positivity,
    ratio_monotone_check,
)
from apery_moments.exactnum import SUPPORT_END


def test_first_values():
    assert apery_binomial(0) == 1
    assert apery_binomial(1) == 5
    assert apery_binomial(2) == 73
    assert apery_binomial(3) == 1445
    assert apery_binomial(4) == 33001


def test_recurrence_matches_examples():
    assert apery_recurrence(1).values == (1, 5)
    assert apery_recurrence(2).values == (1, 5, 73)


def test_recurrence_signals_on_corruption():
    import apery_moments.apery as mod

    with pytest.raises(ArithmeticError):
        mod._recurrence_step(1, 6, 1)  # wrong A_1 breaks exact divisibility


def test_two_routes_agree_to_200():
    start = time.monotonic()
    rec = apery_recurrence(200)
    assert rec[200] == apery_binomial(200)
    for n in (0, 1, 2, 17, 50, 100, 199):
        assert rec[n] == apery_binomial(n)
    assert time.monotonic() - start < 10.0


def test_sequence_strictly_increasing_positive():
    seq = apery_recurrence(60).values
    assert all(v > 0 for v in seq)
    assert all(b > a for a, b in zip(seq, seq[1:]))


def test_bareiss_small_matrices():
    assert bareiss_determinant([[3]]) == 3
    assert bareiss_determinant([[1, 2], [3, 4]]) == -2
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1
    assert bareiss_determinant([[1, 2, 3], [4, 5, 6], [7, 8, 9]]) == 0


def test_hankel_first_cases():
    plain, shifted = hankel_determinants(1)
    assert plain[0] == 1
    assert plain[1] == 1 * 73 - 5 * 5 == 48
    assert shifted[0] == 5


def test_hankel_positivity_through_15():
    plain_signs, shifted_signs = hankel_positivity(15)
    assert plain_signs == [1] * 16
    assert shifted_signs == [1] * 16


def test_ratio_increases_toward_limit():
    assert ratio_monotone_check(200, SUPPORT_END)
    seq = apery_recurrence(200).values
    assert Fraction(seq[200], seq[199]) > Fraction(337, 10)  # approaching ~33.97
