from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from apery_moments.exactnum import QSqrt2
from apery_moments.odecheck import (
    SLOPE_AT_C,
    SLOPE_AT_C0,
    de3_residual,
    frobenius_basis,
    frobenius_slope_check,
    indicial_exponents,
    local_square_series,
    maclaurin_recurrence_polys,
    substitution_residual,
    taylor_from_derivs,
)


class TestIndicialData:
    def test_exponents_at_all_four_points(self):
        expected = {
            "0": (Fraction(0), Fraction(0), Fraction(0)),
            "c0": (Fraction(0), Fraction(1, 2), Fraction(1)),
            "c": (Fraction(0), Fraction(1, 2), Fraction(1)),
            "inf": (Fraction(1), Fraction(1), Fraction(1)),
        }
        for point, exps in expected.items():
            assert indicial_exponents(point).exponents == exps

    def test_log_rank(self):
        assert indicial_exponents("0").log_rank == 2
        assert indicial_exponents("inf").log_rank == 2
        assert indicial_exponents("c0").log_rank == 0
        assert indicial_exponents("c").log_rank == 0

    def test_interior_exponent_sums(self):
        for point in ("c0", "c"):
            assert sum(indicial_exponents(point).exponents) == Fraction(3, 2)

    def test_unknown_singularity(self):
        with pytest.raises(ValueError):
            indicial_exponents("elsewhere")


class TestSlopeConstants:
    def test_full_report_passes(self):
        report = frobenius_slope_check(12)
        assert report.passed
        assert report.slope_c0 == SLOPE_AT_C0
        assert report.slope_c == SLOPE_AT_C
        assert report.substitution_clean

    def test_stated_constants_shape(self):
        assert SLOPE_AT_C0 == QSqrt2(Fraction(-5), Fraction(-169, 48))
        assert SLOPE_AT_C == SLOPE_AT_C0.conjugate()

    def test_wrong_slope_leaves_residual(self):
        series = local_square_series("c0", 8, w1_override=QSqrt2(Fraction(-1, 2)))
        residual = substitution_residual("c0", series, 3)
        assert any(residual)

    def test_involution_relates_the_two_slopes(self):
        from apery_moments.exactnum import SUPPORT_END

        assert SLOPE_AT_C0 == -SUPPORT_END - SLOPE_AT_C * SUPPORT_END**2


def test_maclaurin_recurrence_is_the_integer_recurrence():
    polys = maclaurin_recurrence_polys()
    assert sorted(polys) == [-1, 0, 1]
    assert polys[1] == (1, 3, 3, 1)  # (n+1)^3
    assert polys[0] == (-5, -27, -51, -34)  # -(34n^3+51n^2+27n+5)
    assert polys[-1] == (0, 0, 0, 1)  # n^3


def test_residual_of_constant_function():
    # Only the (x-5)u term survives for u = 1.
    def constant_one(x, prec):
        return [mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(0)]

    r = de3_residual(constant_one, 1.0, 128)
    assert r == -4


def test_residual_rejects_singular_points():
    def dummy(x, prec):
        return [mpmath.mpf(1)] * 4

    with pytest.raises(ValueError):
        de3_residual(dummy, 0, 128)


def test_taylor_from_derivs_against_series_oracle():
    from apery_moments.apery import apery_recurrence

    order = 400
    seq = apery_recurrence(order).values
    prec = 192
    with mp.workprec(prec):
        x0 = mpmath.mpf("0.01")

        def series_deriv(k):
            return sum(
                mpmath.mpf(seq[n]) * mpmath.ff(n, k) * x0 ** (n - k)
                for n in range(k, order)
            )

        coeffs = taylor_from_derivs(x0, [series_deriv(k) for k in range(3)], 10)
        for k in (3, 6, 9):
            reference = series_deriv(k) / mpmath.factorial(k)
            assert abs(coeffs[k] - reference) / abs(reference) < mpmath.mpf(2) ** (40 - prec)


def test_frobenius_basis_solves_the_operator():
    # Substitute each basis member into the operator numerically: the residual
    # series must vanish to working accuracy order by order.
    from apery_moments.odecheck import _shifted_polys_mpf, FINITE_SINGULAR_POINTS
    from apery_moments.exactnum import to_mpf

    prec = 192
    with mp.workprec(prec):
        basis = frobenius_basis("c0", 24)
        x0 = to_mpf(FINITE_SINGULAR_POINTS["c0"], prec)
        b = _shifted_polys_mpf(x0)
        for key, rho in (("0", mpmath.mpf(0)), ("half", mpmath.mpf(1) / 2), ("1", mpmath.mpf(1))):
            e = basis[key]
            scale = max(abs(c) for c in e[:20])
            for m in range(0, 16):
                acc = mpmath.mpf(0)
                for i in range(4):
                    for j, bij in enumerate(b[i]):
                        if not bij:
                            continue
                        k = m - 2 + i - j
                        if 0 <= k < len(e):
                            s = rho + k
                            ff = mpmath.mpf(1)
                            for step in range(i):
                                ff *= s - step
                            acc += bij * ff * e[k]
                assert abs(acc) < scale * mpmath.mpf(2) ** (60 - prec)
