from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from apery_moments.apery import apery_binomial
from apery_moments.exactnum import QSqrt2, SUPPORT_END, qsqrt2_sign
from apery_moments.heun import (
    APERY_FACTOR,
    CertificationError,
    HeunDomainError,
    HeunNotConverged,
    HeunParams,
    LEMMA_CASES,
    LEMMA_THRESHOLDS,
    _coeff_table,
    certify_positive,
    heun_coeffs,
    heun_eval,
)


def test_params_validation():
    with pytest.raises(ValueError):
        HeunParams(a=QSqrt2(0), q=QSqrt2(1), alpha=QSqrt2(1), beta=QSqrt2(1), gamma=QSqrt2(1), delta=QSqrt2(1))
    with pytest.raises(ValueError):
        HeunParams(a=QSqrt2(1), q=QSqrt2(1), alpha=QSqrt2(1), beta=QSqrt2(1), gamma=QSqrt2(-2), delta=QSqrt2(1))
    # gamma = -3/2 is fine (not an integer).
    HeunParams(
        a=QSqrt2(1), q=QSqrt2(1), alpha=QSqrt2(1), beta=QSqrt2(1),
        gamma=QSqrt2(Fraction(-3, 2)), delta=QSqrt2(1),
    )


def test_epsilon_consistency():
    assert LEMMA_CASES["L2"].epsilon == QSqrt2(Fraction(3, 2))
    assert LEMMA_CASES["L6"].epsilon == QSqrt2(Fraction(3, 2))
    assert APERY_FACTOR.epsilon == QSqrt2(Fraction(1, 2))


def test_first_coefficients():
    series = heun_coeffs(APERY_FACTOR, 2)
    assert series.coeffs[0] == QSqrt2(1)
    # q/(a*gamma) with gamma = 1; the norm of a is 1 so this collapses nicely.
    assert series.coeffs[1] == QSqrt2(Fraction(85, 2), -30)
    series_l2 = heun_coeffs(LEMMA_CASES["L2"], 1)
    expected = LEMMA_CASES["L2"].q / (LEMMA_CASES["L2"].a * QSqrt2(Fraction(3, 2)))
    assert series_l2.coeffs[1] == expected


def test_recurrence_residual_is_zero():
    for params in (APERY_FACTOR, LEMMA_CASES["L2"], LEMMA_CASES["L6"]):
        series = heun_coeffs(params, 40)
        for n in range(1, 40):
            assert not series.recurrence_residual(n)


def test_square_generates_apery_prefix():
    # Coefficient of x^2 in (sum p_n (c x)^n)^2 equals A_2 = 73 exactly.
    series = heun_coeffs(APERY_FACTOR, 4)
    scaled = [p * SUPPORT_END**n for n, p in enumerate(series.coeffs)]
    coeff2 = scaled[0] * scaled[2] * 2 + scaled[1] * scaled[1]
    assert coeff2 == 73
    coeff1 = scaled[0] * scaled[1] * 2
    assert coeff1 == 5


class TestCertification:
    def test_certifies_both_cases(self):
        for case in ("L2", "L6"):
            n0, kappa = LEMMA_THRESHOLDS[case]
            cert = certify_positive(LEMMA_CASES[case], n0, kappa)
            assert cert.base_checked and cert.induction_checked
            assert set(cert.witnesses) >= {
                "upper_substitution_above_lower_bound",
                "upper_substitution_below_upper_bound",
                "lower_substitution_above_lower_bound",
                "lower_substitution_below_upper_bound",
            }

    def test_thresholds_are_tight_for_l6(self):
        with pytest.raises(CertificationError):
            certify_positive(LEMMA_CASES["L6"], 17, 4)

    def test_negated_q_fails_base(self):
        p = LEMMA_CASES["L2"]
        bad = HeunParams(a=p.a, q=-p.q, alpha=p.alpha, beta=p.beta, gamma=p.gamma, delta=p.delta)
        with pytest.raises(CertificationError, match="p_1"):
            certify_positive(bad, 45, 10)

    def test_diagnostic_contains_counterexample(self):
        with pytest.raises(CertificationError, match="counterexample"):
            certify_positive(LEMMA_CASES["L2"], 5, 10)

    def test_bracket_scan(self):
        for case in ("L2", "L6"):
            params = LEMMA_CASES[case]
            n0, kappa = LEMMA_THRESHOLDS[case]
            series = heun_coeffs(params, n0 + 500)
            upper = 1 / params.a
            for n in range(n0, n0 + 501):
                ratio = series.coeffs[n] / series.coeffs[n - 1]
                lower = QSqrt2(1) - Fraction(1, kappa * n)
                assert lower < ratio < upper

    def test_all_scanned_coefficients_positive(self):
        for case in ("L2", "L6"):
            series = heun_coeffs(LEMMA_CASES[case], 200)
            assert all(qsqrt2_sign(p) > 0 for p in series.coeffs)


class TestEvaluation:
    def test_value_at_zero(self):
        ev = heun_eval(LEMMA_CASES["L2"], 0, prec=128)
        assert ev.value == 1
        assert ev.error_bound < mpmath.mpf(2) ** -100

    def test_positive_and_above_one_at_half(self):
        ev = heun_eval(LEMMA_CASES["L2"], 0.5, prec=256)
        assert ev.value > 1
        # Partial-sum oracle with 10^4 cached coefficients.
        table = _coeff_table(LEMMA_CASES["L2"], 256)
        table.extend(10_000)
        with mp.workprec(280):
            acc = mpmath.mpf(0)
            zpow = mpmath.mpf(1)
            for n in range(10_001):
                acc += table.coeffs[n] * zpow
                zpow *= mpmath.mpf("0.5")
            assert abs(acc - ev.value) <= ev.error_bound + mpmath.mpf(2) ** -240

    def test_partial_sum_respects_bound_at_exact_rational(self):
        # Exact Horner over Q(sqrt2) at z = 1/4 versus the numeric evaluation.
        params = LEMMA_CASES["L6"]
        ev = heun_eval(params, mpmath.mpf(1) / 4, prec=192)
        series = heun_coeffs(params, 400)
        acc = QSqrt2(0)
        for c in reversed(series.coeffs):
            acc = acc * Fraction(1, 4) + c
        with mp.workprec(256):
            assert abs(acc.to_mpf(256) - ev.value) <= ev.error_bound * 2

    def test_domain_and_convergence_errors(self):
        with pytest.raises(HeunDomainError):
            heun_eval(LEMMA_CASES["L2"], 1.01, prec=64)
        with pytest.raises(HeunNotConverged) as excinfo:
            heun_eval(LEMMA_CASES["L2"], 0.999, prec=256, max_terms=500)
        assert excinfo.value.terms == 500
