import mpmath
import pytest
from mpmath import mp

from apery_moments.apery import apery_recurrence
from apery_moments.density import (
    DomainError,
    algebraic_maps,
    endpoint_constants,
    phi,
    u0_coeffs,
    u0_derivs,
    u0_eval,
    uinf_derivs,
    uinf_eval,
    v0_derivs,
    v0_eval,
    v2_derivs,
    v2_eval,
)
from apery_moments.exactnum import BRANCH_POINT, MAP_COLLISION, SUPPORT_END, to_mpf
from apery_moments.hyper import f21_eval, special_constants
from apery_moments.odecheck import de3_residual

PREC = 256


def c_value(prec=PREC):
    return to_mpf(SUPPORT_END, prec)


def c0_value(prec=PREC):
    return to_mpf(BRANCH_POINT, prec)


class TestAlgebraicMaps:
    def test_at_zero(self):
        maps = algebraic_maps(0, PREC)
        assert maps.mu == 1
        assert maps.lam == 0
        with mp.workprec(PREC):
            assert abs(maps.mu2 - mpmath.sqrt(2)) < mpmath.mpf(2) ** -240
            assert abs(maps.lam2 - 1) < mpmath.mpf(2) ** -240

    def test_collision_at_branch_point(self):
        maps = algebraic_maps(c0_value(), PREC)
        z0 = to_mpf(MAP_COLLISION, PREC)
        with mp.workprec(PREC):
            # The two argument maps collide at the value 1/2 - sqrt2/4; the
            # collision is a square-root contact, so the residual scales like
            # the root of the working epsilon.
            assert abs(maps.lam - z0) < mpmath.mpf(2) ** -120
            assert abs(maps.lam2 - z0) < mpmath.mpf(2) ** -120

    def test_interval_bounds(self):
        with mp.workprec(PREC):
            for frac in ("0.1", "0.35", "0.65", "0.9"):
                x = c0_value() * mpmath.mpf(frac)
                maps = algebraic_maps(x, PREC)
                assert maps.mu > 1
                assert maps.mu2 > 1
                assert 0 < maps.lam < 1
                assert 0 < maps.lam2 < 1

    def test_product_identity(self):
        with mp.workprec(PREC):
            for frac in ("0.05", "0.5", "0.95"):
                x = c0_value() * mpmath.mpf(frac)
                maps = algebraic_maps(x, PREC)
                assert abs(maps.mu * maps.mu2 * (x + 1) - mpmath.sqrt(2)) < mpmath.mpf(2) ** -240

    def test_radical_free_combinations(self):
        # lam + lam2 and lam * lam2 are rational functions of x.
        with mp.workprec(PREC):
            for frac in ("0.2", "0.7"):
                x = c0_value() * mpmath.mpf(frac)
                maps = algebraic_maps(x, PREC)
                cubic = ((x + 30) * x - 24) * x + 1
                quad = (x - 7) * x + 1
                disc = (x - c0_value()) * (x - c_value())
                denom = (x + 1) ** 3
                sum_expected = cubic / denom
                prod_expected = (cubic**2 - quad**2 * disc) / (4 * denom**2)
                assert abs(maps.lam + maps.lam2 - sum_expected) < mpmath.mpf("1e-30")
                assert abs(maps.lam * maps.lam2 - prod_expected) < mpmath.mpf("1e-30")

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            algebraic_maps(-1, PREC)
        with pytest.raises(DomainError):
            algebraic_maps(1.0, PREC)  # strictly between the roots


class TestU0:
    def test_exact_coefficients_are_apery(self):
        seq = apery_recurrence(12).values
        assert [int(c) for c in u0_coeffs(12)] == list(seq)

    def test_limit_at_zero(self):
        value, bound = u0_eval(mpmath.mpf("1e-20"), PREC)
        with mp.workprec(PREC):
            assert abs(value - 1) < mpmath.mpf("1e-18")

    def test_against_series_partial_sum(self):
        seq = apery_recurrence(600).values
        with mp.workprec(PREC + 32):
            x = c0_value(PREC + 32) / 2
            value, bound = u0_eval(x, PREC)
            partial = mpmath.mpf(0)
            for n in range(599, -1, -1):
                partial = partial * x + seq[n]
            assert abs(value - partial) < mpmath.mpf("1e-20")

    def test_domain(self):
        with pytest.raises(DomainError):
            u0_eval(0.5, PREC)


class TestV0:
    def test_negative_on_grid(self):
        with mp.workprec(PREC):
            for frac in ("0.05", "0.3", "0.6", "0.9"):
                x = c0_value() * mpmath.mpf(frac)
                value, _ = v0_eval(x, PREC)
                assert value < 0

    def test_log_asymptotics(self):
        with mp.workprec(PREC):
            errs = []
            for d in ("1e-6", "1e-8"):
                x = mpmath.mpf(d)
                value, _ = v0_eval(x, PREC)
                errs.append(abs(value - mpmath.log(x)))
            assert errs[0] < mpmath.mpf("1e-3")
            assert errs[1] < errs[0]

    def test_finite_near_branch_point(self):
        with mp.workprec(PREC):
            x = c0_value() * mpmath.mpf("0.9")
            value, _ = v0_eval(x, PREC)
            assert value < 0
            assert abs(value) < abs(mpmath.log(x)) + 10


class TestV2:
    def test_zero_at_support_end(self):
        value, bound = v2_eval(c_value(), PREC)
        assert value == 0

    def test_positive_on_grid(self):
        with mp.workprec(PREC):
            c0, c = c0_value(), c_value()
            for frac in ("1e-6", "0.01", "0.2", "0.5", "0.8", "0.999"):
                x = c0 + (c - c0) * mpmath.mpf(frac)
                value, _ = v2_eval(x, PREC)
                assert value > 0

    def test_sqrt_asymptotics_at_support_end(self):
        with mp.workprec(PREC):
            ratios = []
            for d in ("1e-4", "1e-6"):
                delta = mpmath.mpf(d)
                value, _ = v2_eval(c_value() - delta, PREC)
                ratios.append(value / mpmath.sqrt(delta))
            assert abs(ratios[0] - 1) < mpmath.mpf("1e-2")
            assert abs(ratios[1] - 1) < abs(ratios[0] - 1)

    def test_chain_matches_direct_product(self):
        from apery_moments.density import _v2_direct

        with mp.workprec(PREC + 16):
            for d in ("0.9", "0.4", "0.15"):
                x = c0_value(PREC + 16) + mpmath.mpf(d)
                direct, direct_bound = _v2_direct(x, PREC, None)
                chained, chain_bound = v2_eval(x, PREC)
                assert abs(direct - chained) < mpmath.mpf("1e-70")

    def test_local_and_chain_agree_at_same_point(self):
        from apery_moments.density import _right_evaluator

        ev = _right_evaluator(PREC)
        with mp.workprec(ev.work):
            for mult in ("4", "2", "1.2"):
                d = mpmath.mpf(2) ** -10 * mpmath.mpf(mult)
                local_value, _ = ev._local_value(d)
                chain_value, _ = ev.value(ev.c0 + d)
                assert abs(local_value - chain_value) < mpmath.mpf("1e-60")

    def test_branch_point_value_is_finite_positive(self):
        value, bound = v2_eval(c0_value(), PREC)
        with mp.workprec(PREC):
            assert value > 0
            assert abs(value - mpmath.mpf("1831.7054300456")) < mpmath.mpf("1e-9")


class TestUinf:
    def test_laurent_match_far_out(self):
        seq = apery_recurrence(80).values
        with mp.workprec(PREC):
            for xs in ("1e6", "1e3"):
                x = mpmath.mpf(xs)
                value, _ = uinf_eval(x, PREC)
                laurent = mpmath.mpf(0)
                for n in range(79, -1, -1):
                    laurent = laurent / x + seq[n]
                laurent /= x
                assert abs(value - laurent) / abs(value) < mpmath.mpf("1e-10")

    def test_removable_point(self):
        derivs = uinf_derivs(-1, PREC)
        with mp.workprec(PREC):
            oracle = -f21_eval(mpmath.mpf(1) / 2, PREC).value ** 2 / 3
            assert abs(derivs[0] - oracle) < mpmath.mpf("1e-70")
        value, bound = uinf_eval(-1, PREC)
        with mp.workprec(PREC):
            assert abs(value - derivs[0]) < mpmath.mpf("1e-70")

    def test_sqrt_slope_at_support_end(self):
        sc = special_constants(PREC)
        cons = endpoint_constants(PREC)
        with mp.workprec(PREC):
            a_const = sc.s0**2 / (3 * mpmath.sqrt(2) * (mpmath.sqrt(2) + 1) ** 2)
            slopes = []
            for d in ("1e-6", "1e-8"):
                delta = mpmath.mpf(d)
                value, _ = uinf_eval(c_value() + delta, PREC)
                slopes.append((value - a_const) / mpmath.sqrt(delta))
            assert abs(slopes[0] - cons.sqrt_slope_right) < mpmath.mpf("1e-5")
            assert abs(slopes[1] - cons.sqrt_slope_right) < abs(slopes[0] - cons.sqrt_slope_right)

    def test_log_squared_blowup_at_zero(self):
        cons = endpoint_constants(PREC)
        with mp.workprec(PREC):
            delta = mpmath.mpf("1e-10")
            value, _ = uinf_eval(-delta, PREC)
            assert abs(value / mpmath.log(delta) ** 2 - cons.log2_coeff_left) < mpmath.mpf("1e-8")

    def test_domain(self):
        with pytest.raises(DomainError):
            uinf_eval(17, PREC)


class TestResiduals:
    def test_all_four_solutions(self):
        with mp.workprec(PREC):
            c0, c = c0_value(), c_value()
            cases = [
                (u0_derivs, [c0 * mpmath.mpf(f) for f in ("0.2", "0.5", "0.8")]),
                (v0_derivs, [c0 * mpmath.mpf(f) for f in ("0.2", "0.5", "0.8")]),
                (v2_derivs, [(c0 + c) / 2, c - 2, c0 + 1]),
                (uinf_derivs, [2 * c, mpmath.mpf(-1), mpmath.mpf(-2)]),
            ]
            for handle, points in cases:
                for x in points:
                    assert abs(de3_residual(handle, x, PREC)) < mpmath.mpf("1e-15")


class TestPhi:
    def test_positive_at_interior_points(self):
        with mp.workprec(PREC):
            for x in (c0_value() / 2, mpmath.mpf(1), mpmath.mpf(10), mpmath.mpf(30)):
                point = phi(x, PREC)
                assert point.phi > 0

    def test_branch_labels(self):
        assert phi(c0_value() / 2, PREC).branch == "left"
        assert phi(c0_value(), PREC).branch == "right"
        assert phi(1.0, PREC).branch == "right"

    def test_log_blowup_at_zero(self):
        with mp.workprec(PREC):
            target = 6 / mpmath.pi**2
            errs = []
            for d in ("1e-5", "1e-8"):
                delta = mpmath.mpf(d)
                point = phi(delta, PREC)
                errs.append(abs(point.phi / (-mpmath.log(delta)) - target))
            assert errs[1] < errs[0]
            assert errs[1] < mpmath.mpf("1e-2") * target

    def test_sqrt_vanishing_at_support_end(self):
        cons = endpoint_constants(PREC)
        with mp.workprec(PREC):
            delta = mpmath.mpf("1e-8")
            point = phi(c_value() - delta, PREC)
            ratio = point.phi / mpmath.sqrt(delta)
            assert abs(ratio - cons.scale_right) < mpmath.mpf("1e-2") * cons.scale_right

    def test_near_continuity_at_branch_point(self):
        # Not asserted by the closed forms; measured here.  The left limit and
        # the right value agree far better than either varies locally, which
        # pins the measured jump to zero at this resolution.
        with mp.workprec(PREC):
            right = phi(c0_value(), PREC).phi
            left = phi(c0_value() - mpmath.mpf("1e-12"), PREC).phi
            assert abs(left - right) < mpmath.mpf("1e-9")

    def test_domain(self):
        with pytest.raises(DomainError):
            phi(0, PREC)
        with pytest.raises(DomainError):
            phi(c_value() + 1, PREC)


def test_generating_slope_toward_zero():
    # mu(x) F(lam(x)) = 1 + (5/2) x + O(x^2): finite-difference slope check.
    with mp.workprec(PREC):
        x = mpmath.mpf("1e-6")
        maps = algebraic_maps(x, PREC)
        value = maps.mu * f21_eval(maps.lam, PREC).value
        slope = (value - 1) / x
        assert abs(slope - mpmath.mpf(5) / 2) < mpmath.mpf("1e-4")
