import mpmath
import pytest
from mpmath import mp

from apery_moments.moments import (
    QuadratureSpec,
    gauss_legendre,
    integrate,
    moment,
    moment_suite,
    node_positivity_check,
    right_tail_mass_fraction,
)

FAST = QuadratureSpec(order=16, levels=18, prec=128, rel_tol=1e-6)


class TestGaussLegendre:
    def test_weights_sum_to_two(self):
        for order in (5, 16, 30):
            nodes, weights = gauss_legendre(order, 128)
            with mp.workprec(128):
                assert abs(sum(weights) - 2) < mpmath.mpf(2) ** -120

    def test_polynomial_exactness(self):
        # Order-n Gauss rule integrates x^(2n-1) exactly.
        nodes, weights = gauss_legendre(8, 128)
        with mp.workprec(128):
            for power in (2, 7, 15):
                value = sum(w * t**power for t, w in zip(nodes, weights))
                exact = mpmath.mpf(0) if power % 2 else mpmath.mpf(2) / (power + 1)
                assert abs(value - exact) < mpmath.mpf(2) ** -110


class TestIntegrate:
    def test_log_singularity(self):
        spec = QuadratureSpec(order=20, levels=30, prec=128)
        with mp.workprec(140):
            value, err, _ = integrate(
                lambda x: (-mpmath.log(x), mpmath.mpf(0)), 0, 1, spec, graded_left=True
            )
            assert abs(value - 1) < mpmath.mpf("1e-10")

    def test_sqrt_singularity(self):
        spec = QuadratureSpec(order=20, levels=30, prec=128)
        with mp.workprec(140):
            value, err, _ = integrate(
                lambda x: (mpmath.sqrt(1 - x), mpmath.mpf(0)), 0, 1, spec, graded_right=True
            )
            assert abs(value - mpmath.mpf(2) / 3) < mpmath.mpf("1e-10")

    def test_mixed_singularities_against_brute_force(self):
        # -log(x)/sqrt(1-x) + x: graded rule against a deep uniform mesh.
        spec = QuadratureSpec(order=20, levels=34, prec=160)

        def f(x):
            return (-mpmath.log(x) / mpmath.sqrt(1 - x) + x, mpmath.mpf(0))

        with mp.workprec(180):
            value, err, _ = integrate(f, 0, 1, spec, graded_left=True, graded_right=True)
            brute = mpmath.quad(
                lambda x: -mpmath.log(x) / mpmath.sqrt(1 - x) + x, [0, 1]
            )
            assert abs(value - brute) < mpmath.mpf("1e-8")

    def test_error_estimate_tracks_truth(self):
        spec = QuadratureSpec(order=12, levels=10, prec=128)
        with mp.workprec(140):
            value, err, _ = integrate(
                lambda x: (mpmath.exp(x), mpmath.mpf(0)), 0, 1, spec
            )
            truth = mpmath.e - 1
            assert abs(value - truth) <= err + mpmath.mpf(2) ** -110


class TestMoments:
    def test_first_moments_fast_config(self):
        for k, expected in ((0, 1), (1, 5), (4, 33001)):
            report = moment(k, FAST)
            assert report.exact == expected
            assert report.passed, report.line()

    def test_monotone_refinement(self):
        # Error estimates shrink as the mesh deepens.
        shallow = QuadratureSpec(order=12, levels=8, prec=128)
        deep = QuadratureSpec(order=12, levels=16, prec=128)
        with mp.workprec(140):
            r_shallow = moment(2, shallow)
            r_deep = moment(2, deep)
            assert r_deep.rel_error < r_shallow.rel_error

    def test_unsplit_mesh_is_flagged(self):
        # Without the interior split the kink falls inside panels and the
        # achieved accuracy collapses by orders of magnitude; at a tolerance
        # the split mesh meets comfortably, the unsplit run fails.
        tight = 1e-12
        split = QuadratureSpec(order=16, levels=18, prec=128, rel_tol=tight)
        unsplit = QuadratureSpec(
            order=16, levels=18, prec=128, rel_tol=tight, split_at_branch_point=False
        )
        r_split = moment(2, split)
        r_unsplit = moment(2, unsplit)
        assert r_unsplit.rel_error > r_split.rel_error * 100
        assert r_unsplit.error_estimate > r_split.error_estimate * 100
        assert r_split.passed
        assert not r_unsplit.passed

    def test_halved_precision_still_meets_loose_tolerance(self):
        spec = QuadratureSpec(order=16, levels=18, prec=64, rel_tol=1e-4)
        report = moment(0, spec)
        assert report.passed

    def test_node_positivity(self):
        assert node_positivity_check(FAST)

    def test_mass_concentrates_right_for_large_k(self):
        fraction = right_tail_mass_fraction(12, FAST)
        assert fraction > mpmath.mpf("0.9")

    def test_suite_reports(self):
        reports = moment_suite(3, FAST)
        assert [r.k for r in reports] == [0, 1, 2, 3]
        assert all(r.passed for r in reports)
        assert reports[2].exact == 73

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            moment(-1, FAST)
