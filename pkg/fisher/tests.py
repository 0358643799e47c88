"""
Tests for Fisher information and the deficiency analysis.
"""
import math
from types import SimpleNamespace
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from bessel.services import BesselService
from core.exceptions import ConvergenceError, DomainError, NonUnimodalError
from increments.domain import ModelParams, RegimeTag, SamplingScheme
from increments.services import IncrementLawService
from .services import FisherService, _check_unimodal


class PsiTest(SimpleTestCase):
    """Test psi and its limits."""

    def test_microscopic_limit(self) -> None:
        self.assertLess(abs(1e-4 * FisherService.psi(1e-4) - 1.0), 1e-2)

    def test_macroscopic_limit(self) -> None:
        x = 1e3
        self.assertLess(abs(2 * x * x * FisherService.psi(x) - 1.0), 0.1)

    def test_agrees_with_score_second_moment(self) -> None:
        params, step = ModelParams(2.0), 0.3
        _, second = IncrementLawService.score_moments(params, step)
        self.assertAlmostEqual(FisherService.psi(0.6) / (second / step ** 2), 1.0, delta=1e-6)

    def test_information_per_unit_time_nonincreasing_under_doubling(self) -> None:
        # every doubled step is a coarsening of the finer grid
        grid = [1e-4 * 2 ** j for j in range(24)]
        scaled = [x * FisherService.psi(x) for x in grid]
        for finer, coarser in zip(scaled, scaled[1:]):
            self.assertLessEqual(coarser, finer * (1 + 1e-12))
        self.assertTrue(all(0 < value <= 1 + 1e-12 for value in scaled))

    def test_macroscopic_gap_shrinks(self) -> None:
        gaps = [abs(2 * x * x * FisherService.psi(x) - 1.0) for x in (50.0, 100.0, 200.0, 400.0, 800.0)]
        self.assertTrue(all(a > b for a, b in zip(gaps, gaps[1:])))


class InformationTest(SimpleTestCase):
    """Test total and limit information."""

    def test_microscopic_regime(self) -> None:
        info = FisherService.total_information(ModelParams(1.0), SamplingScheme(horizon=100.0, step=1e-4))
        self.assertLess(abs(info / 100.0 - 1.0), 0.01)

    def test_macroscopic_regime(self) -> None:
        info = FisherService.total_information(ModelParams(1.0), SamplingScheme(horizon=1e6, step=1e3))
        self.assertLess(abs(info / 500.0 - 1.0), 0.1)

    def test_single_increment(self) -> None:
        info = FisherService.total_information(ModelParams(2.0), SamplingScheme(horizon=0.5, step=0.5))
        self.assertAlmostEqual(info, 0.25 * FisherService.psi(1.0), places=14)

    def test_limit_formulas(self) -> None:
        self.assertEqual(
            FisherService.limit_information(RegimeTag.MICROSCOPIC, ModelParams(2.0), SamplingScheme(horizon=10.0, step=1.0)),
            5.0,
        )
        self.assertEqual(
            FisherService.limit_information(RegimeTag.MACROSCOPIC, ModelParams(1.0), SamplingScheme(horizon=100.0, step=10.0)),
            5.0,
        )
        self.assertAlmostEqual(
            FisherService.limit_information(RegimeTag.INTERMEDIATE, ModelParams(1.0), SamplingScheme(horizon=60.0, step=0.6)),
            36.0 * FisherService.psi(0.6),
            places=12,
        )

    def test_qv_variance(self) -> None:
        params, scheme = ModelParams(1.5), SamplingScheme(horizon=200.0, step=0.4)
        expected = 1.5 / 200.0 + 2 * 1.5 ** 2 * 0.4 / 200.0
        self.assertAlmostEqual(FisherService.qv_variance(params, scheme), expected, places=15)

    def test_three_way_agreement(self) -> None:
        grid = [(theta, step) for theta in (0.5, 1.0, 3.0) for step in (0.01, 0.2, 1.5, 12.0)]
        for theta, step in grid:
            params = ModelParams(theta)
            scheme = SamplingScheme.from_count(1000, step)
            table = IncrementLawService.pmf_table(theta * step)
            by_psi = FisherService.total_information(params, scheme)
            _, second = IncrementLawService.score_moments(params, step, table=table)
            by_score = scheme.count * second
            by_hessian = -scheme.count * table.expectation(IncrementLawService.hessian_terms(theta, step, table.orders))
            self.assertLess(abs(by_psi / by_score - 1.0), 1e-7)
            self.assertLess(abs(by_psi / by_hessian - 1.0), 1e-7)
            self.assertLess(abs(by_score / by_hessian - 1.0), 1e-7)

    def test_finite_difference_oracle(self) -> None:
        for theta, step in ((1.0, 0.01), (1.0, 0.6), (2.0, 3.0), (0.5, 20.0)):
            table = IncrementLawService.pmf_table(theta * step)
            eps = 1e-4 * theta

            def log_pmf(t: float) -> np.ndarray:
                logs = BesselService.log_bessel_i_orders(table.support, t * step)
                return logs - t * step

            second = (log_pmf(theta + eps) - 2 * log_pmf(theta) + log_pmf(theta - eps)) / eps ** 2
            expected = step * step * FisherService.psi(theta * step)
            self.assertLess(abs(-table.expectation(second) / expected - 1.0), 1e-4)

    def test_through_scales(self) -> None:
        points = FisherService.information_through_scales(1.0, [0.01, 0.6, 50.0], 10000)
        self.assertEqual([p.delta for p in points], [0.01, 0.6, 50.0])
        for point in points:
            self.assertAlmostEqual(point.horizon, 10000 * point.delta, places=8)
            self.assertLessEqual(point.qv_inverse_variance, point.info * (1 + 1e-12))
            self.assertLessEqual(point.info, point.info_micro * (1 + 1e-12))


class DeficiencyTest(SimpleTestCase):
    """Test the deficiency ratio and its maximum."""

    def test_known_maximum_value(self) -> None:
        self.assertAlmostEqual(FisherService.deficiency_ratio(0.6), 1.2297, delta=0.005)

    def test_efficient_at_small_scale(self) -> None:
        self.assertLess(abs(FisherService.deficiency_ratio(1e-3) - 1.0), 0.02)

    def test_above_one(self) -> None:
        for x in np.linspace(0.005, 0.25, 50):
            self.assertGreater(FisherService.deficiency_ratio(float(x)), 1.0)
        for x in np.geomspace(0.25, 10.0, 30):
            self.assertGreater(FisherService.deficiency_ratio(float(x)), 1.0)

    def test_curve_is_continuous(self) -> None:
        grid = np.geomspace(0.05, 10.0, 400)
        points = FisherService.info_curve(grid)
        for left, right in zip(points, points[1:]):
            self.assertLessEqual(abs(right.ratio - left.ratio), 3.0 * (right.x - left.x))
            self.assertGreater(left.psi, 0.0)

    def test_max_deficiency(self) -> None:
        result = FisherService.max_deficiency(0.1, 5.0, 1e-4)
        self.assertAlmostEqual(result.x_star, 0.600, delta=0.01)
        self.assertAlmostEqual(result.ratio_star, 1.2297, delta=0.005)
        self.assertFalse(result.at_boundary)
        self.assertTrue(20.0 <= result.loss_percent <= 26.0)

    def test_default_bracket(self) -> None:
        result = FisherService.max_deficiency()
        self.assertAlmostEqual(result.x_star, 0.600, delta=0.01)
        self.assertTrue(0.20 <= result.ratio_star - 1.0 <= 0.26)

    def test_default_bracket_from_settings(self) -> None:
        with override_settings(SCALE_INFERENCE={'DEFICIENCY_BRACKET': (0.01, 0.09)}):
            result = FisherService.max_deficiency()
        self.assertTrue(result.at_boundary)
        self.assertAlmostEqual(result.x_star, 0.09, places=12)

    def test_refined_maximum_beats_dense_scan(self) -> None:
        result = FisherService.max_deficiency(0.1, 5.0, 1e-6)
        dense = max(FisherService.deficiency_ratio(float(x)) for x in np.linspace(0.55, 0.65, 1001))
        self.assertGreaterEqual(result.ratio_star, dense - 1e-9)

    def test_failed_refinement(self) -> None:
        failure = SimpleNamespace(success=False, message='maximum iterations', x=0.6, fun=-1.2)
        with mock.patch('fisher.services.minimize_scalar', return_value=failure):
            with self.assertRaises(ConvergenceError):
                FisherService.max_deficiency(0.1, 5.0)

    def test_boundary_maximum(self) -> None:
        result = FisherService.max_deficiency(0.01, 0.09, 1e-4)
        self.assertTrue(result.at_boundary)
        self.assertAlmostEqual(result.x_star, 0.09, places=12)

    def test_non_unimodal_scan(self) -> None:
        with self.assertRaises(NonUnimodalError) as ctx:
            _check_unimodal([1.0, 2.0, 3.0, 4.0], [1.0, 0.5, 0.7, 0.6])
        self.assertEqual(ctx.exception.triple, (1.0, 2.0, 3.0))

    def test_invalid_bracket(self) -> None:
        with self.assertRaises(DomainError):
            FisherService.max_deficiency(1.0, 0.5)
        with self.assertRaises(DomainError):
            FisherService.max_deficiency(0.0, 0.5)
        with self.assertRaises(DomainError):
            FisherService.max_deficiency(0.1, 0.5, tol=0.0)
