"""
Tests for the L2 distance to the Gaussian limit.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DomainError
from increments.services import IncrementLawService
from .services import GaussianizationService, JitteredLaw, _spectral_difference


class JitteredLawTest(SimpleTestCase):
    """Test the jittered density."""

    def test_piecewise_constant(self) -> None:
        self.assertEqual(GaussianizationService.jittered_density(1.0, 0.3), IncrementLawService.pmf(1.0, 0))
        self.assertEqual(GaussianizationService.jittered_density(1.0, 0.7), IncrementLawService.pmf(1.0, 1))
        self.assertEqual(GaussianizationService.jittered_density(1.0, -0.7), IncrementLawService.pmf(1.0, -1))

    def test_normalization(self) -> None:
        for x in (0.5, 10.0, 100.0):
            self.assertAlmostEqual(JitteredLaw(x).total_mass(), 1.0, delta=1e-12)


class DistanceTest(SimpleTestCase):
    """Test the two routes to the L2 distance."""

    def test_spectral_integrand_vanishes_at_zero(self) -> None:
        self.assertEqual(_spectral_difference(0.0, 10.0), 0.0)
        self.assertLess(_spectral_difference(1e-6, 10.0), 1e-30)

    def test_spectral_integrand_at_large_product(self) -> None:
        for x in (250.0, 1e3, 1e4):
            for xi in (1.0, 2.0, 3.0, math.pi):
                value = _spectral_difference(xi, x)
                self.assertTrue(math.isfinite(value), msg=f'x={x} xi={xi}')
                lattice = math.exp(-2.0 * x * math.sin(0.5 * xi) ** 2) * math.sin(0.5 * xi) / (0.5 * xi)
                self.assertAlmostEqual(value, (lattice - math.exp(-0.5 * x * xi * xi)) ** 2, delta=1e-300 + 1e-12 * value)

    def test_routes_agree(self) -> None:
        for delta in (10.0, 1e2, 1e3, 1e4):
            direct = GaussianizationService.l2_distance_direct(1.0, delta)
            spectral = GaussianizationService.l2_distance_spectral(1.0, delta)
            self.assertGreater(spectral, 0.0)
            self.assertLessEqual(abs(direct - spectral), 1e-4 * max(direct, spectral), msg=f'delta={delta}')

    def test_small_step_flag(self) -> None:
        self.assertTrue(GaussianizationService.is_small_step(1.0, 0.5))
        self.assertFalse(GaussianizationService.is_small_step(1.0, 10.0))
        self.assertGreater(GaussianizationService.l2_distance_direct(1.0, 0.5), 1e-3)

    def test_scaling_exponent(self) -> None:
        # the per-cell slope of the Gaussian density dominates: decay is delta^(-3/2)
        slope = GaussianizationService.scaling_exponent(1.0, list(np.geomspace(1e2, 1e4, 5)))
        self.assertAlmostEqual(slope, -1.5, delta=0.1)

    def test_delta_times_distance(self) -> None:
        rows = GaussianizationService.distance_scan(1.0, [1e2, 1e3, 1e4], spectral=False)
        scaled = [row.delta_times_l2 for row in rows]
        self.assertTrue(all(a > b for a, b in zip(scaled, scaled[1:])))
        normalised = [row.delta ** 1.5 * row.l2_direct for row in rows]
        self.assertLess(max(normalised) / min(normalised) - 1.0, 0.2)
        ratio = rows[0].l2_direct / rows[1].l2_direct
        self.assertLess(abs(ratio / 10 ** 1.5 - 1.0), 0.15)

    def test_leading_term(self) -> None:
        x = 1e3
        leading = 1.0 / (48.0 * math.sqrt(math.pi) * x ** 1.5)
        self.assertLess(abs(GaussianizationService.l2_distance_direct(1.0, x) / leading - 1.0), 0.05)

    def test_domain_errors(self) -> None:
        with self.assertRaises(DomainError):
            GaussianizationService.l2_distance_direct(0.0, 1.0)
        with self.assertRaises(DomainError):
            GaussianizationService.l2_distance_spectral(1.0, -1.0)
        with self.assertRaises(DomainError):
            GaussianizationService.scaling_exponent(1.0, [10.0])
