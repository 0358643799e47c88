"""
Tests for the time-dependent intensity model.
"""
import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConvergenceError, DomainError
from fisher.services import FisherService
from increments.domain import ModelParams, RegimeTag, SamplingScheme
from increments.tests import chi_square_pvalue
from .domain import builtin_intensity, constant_intensity, linear_intensity, sine_intensity
from .services import NonHomogeneousService


class IntensityModelTest(SimpleTestCase):
    """Test the built-in intensities."""

    def test_registry(self) -> None:
        self.assertEqual(builtin_intensity('sine').name, 'sine')
        with self.assertRaises(DomainError):
            builtin_intensity('cubic')

    def test_check(self) -> None:
        model = linear_intensity(theta_max=5.0)
        model.check(5.0)
        with self.assertRaises(DomainError):
            model.check(6.0)
        with self.assertRaises(DomainError):
            model.check(-1.0)


class CumulativeIntensityTest(SimpleTestCase):
    """Test Lambda_T."""

    def test_constant(self) -> None:
        value = NonHomogeneousService.cumulative_intensity(constant_intensity(), 2.0, 3.0, 10.0)
        self.assertAlmostEqual(value, 6.0, places=10)

    def test_linear_closed_form(self) -> None:
        value = NonHomogeneousService.cumulative_intensity(linear_intensity(), 2.0, 10.0, 10.0)
        self.assertAlmostEqual(value, 2.0 * 10.0 * 1.5, places=9)

    def test_origin_and_monotonicity(self) -> None:
        model = sine_intensity()
        self.assertEqual(NonHomogeneousService.cumulative_intensity(model, 1.0, 0.0, 5.0), 0.0)
        values = [NonHomogeneousService.cumulative_intensity(model, 1.0, t, 5.0) for t in np.linspace(0, 5, 21)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_invalid_time(self) -> None:
        with self.assertRaises(DomainError):
            NonHomogeneousService.cumulative_intensity(constant_intensity(), 1.0, 11.0, 10.0)

    def test_quadrature_failure(self) -> None:
        failed = (1.0, 0.25, {}, 'roundoff error is detected')
        with mock.patch('nonhomogeneous.services.quad', return_value=failed):
            with self.assertRaises(ConvergenceError) as ctx:
                NonHomogeneousService.cumulative_intensity(constant_intensity(), 1.0, 1.0, 2.0)
        self.assertEqual(ctx.exception.residual, 0.25)

    def test_increment_intensities_sum(self) -> None:
        scheme = SamplingScheme(horizon=10.0, step=0.5)
        for model in (constant_intensity(), linear_intensity(), sine_intensity()):
            increments = NonHomogeneousService.increment_intensities(model, 1.3, scheme)
            self.assertEqual(increments.size, 20)
            total = NonHomogeneousService.cumulative_intensity(model, 1.3, 10.0, 10.0)
            self.assertAlmostEqual(increments.sum(), total, places=9)

    def test_piecewise_approximation(self) -> None:
        theta = 2.0
        for model in (linear_intensity(), sine_intensity()):
            for step in (0.1, 1.0):
                scheme = SamplingScheme(horizon=100.0, step=step)
                gap = NonHomogeneousService.piecewise_gap(model, theta, scheme)
                self.assertLessEqual(gap, theta * model.slope_bound * step * step / scheme.horizon)
        gap = NonHomogeneousService.piecewise_gap(linear_intensity(), theta, SamplingScheme(horizon=100.0, step=1.0))
        self.assertAlmostEqual(gap, theta * 1.0 / (2 * 100.0), places=10)


class SamplerTest(SimpleTestCase):
    """Test the time-dependent sampler."""

    def test_shorter_series_is_prefix(self) -> None:
        short = NonHomogeneousService.sample_increments_nh(constant_intensity(), 1.0, SamplingScheme.from_count(10, 1.0), seed=7)
        long = NonHomogeneousService.sample_increments_nh(constant_intensity(), 1.0, SamplingScheme.from_count(20, 1.0), seed=7)
        np.testing.assert_array_equal(short.values, long.values[:10])

    def test_constant_reduces_to_homogeneous_law(self) -> None:
        scheme = SamplingScheme.from_count(200000, 0.6)
        series = NonHomogeneousService.sample_increments_nh(constant_intensity(), 1.0, scheme, seed=31)
        self.assertGreater(chi_square_pvalue(series.values, 0.6), 0.001)

    def test_variance_tracks_cumulative_intensity(self) -> None:
        model = linear_intensity()
        scheme = SamplingScheme.from_count(100000, 0.01)
        intensities = NonHomogeneousService.increment_intensities(model, 1.0, scheme)
        squares = NonHomogeneousService.sample_increments_nh(model, 1.0, scheme, seed=32).values.astype(float) ** 2
        for part in (slice(0, 50000), slice(50000, 100000)):
            expected = intensities[part].sum()
            stderr = math.sqrt(np.sum(intensities[part] * (1 + 2 * intensities[part])))
            self.assertLess(abs(squares[part].sum() - expected), 3 * stderr)
        self.assertGreater(intensities[-1], intensities[0])

    def test_qv_limit(self) -> None:
        model = linear_intensity()
        scheme = SamplingScheme.from_count(100000, 1.0)
        self.assertAlmostEqual(NonHomogeneousService.qv_limit(model, 1.0), 1.5, places=10)
        self.assertAlmostEqual(NonHomogeneousService.qv_limit(sine_intensity(), 2.0), 2.0, places=10)
        estimates = [
            NonHomogeneousService.qv_estimate_nh(NonHomogeneousService.sample_increments_nh(model, 1.0, scheme, seed=33, replica=r))
            for r in range(3)
        ]
        self.assertLess(abs(np.mean(estimates) / 1.5 - 1.0), 0.02)


class InformationTest(SimpleTestCase):
    """Test the three information formulas."""

    def test_homogeneous_reduction(self) -> None:
        theta = 1.7
        params = ModelParams(theta)
        for step in (0.01, 0.6, 20.0):
            scheme = SamplingScheme(horizon=100.0 * step, step=step)
            for regime in RegimeTag:
                got = NonHomogeneousService.info_nonhomog(regime, constant_intensity(), theta, scheme)
                expected = FisherService.limit_information(regime, params, scheme)
                self.assertLess(abs(got / expected - 1.0), 1e-8, msg=f'{regime}, step={step}')

    def test_linear_closed_forms(self) -> None:
        theta, scheme = 2.0, SamplingScheme(horizon=50.0, step=0.5)
        micro = NonHomogeneousService.info_nonhomog(RegimeTag.MICROSCOPIC, linear_intensity(), theta, scheme)
        macro = NonHomogeneousService.info_nonhomog(RegimeTag.MACROSCOPIC, linear_intensity(), theta, scheme)
        self.assertAlmostEqual(micro, 1.5 * 50.0 / theta, places=8)
        self.assertAlmostEqual(macro, 50.0 / 0.5 / (2 * theta ** 2), places=8)

    def test_intermediate_between_limits(self) -> None:
        scheme = SamplingScheme(horizon=60.0, step=0.6)
        for model in (linear_intensity(), sine_intensity()):
            inter = NonHomogeneousService.info_nonhomog(RegimeTag.INTERMEDIATE, model, 1.0, scheme)
            micro = NonHomogeneousService.info_nonhomog(RegimeTag.MICROSCOPIC, model, 1.0, scheme)
            self.assertGreater(inter, 0.0)
            self.assertLess(inter, micro)

    def test_weight_positive(self) -> None:
        model = sine_intensity()
        for s in np.linspace(0, 1, 11):
            rate = float(model.rate(1.0, s))
            self.assertGreater(FisherService.psi(rate * 0.6), 0.0)
