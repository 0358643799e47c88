"""
Tests for the Bessel kernel.
"""
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln, ive

from core.exceptions import DomainError
from .services import BesselService, SERIES_CUTOFF


def series_oracle(nu: int, x: float, terms: int = 80) -> float:
    """Plain truncated power series for I_nu(x), summed in log space."""
    logs = [
        (2 * m + nu) * math.log(0.5 * x) - gammaln(m + 1) - gammaln(nu + m + 1)
        for m in range(terms)
    ]
    top = max(logs)
    return math.exp(top) * math.fsum(math.exp(v - top) for v in logs)


class LogBesselTest(SimpleTestCase):
    """Test log_bessel_i against independent oracles."""

    def test_known_value_at_one(self) -> None:
        self.assertAlmostEqual(BesselService.log_bessel_i(0, 1.0), math.log(1.2660658777520082), places=13)
        self.assertAlmostEqual(BesselService.log_bessel_i(0, 1.0), 0.235914, places=6)

    def test_zero_argument(self) -> None:
        self.assertEqual(BesselService.log_bessel_i(0, 0.0), 0.0)
        self.assertAlmostEqual(BesselService.log_bessel_i(0, 1e-12), 0.0, places=12)
        with self.assertRaises(DomainError):
            BesselService.log_bessel_i(1, 0.0)

    def test_series_oracle_agreement(self) -> None:
        for nu in (0, 1, 2, 5, 10, 20):
            for x in (0.01, 0.5, 1.0, 7.5, 29.0, 31.0, 42.0, 50.0):
                expected = series_oracle(nu, x, terms=200)
                got = math.exp(BesselService.log_bessel_i(nu, x))
                self.assertLess(abs(got / expected - 1.0), 1e-12, msg=f'nu={nu}, x={x}')

    def test_large_arguments_match_scaled_scipy(self) -> None:
        for nu in (0, 1, 3, 25):
            for x in (60.0, 100.0, 1000.0, 1e4):
                expected = math.log(ive(nu, x)) + x
                got = BesselService.log_bessel_i(nu, x)
                self.assertLess(abs(got - expected), 1e-11 * max(1.0, abs(expected)), msg=f'nu={nu}, x={x}')

    def test_decreasing_in_order(self) -> None:
        self.assertLess(BesselService.log_bessel_i(5, 1.0), BesselService.log_bessel_i(4, 1.0))
        for x in (0.1, 3.0, 40.0):
            logs = [BesselService.log_bessel_i(nu, x) for nu in range(12)]
            self.assertTrue(all(a > b for a, b in zip(logs, logs[1:])))

    def test_recurrence_derivative(self) -> None:
        for nu in (0, 1, 4, 11, 20):
            for x in (0.01, 0.3, 2.0, 15.0, SERIES_CUTOFF, 50.0):
                step = 1e-5 * x
                forward = math.exp(BesselService.log_bessel_i(nu, x + step))
                backward = math.exp(BesselService.log_bessel_i(nu, x - step))
                derivative = (forward - backward) / (2 * step)
                expected = (
                    math.exp(BesselService.log_bessel_i(nu + 1, x))
                    + nu / x * math.exp(BesselService.log_bessel_i(nu, x))
                )
                self.assertLess(abs(derivative / expected - 1.0), 1e-6, msg=f'nu={nu}, x={x}')

    def test_small_argument_envelope(self) -> None:
        for nu in (0, 1, 7, 30, 50):
            for x in (1e-3, 0.1, 0.5, 1.0):
                leading = nu * math.log(0.5 * x) - gammaln(nu + 1)
                deviation = abs(math.expm1(BesselService.log_bessel_i(nu, x) - leading))
                self.assertLessEqual(deviation, x * x * math.exp(0.5 * x * x))

    def test_orders_table_matches_single_evaluations(self) -> None:
        for x in (0.05, 1.0, 45.0):
            table = BesselService.log_bessel_i_orders(15, x)
            self.assertEqual(len(table), 16)
            for nu in (0, 3, 15):
                self.assertAlmostEqual(table[nu], BesselService.log_bessel_i(nu, x), delta=1e-12 * max(1.0, abs(table[nu])))

    def test_invalid_orders_and_arguments(self) -> None:
        for nu in (-1, 1.5, 'a', True):
            with self.assertRaises(DomainError):
                BesselService.log_bessel_i(nu, 1.0)  # type: ignore[arg-type]
        for x in (-1.0, float('nan'), float('inf')):
            with self.assertRaises(DomainError):
                BesselService.log_bessel_i(0, x)
        self.assertEqual(BesselService.log_bessel_i(2.0, 1.0), BesselService.log_bessel_i(2, 1.0))  # type: ignore[arg-type]


class BesselRatioTest(SimpleTestCase):
    """Test the ratio-stable evaluations."""

    def test_known_ratio(self) -> None:
        self.assertAlmostEqual(BesselService.bessel_ratio(0, 1.0), 0.5651591039924851 / 1.2660658777520082, places=13)
        self.assertAlmostEqual(BesselService.bessel_ratio(0, 1.0), 0.446391, delta=2e-6)

    def test_small_argument(self) -> None:
        ratio = BesselService.bessel_ratio(0, 1e-6)
        self.assertLess(abs(ratio / 5.0e-7 - 1.0), 1e-4)
        # I_{nu+1}/I_nu ~ x/(2(nu+1)) near zero
        self.assertLess(abs(BesselService.bessel_ratio(3, 1e-4) / (1e-4 / 8) - 1.0), 1e-4)

    def test_ratio2_is_product(self) -> None:
        for nu in (0, 2, 9):
            for x in (0.01, 1.0, 35.0, 800.0):
                product = BesselService.bessel_ratio(nu, x) * BesselService.bessel_ratio(nu + 1, x)
                self.assertAlmostEqual(BesselService.bessel_ratio2(nu, x) / product, 1.0, places=13)
        i2_over_i0 = 0.1357476697670383 / 1.2660658777520082
        self.assertAlmostEqual(BesselService.bessel_ratio2(0, 1.0), i2_over_i0, places=13)

    def test_ratio_matches_scaled_scipy(self) -> None:
        for nu in (0, 1, 10, 40):
            for x in (0.2, 5.0, 30.0, 250.0, 5000.0):
                expected = ive(nu + 1, x) / ive(nu, x)
                self.assertLess(abs(BesselService.bessel_ratio(nu, x) / expected - 1.0), 1e-12)

    def test_ratio_table(self) -> None:
        for x in (0.001, 0.6, 50.0, 2000.0):
            ratios = BesselService.bessel_ratios(30, x)
            for nu in (0, 7, 30):
                self.assertAlmostEqual(ratios[nu] / BesselService.bessel_ratio(nu, x), 1.0, places=12)
            self.assertTrue(np.all(np.diff(ratios) < 0))

    def test_domain_errors(self) -> None:
        for call in (BesselService.bessel_ratio, BesselService.bessel_ratio2, BesselService.bessel_ratios):
            with self.assertRaises(DomainError):
                call(0, 0.0)
            with self.assertRaises(DomainError):
                call(-2, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(
        nu=st.integers(min_value=0, max_value=60),
        x=st.floats(min_value=1e-3, max_value=200.0, allow_nan=False, allow_infinity=False),
    )
    def test_ratio_bounds(self, nu: int, x: float) -> None:
        ratio = BesselService.bessel_ratio(nu, x)
        ratio2 = BesselService.bessel_ratio2(nu, x)
        self.assertGreater(ratio2, 0.0)
        self.assertLess(ratio2, ratio)
        self.assertLess(ratio, 1.0)
