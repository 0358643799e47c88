"""
Tests for the increment law, its sampler and the series CSV format.
"""
import io
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare, skellam

from core.exceptions import DomainError, TruncationError, ValidationError
from .csvio import read_series, write_series
from .domain import IncrementSeries, ModelParams, RegimeTag, SamplingScheme
from .services import IncrementLawService


def chi_square_pvalue(values: np.ndarray, x: float) -> float:
    """Goodness of fit of integer draws against the exact law, tails pooled."""
    n = values.size
    table = IncrementLawService.pmf_table(x)
    prob = np.asarray(table.prob)
    # upper[nu] = P(X >= nu) for nu >= 1
    upper = np.concatenate(([1.0], 0.5 * (1.0 - prob[0] - 2.0 * np.cumsum(prob[1:]) + 2.0 * prob[1:])))
    edge = max(nu for nu in range(1, prob.size) if n * upper[nu] >= 5.0)
    observed = [np.sum(values <= -edge)]
    expected = [n * upper[edge]]
    for k in range(-edge + 1, edge):
        observed.append(np.sum(values == k))
        expected.append(n * prob[abs(k)])
    observed.append(np.sum(values >= edge))
    expected.append(n * upper[edge])
    expected_array = np.asarray(expected)
    expected_array *= n / expected_array.sum()
    return float(chisquare(observed, expected_array).pvalue)


class DomainTypesTest(SimpleTestCase):
    """Test the value types."""

    def test_scheme_count(self) -> None:
        self.assertEqual(SamplingScheme(horizon=4.0, step=1.0).count, 4)
        self.assertEqual(SamplingScheme(horizon=10.0, step=3.0).count, 3)
        self.assertEqual(SamplingScheme.from_count(10000, 0.6).count, 10000)
        self.assertEqual(SamplingScheme.from_count(3, 0.1).count, 3)

    def test_invalid_values(self) -> None:
        with self.assertRaises(DomainError):
            ModelParams(theta=0.0)
        with self.assertRaises(DomainError):
            ModelParams(theta=float('inf'))
        with self.assertRaises(DomainError):
            SamplingScheme(horizon=1.0, step=2.0)
        with self.assertRaises(DomainError):
            SamplingScheme(horizon=1.0, step=-0.1)
        with self.assertRaises(DomainError):
            IncrementSeries(values=np.array([1, 2]), scheme=SamplingScheme(horizon=3.0, step=1.0))
        with self.assertRaises(DomainError):
            IncrementSeries(values=np.array([0.5]), scheme=SamplingScheme(horizon=1.0, step=1.0))

    def test_regime_labels(self) -> None:
        self.assertIs(RegimeTag.from_label('micro'), RegimeTag.MICROSCOPIC)
        self.assertIs(RegimeTag.from_label('Intermediate'), RegimeTag.INTERMEDIATE)
        self.assertIs(RegimeTag.from_label('macroscopic'), RegimeTag.MACROSCOPIC)
        with self.assertRaises(DomainError):
            RegimeTag.from_label('mesoscopic')

    def test_order_counts(self) -> None:
        series = IncrementSeries(values=np.array([1, -1, 0, 3, -3, 3]), scheme=SamplingScheme(horizon=6.0, step=1.0))
        orders, counts = series.order_counts()
        self.assertEqual(orders.tolist(), [0, 1, 3])
        self.assertEqual(counts.tolist(), [1, 2, 3])
        self.assertEqual(series.sum_of_squares(), 29.0)
        self.assertFalse(series.is_all_zero())


class PmfTest(SimpleTestCase):
    """Test the exact law."""

    def test_known_value(self) -> None:
        self.assertAlmostEqual(IncrementLawService.pmf(1.0, 0), math.exp(-1.0) * 1.2660658777520082, places=14)
        self.assertAlmostEqual(IncrementLawService.pmf(1.0, 0), 0.465760, places=6)

    def test_symmetry(self) -> None:
        for x in (0.01, 1.0, 37.0):
            for k in (1, 2, 9):
                self.assertEqual(IncrementLawService.pmf(x, k), IncrementLawService.pmf(x, -k))

    def test_normalization(self) -> None:
        for x in (1e-3, 0.01, 0.6, 1.0, 10.0, 50.0):
            table = IncrementLawService.pmf_table(x)
            self.assertAlmostEqual(table.expectation(np.ones(table.prob.size)), 1.0, delta=1e-12)

    def test_table_matches_pointwise_pmf(self) -> None:
        table = IncrementLawService.pmf_table(3.5)
        for k in (0, 1, 6, 20):
            self.assertAlmostEqual(table.prob[k] / IncrementLawService.pmf(3.5, k), 1.0, places=12)

    def test_oracle_equivalence(self) -> None:
        for x in (0.05, 0.6, 1.0, 4.0, 10.0):
            for k in (0, 1, 2, 5, 13, 30):
                oracle = IncrementLawService.pmf_oracle(x, k, 120)
                self.assertAlmostEqual(IncrementLawService.pmf(x, k), oracle, delta=1e-12)
        self.assertAlmostEqual(IncrementLawService.pmf(1.0, 0), IncrementLawService.pmf_oracle(1.0, 0, 60), delta=1e-12)

    def test_agrees_with_skellam(self) -> None:
        for x in (0.5, 1.0, 5.0, 10.0):
            for k in range(-8, 9):
                expected = skellam.pmf(k, x / 2, x / 2)
                self.assertAlmostEqual(IncrementLawService.pmf(x, k) / expected, 1.0, places=7, msg=f'x={x} k={k}')

    def test_oracle_small_argument(self) -> None:
        leading = math.exp(-0.01) * 0.01 ** 3 / (2 ** 3 * math.factorial(3))
        self.assertAlmostEqual(IncrementLawService.pmf_oracle(0.01, 3, 40) / leading, 1.0, places=3)

    def test_oracle_truncation(self) -> None:
        with self.assertRaises(TruncationError) as ctx:
            IncrementLawService.pmf_oracle(10.0, 0, 10)
        self.assertGreater(ctx.exception.tail_bound, 1e-14)
        self.assertIn('tail_bound', ctx.exception.as_record())

    def test_walk_kernel(self) -> None:
        self.assertEqual(IncrementLawService.walk_kernel(0, 0), 1.0)
        self.assertEqual(IncrementLawService.walk_kernel(1, 1), 0.5)
        self.assertEqual(IncrementLawService.walk_kernel(2, 0), 0.5)
        self.assertEqual(IncrementLawService.walk_kernel(2, 2), 0.25)
        self.assertEqual(IncrementLawService.walk_kernel(2, 1), 0.0)
        self.assertEqual(IncrementLawService.walk_kernel(3, 5), 0.0)
        for m in (0, 1, 7, 30):
            self.assertAlmostEqual(sum(IncrementLawService.walk_kernel(m, k) for k in range(-m, m + 1)), 1.0, places=14)
        with self.assertRaises(DomainError):
            IncrementLawService.walk_kernel(-1, 0)

    def test_domain_errors(self) -> None:
        for x in (0.0, -1.0, float('nan')):
            with self.assertRaises(DomainError):
                IncrementLawService.pmf(x, 0)

    @settings(max_examples=60, deadline=None)
    @given(x=st.floats(min_value=1e-3, max_value=50.0, allow_nan=False), k=st.integers(min_value=-40, max_value=40))
    def test_probability_range(self, x: float, k: int) -> None:
        value = IncrementLawService.pmf(x, k)
        self.assertGreaterEqual(value, 0.0)
        self.assertLess(value, 1.0)
        self.assertEqual(value, IncrementLawService.pmf(x, -k))


class ScoreTest(SimpleTestCase):
    """Test score, Hessian and the identities they satisfy."""

    grid = [(0.5, 0.02), (1.0, 1.0), (2.0, 0.3), (1.0, 0.6), (3.0, 5.0), (0.7, 40.0)]

    def test_known_score(self) -> None:
        score = IncrementLawService.score(ModelParams(1.0), 1.0, 0)
        self.assertAlmostEqual(score, -0.553609, delta=2e-6)

    def test_positive_above_mean(self) -> None:
        for k in (2, -3, 10):
            self.assertGreater(IncrementLawService.score(ModelParams(1.0), 1.0, k), 0.0)

    def test_zero_mean_and_information_identity(self) -> None:
        for theta, step in self.grid:
            table = IncrementLawService.pmf_table(theta * step)
            mean, second = IncrementLawService.score_moments(ModelParams(theta), step, table=table)
            self.assertAlmostEqual(mean, 0.0, delta=1e-10)
            hessians = IncrementLawService.hessian_terms(theta, step, table.orders)
            self.assertAlmostEqual(-table.expectation(hessians) / second, 1.0, delta=1e-8)

    def test_hessian_by_finite_difference(self) -> None:
        eps = 1e-5
        up = IncrementLawService.score(ModelParams(1.0 + eps), 1.0, 2)
        down = IncrementLawService.score(ModelParams(1.0 - eps), 1.0, 2)
        hessian = IncrementLawService.log_pmf_hessian(ModelParams(1.0), 1.0, 2)
        self.assertLess(abs((up - down) / (2 * eps) / hessian - 1.0), 1e-5)

    def test_ratio_derivative_nonnegative(self) -> None:
        for theta, step in self.grid:
            for k in range(0, 15):
                hessian = IncrementLawService.log_pmf_hessian(ModelParams(theta), step, k)
                self.assertGreaterEqual(hessian + k / theta ** 2, 0.0)

    def test_vector_terms_match_scalar(self) -> None:
        orders = np.array([0, 1, 4])
        scores = IncrementLawService.score_terms(2.0, 0.3, orders)
        hessians = IncrementLawService.hessian_terms(2.0, 0.3, orders)
        for i, k in enumerate(orders):
            self.assertAlmostEqual(scores[i], IncrementLawService.score(ModelParams(2.0), 0.3, int(k)), places=13)
            self.assertAlmostEqual(hessians[i], IncrementLawService.log_pmf_hessian(ModelParams(2.0), 0.3, int(k)), places=12)

    def test_totals_and_likelihood(self) -> None:
        series = IncrementSeries(values=np.array([1, -1, 0, 2, 0]), scheme=SamplingScheme(horizon=5.0, step=1.0))
        expected_score = sum(IncrementLawService.score(ModelParams(0.8), 1.0, int(d)) for d in series.values)
        expected_loglik = sum(math.log(IncrementLawService.pmf(0.8, int(d))) for d in series.values)
        self.assertAlmostEqual(IncrementLawService.score_total(0.8, series), expected_score, places=12)
        self.assertAlmostEqual(IncrementLawService.log_likelihood(0.8, series), expected_loglik, places=12)

    def test_central_moments(self) -> None:
        self.assertEqual(IncrementLawService.central_moments(1.0)[:2], (1.0, 4.0))
        self.assertEqual(IncrementLawService.central_moments(1.0).square_variance, 3.0)
        second, fourth, _ = IncrementLawService.central_moments(1e-8)
        self.assertLess(second, 2e-8)
        self.assertLess(fourth, 2e-8)
        table = IncrementLawService.pmf_table(0.6)
        self.assertAlmostEqual(table.expectation(table.orders.astype(float) ** 4), 1.68, delta=1e-10)
        self.assertAlmostEqual(table.expectation(table.orders.astype(float) ** 2), 0.6, delta=1e-12)


class SamplerTest(SimpleTestCase):
    """Test the Poisson-difference sampler."""

    def test_deterministic_streams(self) -> None:
        params, scheme = ModelParams(1.0), SamplingScheme.from_count(500, 1.0)
        first = IncrementLawService.sample_increments(params, scheme, seed=11, replica=3)
        second = IncrementLawService.sample_increments(params, scheme, seed=11, replica=3)
        other = IncrementLawService.sample_increments(params, scheme, seed=11, replica=4)
        np.testing.assert_array_equal(first.values, second.values)
        self.assertFalse(np.array_equal(first.values, other.values))
        with self.assertRaises(DomainError):
            IncrementLawService.sample_increments(params, scheme, seed=-1)

    def test_shorter_series_is_prefix(self) -> None:
        params = ModelParams(1.0)
        short = IncrementLawService.sample_increments(params, SamplingScheme.from_count(10, 1.0), seed=7)
        long = IncrementLawService.sample_increments(params, SamplingScheme.from_count(20, 1.0), seed=7)
        np.testing.assert_array_equal(short.values, long.values[:10])

    def test_rare_event_limit(self) -> None:
        series = IncrementLawService.sample_increments(ModelParams(1.0), SamplingScheme.from_count(100, 1e-9), seed=5)
        self.assertTrue(series.is_all_zero())

    def test_goodness_of_fit(self) -> None:
        for seed, x in enumerate((0.1, 0.6, 1.0, 5.0)):
            series = IncrementLawService.sample_increments(ModelParams(x), SamplingScheme.from_count(200000, 1.0), seed=seed)
            self.assertGreater(chi_square_pvalue(series.values, x), 0.001, msg=f'x={x}')

    def test_explicit_sign_sampler_agrees(self) -> None:
        series = IncrementLawService.sample_increments_by_signs(ModelParams(0.6), SamplingScheme.from_count(200000, 1.0), seed=17)
        self.assertGreater(chi_square_pvalue(series.values, 0.6), 0.001)

    def test_fourth_moment(self) -> None:
        n = 200000
        series = IncrementLawService.sample_increments(ModelParams(1.0), SamplingScheme.from_count(n, 1.0), seed=23)
        fourth = series.values.astype(float) ** 4
        table = IncrementLawService.pmf_table(1.0)
        eighth = table.expectation(table.orders.astype(float) ** 8)
        stderr = math.sqrt((eighth - 16.0) / n)
        self.assertLess(abs(fourth.mean() - 4.0), 3 * stderr)


class SeriesCsvTest(SimpleTestCase):
    """Test the series CSV format."""

    def test_write_then_read_with_header_parameters(self) -> None:
        series = IncrementSeries(values=np.array([0, 2, -1]), scheme=SamplingScheme(horizon=1.5, step=0.5))
        buffer = io.StringIO()
        write_series(buffer, series, ['seed: 1', 'parameters: {"T": 1.5, "delta": 0.5, "theta": 2.0}'])
        text = buffer.getvalue()
        self.assertIn('index,increment\n1,0\n2,2\n3,-1\n', text)
        parsed = read_series(io.StringIO(text))
        np.testing.assert_array_equal(parsed.values, series.values)
        self.assertEqual(parsed.scheme, series.scheme)

    def test_explicit_scheme_overrides_header(self) -> None:
        parsed = read_series(io.StringIO('index,increment\n1,0\n2,0\n'), horizon=2.0, step=1.0)
        self.assertTrue(parsed.is_all_zero())

    def test_malformed_inputs(self) -> None:
        cases = [
            'idx,increment\n1,0\n',
            'index,increment\n1,0.5\n',
            'index,increment\n2,0\n',
            'index,increment\n1,0,3\n',
            'index,increment\n',
        ]
        for text in cases:
            with self.assertRaises(ValidationError, msg=text):
                read_series(io.StringIO(text), horizon=1.0, step=1.0)

    def test_scheme_required_and_consistent(self) -> None:
        with self.assertRaises(ValidationError):
            read_series(io.StringIO('index,increment\n1,0\n'))
        with self.assertRaises(ValidationError):
            read_series(io.StringIO('index,increment\n1,0\n'), horizon=3.0, step=1.0)
