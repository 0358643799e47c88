"""
Tests for the QV, one-step and maximum likelihood estimators.
"""
import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, tag

from core.exceptions import BoundaryError, BracketError, DegenerateDataError, DomainError
from fisher.services import FisherService
from increments.domain import IncrementSeries, ModelParams, SamplingScheme
from increments.services import IncrementLawService
from .domain import DEGENERATE, FALLBACK_MLE, EstimateResult, EstimatorTag
from .serializers import EstimateResultSerializer
from .services import EstimatorService


def series(values: list, step: float = 1.0) -> IncrementSeries:
    return IncrementSeries(values=np.asarray(values), scheme=SamplingScheme.from_count(len(values), step))


def simulated(theta: float, step: float, count: int, seed: int, replica: int = 0) -> IncrementSeries:
    return IncrementLawService.sample_increments(
        ModelParams(theta), SamplingScheme.from_count(count, step), seed=seed, replica=replica
    )


class EstimatorTagTest(SimpleTestCase):
    """Test estimator labels."""

    def test_labels(self) -> None:
        self.assertIs(EstimatorTag.from_label('QV'), EstimatorTag.QV)
        self.assertIs(EstimatorTag.from_label('one-step'), EstimatorTag.ONE_STEP)
        self.assertIs(EstimatorTag.from_label('os'), EstimatorTag.ONE_STEP)
        self.assertIs(EstimatorTag.from_label('MLE'), EstimatorTag.MLE)
        self.assertEqual(EstimatorTag.ONE_STEP.label, 'OneStep')
        with self.assertRaises(DomainError):
            EstimatorTag.from_label('bayes')


class QuadraticVariationTest(SimpleTestCase):
    """Test the QV estimator."""

    def test_arithmetic(self) -> None:
        result = EstimatorService.qv_estimate(series([1, -1, 1, 1]))
        self.assertEqual(result.value, 1.0)
        self.assertAlmostEqual(result.avar, 0.25 + 0.5, places=15)
        self.assertAlmostEqual(result.stderr ** 2, result.avar, places=15)
        self.assertIs(result.method, EstimatorTag.QV)

    def test_all_zero(self) -> None:
        result = EstimatorService.qv_estimate(series([0, 0, 0]))
        self.assertEqual(result.value, 0.0)
        self.assertIn(DEGENERATE, result.flags)
        self.assertIsNone(result.avar)
        self.assertIsNone(result.stderr)

    def test_exact_unbiasedness(self) -> None:
        for theta, step, count in ((1.0, 0.6, 1000), (2.5, 0.01, 50), (0.3, 40.0, 7)):
            scheme = SamplingScheme.from_count(count, step)
            expectation = count * IncrementLawService.central_moments(theta * step).second / scheme.horizon
            self.assertAlmostEqual(expectation, theta * count * step / scheme.horizon, delta=1e-12)


class OneStepTest(SimpleTestCase):
    """Test the one-step estimator."""

    def test_newton_fixed_point(self) -> None:
        data = series([1, -2, 0, 1, 3, 0])
        qv = EstimatorService.qv_estimate(data).value
        with mock.patch.object(IncrementLawService, 'score_total', return_value=0.0):
            result = EstimatorService.one_step_estimate(data)
        self.assertEqual(result.value, qv)
        self.assertEqual(result.iterations, 1)

    def test_single_newton_step(self) -> None:
        data = simulated(1.0, 0.6, 5000, seed=3)
        theta = EstimatorService.qv_estimate(data).value
        expected = theta - IncrementLawService.score_total(theta, data) / IncrementLawService.hessian_total(theta, data)
        result = EstimatorService.one_step_estimate(data)
        self.assertAlmostEqual(result.value, expected, places=14)
        info = FisherService.total_information(ModelParams(result.value), data.scheme)
        self.assertAlmostEqual(result.avar, 1.0 / info, places=15)

    def test_degenerate_data(self) -> None:
        with self.assertRaises(DegenerateDataError):
            EstimatorService.one_step_estimate(series([0]))

    def test_wrong_curvature_falls_back_to_mle(self) -> None:
        data = simulated(1.0, 0.6, 2000, seed=4)
        mle = EstimatorService.mle_estimate(data)
        with mock.patch.object(IncrementLawService, 'hessian_total', return_value=1.0):
            result = EstimatorService.one_step_estimate(data)
        self.assertIn(FALLBACK_MLE, result.flags)
        self.assertIs(result.method, EstimatorTag.ONE_STEP)
        self.assertAlmostEqual(result.value, mle.value, delta=1e-8 * mle.value)

    def test_second_correction_is_small(self) -> None:
        data = simulated(1.0, 0.6, 1000000, seed=8)
        first = EstimatorService.one_step_estimate(data)
        correction = IncrementLawService.score_total(first.value, data) / IncrementLawService.hessian_total(first.value, data)
        self.assertLess(abs(correction), 1e-2 * first.stderr)


class MaximumLikelihoodTest(SimpleTestCase):
    """Test the MLE."""

    def test_all_zero_is_boundary(self) -> None:
        with self.assertRaises(BoundaryError):
            EstimatorService.mle_estimate(series([0, 0, 0, 0]))

    def test_score_sign_structure(self) -> None:
        data = series([0, 1, -1, 0, 2, 0, 0, -1])
        self.assertGreater(IncrementLawService.score_total(1e-6, data), 0.0)
        self.assertLess(IncrementLawService.score_total(1e3, data), 0.0)

    def test_root_and_likelihood(self) -> None:
        data = simulated(1.0, 0.6, 3000, seed=12)
        result = EstimatorService.mle_estimate(data)
        self.assertTrue(result.converged)
        self.assertIs(result.method, EstimatorTag.MLE)
        residual = abs(IncrementLawService.score_total(result.value, data))
        self.assertLess(residual, 1e-10 * len(data) * data.scheme.step)
        top = IncrementLawService.log_likelihood(result.value, data)
        for theta in (result.value / 8, result.value * 8, result.value * 0.99, result.value * 1.01):
            self.assertGreaterEqual(top, IncrementLawService.log_likelihood(theta, data))

    def test_supplied_bracket(self) -> None:
        data = simulated(2.0, 0.3, 2000, seed=13)
        free = EstimatorService.mle_estimate(data)
        bounded = EstimatorService.mle_estimate(data, bracket=(0.5, 10.0))
        self.assertAlmostEqual(bounded.value, free.value, delta=1e-9 * free.value)

    def test_bracket_without_sign_change(self) -> None:
        data = simulated(1.0, 1.0, 500, seed=14)
        with self.assertRaises(BracketError) as ctx:
            EstimatorService.mle_estimate(data, bracket=(5.0, 50.0))
        scores = ctx.exception.scores
        self.assertLess(scores[0], 0.0)
        self.assertLess(scores[1], 0.0)
        self.assertEqual(ctx.exception.as_record()['bracket'], [5.0, 50.0])

    def test_invalid_bracket(self) -> None:
        with self.assertRaises(DomainError):
            EstimatorService.mle_estimate(series([1, 0]), bracket=(2.0, 1.0))

    def test_bracket_expansion_for_sparse_data(self) -> None:
        # QV is 40 but the likelihood root is near 20 / T = 2, below the initial bracket
        values = [0] * 999 + [20]
        data = series(values, step=0.01)
        result = EstimatorService.mle_estimate(data)
        self.assertTrue(result.converged)
        self.assertLess(result.value, EstimatorService.qv_estimate(data).value / 8)
        self.assertAlmostEqual(result.value, 2.0, delta=0.1)
        self.assertLess(abs(IncrementLawService.score_total(result.value, data)), 1e-10 * len(data) * 0.01)

    def test_dispatch(self) -> None:
        data = series([1, -1, 1, 1])
        self.assertEqual(EstimatorService.estimate(EstimatorTag.QV, data).value, 1.0)
        self.assertIs(EstimatorService.estimate(EstimatorTag.MLE, data).method, EstimatorTag.MLE)

    @tag('slow')
    def test_mle_and_one_step_agree(self) -> None:
        close = 0
        for replica in range(200):
            data = simulated(1.0, 0.6, 100000, seed=21, replica=replica)
            one_step = EstimatorService.one_step_estimate(data, report_variance=False)
            mle = EstimatorService.mle_estimate(data, report_variance=False)
            stderr = math.sqrt(1.0 / FisherService.total_information(ModelParams(1.0), data.scheme))
            close += abs(mle.value - one_step.value) < 0.1 * stderr
        self.assertGreaterEqual(close, 190)


class EstimateSerializerTest(SimpleTestCase):
    """Test the JSON view of results."""

    def test_fields(self) -> None:
        result = EstimateResult(value=1.5, avar=0.04, method=EstimatorTag.ONE_STEP, iterations=1)
        data = EstimateResultSerializer(result).data
        self.assertEqual(
            set(data), {'value', 'stderr', 'avar', 'method', 'converged', 'iterations', 'flags'}
        )
        self.assertEqual(data['method'], 'OneStep')
        self.assertAlmostEqual(data['stderr'], 0.2, places=15)

    def test_degenerate_record(self) -> None:
        data = EstimateResultSerializer(EstimatorService.qv_estimate(series([0, 0]))).data
        self.assertIsNone(data['avar'])
        self.assertEqual(data['flags'], [DEGENERATE])
