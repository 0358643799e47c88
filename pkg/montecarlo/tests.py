"""
Tests for Monte Carlo variance studies.
"""
import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, TestCase, tag

from core.exceptions import ConvergenceError, DomainError, ValidationError
from estimators.services import EstimatorService
from fisher.services import FisherService
from increments.domain import ModelParams, SamplingScheme
from increments.services import IncrementLawService
from .models import ExperimentConfig, StudyRow
from .services import VarianceStudyService, _blocks


def make_config(**overrides: object) -> ExperimentConfig:
    fields = {
        'theta': 1.0,
        'delta_grid': [0.1, 1.0],
        'n_per_scheme': 400,
        'replicas': 60,
        'seed': 7,
        'estimators': ['QV', 'OneStep'],
    }
    fields.update(overrides)
    return ExperimentConfig(**fields)


def row_values(rows: list) -> list:
    return VarianceStudyService.study_table(rows)


class DiagnosticsTest(SimpleTestCase):
    """Test the normality and error diagnostics."""

    def test_normal_samples_pass(self) -> None:
        samples = np.random.default_rng(2024).standard_normal(10000)
        self.assertLess(VarianceStudyService.normality_diagnostic(samples, 0.0, 1.0), 1.63 / math.sqrt(10000))

    def test_constant_samples_fail(self) -> None:
        statistic = VarianceStudyService.normality_diagnostic(np.full(100, 3.0), 3.0, 1.0)
        self.assertAlmostEqual(statistic, 0.5, places=12)

    def test_too_few_samples(self) -> None:
        with self.assertRaises(DomainError):
            VarianceStudyService.normality_diagnostic(np.zeros(49), 0.0, 1.0)
        with self.assertRaises(DomainError):
            VarianceStudyService.normality_diagnostic(np.zeros(60), 0.0, 0.0)

    def test_jackknife_matches_brute_force(self) -> None:
        samples = np.random.default_rng(5).gamma(2.0, size=40)
        leave_one_out = np.array([np.var(np.delete(samples, i), ddof=1) for i in range(samples.size)])
        n = samples.size
        expected = math.sqrt((n - 1) / n * np.sum((leave_one_out - leave_one_out.mean()) ** 2))
        self.assertAlmostEqual(VarianceStudyService.jackknife_variance_stderr(samples), expected, places=12)

    def test_blocks_cover_replicas(self) -> None:
        for replicas, workers in ((10, 1), (10, 3), (2, 8), (1000, 7)):
            blocks = _blocks(replicas, workers)
            self.assertEqual([i for block in blocks for i in block], list(range(replicas)))
            self.assertLessEqual(len(blocks), workers)


class VarianceStudyTest(SimpleTestCase):
    """Test the study driver without persistence."""

    def test_two_replicas(self) -> None:
        config = make_config(delta_grid=[0.6], replicas=2, estimators=['QV'])
        rows = VarianceStudyService.run_variance_study(config)
        self.assertEqual(len(rows), 1)
        scheme = SamplingScheme.from_count(400, 0.6)
        values = [
            EstimatorService.qv_estimate(
                IncrementLawService.sample_increments(ModelParams(1.0), scheme, 7, stream=0, replica=r)
            ).value
            for r in range(2)
        ]
        self.assertAlmostEqual(rows[0].empirical_variance, (values[0] - values[1]) ** 2 / 2, places=15)
        self.assertIsNone(rows[0].ks_statistic)
        self.assertAlmostEqual(rows[0].theoretical_inverse_info, 1.0 / FisherService.total_information(ModelParams(1.0), scheme))
        self.assertAlmostEqual(rows[0].qv_theoretical_variance, FisherService.qv_variance(ModelParams(1.0), scheme))

    def test_independent_of_worker_count(self) -> None:
        first = VarianceStudyService.run_variance_study(make_config(), workers=1)
        second = VarianceStudyService.run_variance_study(make_config(), workers=4)
        self.assertEqual(row_values(first), row_values(second))
        self.assertEqual([(r.delta, r.estimator) for r in first], [(0.1, 'QV'), (0.1, 'OneStep'), (1.0, 'QV'), (1.0, 'OneStep')])
        self.assertTrue(all(r.ks_statistic is not None for r in first))

    def test_failures_flag_the_cell(self) -> None:
        config = make_config(delta_grid=[1.0], replicas=10, estimators=['QV', 'MLE'])
        with mock.patch.object(EstimatorService, 'mle_estimate', side_effect=ConvergenceError('stuck', residual=1.0)):
            rows = VarianceStudyService.run_variance_study(config)
        qv, mle = rows
        self.assertFalse(qv.flagged)
        self.assertTrue(mle.flagged)
        self.assertEqual(mle.failure_rate, 1.0)
        self.assertIsNone(mle.empirical_variance)
        self.assertTrue(math.isnan(row_values([mle])[0][2]))

    def test_invalid_configs(self) -> None:
        for overrides in (
            {'delta_grid': [1.0, 0.5]},
            {'delta_grid': []},
            {'replicas': 1},
            {'theta': 0.0},
            {'estimators': ['QV', 'Bayes']},
            {'estimators': []},
        ):
            with self.assertRaises(ValidationError, msg=str(overrides)):
                VarianceStudyService.run_variance_study(make_config(**overrides))

    @tag('slow')
    def test_variances_through_scales(self) -> None:
        config = make_config(delta_grid=[0.01, 0.6, 50.0], n_per_scheme=10000, replicas=1000, estimators=['QV', 'OneStep'])
        rows = {(r.delta, r.estimator): r for r in VarianceStudyService.run_variance_study(config, workers=4)}

        ratio = rows[(0.6, 'QV')].empirical_variance / rows[(0.6, 'OneStep')].empirical_variance
        self.assertAlmostEqual(ratio, 1.23, delta=0.10)
        ratio = rows[(0.01, 'QV')].empirical_variance / rows[(0.01, 'OneStep')].empirical_variance
        self.assertAlmostEqual(ratio, 1.0, delta=0.05)

        critical = 1.63 / math.sqrt(1000)
        for delta in (0.01, 0.6, 50.0):
            qv, one_step = rows[(delta, 'QV')], rows[(delta, 'OneStep')]
            self.assertLess(abs(qv.empirical_variance / qv.qv_theoretical_variance - 1.0), 0.10, msg=f'delta={delta}')
            self.assertLess(abs(one_step.empirical_variance / one_step.theoretical_inverse_info - 1.0), 0.10, msg=f'delta={delta}')
            self.assertLess(qv.ks_statistic, critical, msg=f'delta={delta}')
            self.assertLess(one_step.ks_statistic, critical, msg=f'delta={delta}')
            self.assertLessEqual(
                one_step.empirical_variance,
                qv.empirical_variance * (1 + 3 * qv.mc_stderr / qv.empirical_variance),
            )
            self.assertFalse(qv.flagged)


class PersistStudyTest(TestCase):
    """Test saving studies with the ORM."""

    def test_persist(self) -> None:
        config = make_config(replicas=5, estimators=['QV'])
        rows = VarianceStudyService.run_variance_study(config)
        VarianceStudyService.persist_study(config, rows)
        self.assertIsNotNone(config.pk)
        stored = list(StudyRow.objects.filter(config=config))
        self.assertEqual([r.delta for r in stored], [0.1, 1.0])
        self.assertEqual(ExperimentConfig.objects.get(pk=config.pk).rows.count(), 2)
        self.assertAlmostEqual(stored[0].empirical_variance, rows[0].empirical_variance)
        self.assertGreater(stored[0].get_variance_ratio(), 0.0)
