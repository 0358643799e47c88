"""
Services for replicated variance studies across sampling steps.
"""
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from celery import group
from django.conf import settings
from django.core.exceptions import ValidationError as ModelValidationError
from django.db import transaction
from scipy.stats import kstest

from core.exceptions import DomainError, ScaleInferenceError, ValidationError
from estimators.domain import EstimatorTag
from estimators.services import EstimatorService
from fisher.services import FisherService
from increments.domain import ModelParams, SamplingScheme
from increments.services import IncrementLawService
from .models import ExperimentConfig, StudyRow

logger = logging.getLogger(__name__)

MIN_KS_SAMPLES = 50
STUDY_HEADER = ('delta', 'estimator', 'emp_var', 'inv_info', 'qv_var_theory', 'ks')


def _blocks(replicas: int, workers: int) -> List[range]:
    """Split 0..replicas-1 into at most `workers` contiguous blocks."""
    workers = max(1, min(workers, replicas))
    edges = np.linspace(0, replicas, workers + 1).round().astype(int)
    return [range(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]


class VarianceStudyService:
    """Service class for Monte Carlo variance studies."""

    @staticmethod
    def validate_config(config: ExperimentConfig) -> None:
        try:
            config.clean_fields(exclude=['created_at'])
            config.clean()
        except ModelValidationError as exc:
            raise ValidationError('invalid experiment configuration', fields=exc.message_dict) from exc

    @staticmethod
    def simulate_block(
        theta: float,
        delta: float,
        delta_index: int,
        count: int,
        seed: int,
        estimators: Sequence[str],
        start: int,
        stop: int,
    ) -> List[Dict[str, Any]]:
        """Estimates for replicas start..stop-1; a failed estimate is recorded as None."""
        params = ModelParams(theta)
        scheme = SamplingScheme.from_count(count, delta)
        tags = [EstimatorTag.from_label(label) for label in estimators]
        records = []
        for replica in range(start, stop):
            data = IncrementLawService.sample_increments(params, scheme, seed, stream=delta_index, replica=replica)
            estimates: Dict[str, Optional[float]] = {}
            for tag in tags:
                try:
                    estimates[tag.label] = EstimatorService.estimate(tag, data, report_variance=False).value
                except ScaleInferenceError as exc:
                    logger.debug('replica %d at delta=%g: %s failed: %s', replica, delta, tag.label, exc)
                    estimates[tag.label] = None
            records.append({'replica': replica, 'estimates': estimates})
        return records

    @staticmethod
    def run_variance_study(config: ExperimentConfig, workers: Optional[int] = None) -> List[StudyRow]:
        """Simulate every (step, replica) cell and compare variances with theory.

        Replica streams are keyed by (seed, step index, replica index), so
        the rows do not depend on the number of workers.
        """
        from .tasks import simulate_replica_block_task

        VarianceStudyService.validate_config(config)
        workers = workers or settings.SCALE_INFERENCE['DEFAULT_WORKERS']
        limit = settings.SCALE_INFERENCE['FAILURE_RATE_LIMIT']
        params = config.get_params()
        labels = [tag.label for tag in config.get_estimator_tags()]

        rows = []
        for delta_index, scheme in enumerate(config.get_schemes()):
            job = group([
                simulate_replica_block_task.s(
                    config.theta, scheme.step, delta_index, config.n_per_scheme,
                    int(config.seed), labels, block.start, block.stop,
                )
                for block in _blocks(config.replicas, workers)
            ])
            records = [record for block in job.apply_async().get() for record in block]
            records.sort(key=lambda record: record['replica'])

            inverse_info = 1.0 / FisherService.total_information(params, scheme)
            qv_variance = FisherService.qv_variance(params, scheme)
            for label in labels:
                values = [r['estimates'][label] for r in records]
                row = VarianceStudyService._summarise(
                    values,
                    theta=config.theta,
                    scale=math.sqrt(qv_variance if label == EstimatorTag.QV.label else inverse_info),
                    limit=limit,
                )
                rows.append(StudyRow(
                    config=config,
                    position=len(rows),
                    delta=scheme.step,
                    estimator=label,
                    theoretical_inverse_info=inverse_info,
                    qv_theoretical_variance=qv_variance,
                    **row,
                ))
                if rows[-1].flagged:
                    logger.warning(
                        'cell delta=%g %s flagged: failure rate %.3f',
                        scheme.step, label, rows[-1].failure_rate,
                    )
            logger.info('finished delta=%g (%d replicas)', scheme.step, config.replicas)
        return rows

    @staticmethod
    def _summarise(values: Sequence[Optional[float]], theta: float, scale: float, limit: float) -> Dict[str, Any]:
        good = np.asarray([v for v in values if v is not None and math.isfinite(v)], dtype=float)
        failure_rate = 1.0 - good.size / len(values)
        variance = float(np.var(good, ddof=1)) if good.size >= 2 else None
        summary: Dict[str, Any] = {
            'empirical_variance': variance,
            'mean_estimate': float(np.mean(good)) if good.size else None,
            'mc_stderr': VarianceStudyService.jackknife_variance_stderr(good) if good.size >= 3 else None,
            'ks_statistic': (
                VarianceStudyService.normality_diagnostic(good, theta, scale)
                if good.size >= MIN_KS_SAMPLES else None
            ),
            'replicas_used': int(good.size),
            'failure_rate': failure_rate,
            'flagged': failure_rate > limit or variance is None or not variance > 0,
        }
        return summary

    @staticmethod
    def normality_diagnostic(samples: Sequence[float], center: float, scale: float) -> float:
        """Kolmogorov-Smirnov statistic of (samples - center)/scale against N(0, 1)."""
        samples = np.asarray(samples, dtype=float)
        if samples.size < MIN_KS_SAMPLES:
            raise DomainError(
                f'normality diagnostic needs at least {MIN_KS_SAMPLES} samples, got {samples.size}',
                samples=int(samples.size),
            )
        if not (scale > 0 and math.isfinite(scale)):
            raise DomainError(f'scale must be positive, got {scale}', scale=scale)
        return float(kstest((samples - center) / scale, 'norm').statistic)

    @staticmethod
    def jackknife_variance_stderr(samples: Sequence[float]) -> float:
        """Jackknife standard error of the sample variance (ddof=1)."""
        x = np.asarray(samples, dtype=float)
        n = x.size
        if n < 3:
            raise DomainError(f'jackknife needs at least 3 samples, got {n}', samples=n)
        deviations = (x - x.mean()) ** 2
        total = deviations.sum()
        # sample variance with observation i removed
        leave_one_out = (total - deviations * n / (n - 1)) / (n - 2)
        return float(math.sqrt((n - 1) / n * np.sum((leave_one_out - leave_one_out.mean()) ** 2)))

    @staticmethod
    def persist_study(config: ExperimentConfig, rows: Sequence[StudyRow]) -> List[StudyRow]:
        """Save the configuration and its rows in one transaction."""
        with transaction.atomic():
            if config.pk is None:
                config.save()
            for row in rows:
                row.config = config
            return StudyRow.objects.bulk_create(list(rows))

    @staticmethod
    def study_table(rows: Sequence[StudyRow]) -> List[Tuple[Any, ...]]:
        """Rows of the study CSV in grid order."""
        def number(value: Optional[float]) -> float:
            return math.nan if value is None else float(value)

        return [
            (
                row.delta,
                row.estimator,
                number(row.empirical_variance),
                row.theoretical_inverse_info,
                row.qv_theoretical_variance,
                number(row.ks_statistic),
            )
            for row in rows
        ]
