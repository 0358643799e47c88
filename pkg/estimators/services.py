"""
Services for estimating the jump intensity from sampled increments.
"""
import logging
import math
from dataclasses import replace
from typing import Callable, Optional, Tuple

from core.exceptions import BoundaryError, BracketError, DegenerateDataError, DomainError
from fisher.services import FisherService
from increments.domain import IncrementSeries, ModelParams
from increments.services import IncrementLawService
from .domain import DEGENERATE, FALLBACK_MLE, NOT_CONVERGED, EstimateResult, EstimatorTag

logger = logging.getLogger(__name__)

BRACKET_SPREAD = 8.0
BRACKET_GROWTH = 4.0
MAX_BRACKET_EXPANSIONS = 60
MAX_NEWTON_ITERATIONS = 100
SCORE_RTOL = 1e-12
STEP_RTOL = 1e-15


class EstimatorService:
    """Service class for estimators of theta."""

    @staticmethod
    def qv_estimate(data: IncrementSeries) -> EstimateResult:
        """(1/T) sum d_i^2, with the QV asymptotic variance at the estimate."""
        if len(data) == 0:
            raise DegenerateDataError('cannot estimate from an empty series')
        value = data.sum_of_squares() / data.scheme.horizon
        if value == 0.0:
            logger.warning('all increments are zero; QV estimate is degenerate')
            return EstimateResult(value=0.0, avar=None, method=EstimatorTag.QV, flags=(DEGENERATE,))
        avar = FisherService.qv_variance(ModelParams(value), data.scheme)
        return EstimateResult(value=value, avar=avar, method=EstimatorTag.QV)

    @staticmethod
    def one_step_estimate(data: IncrementSeries, report_variance: bool = True) -> EstimateResult:
        """One Newton step on the likelihood starting from the QV estimate."""
        start = EstimatorService.qv_estimate(data)
        if start.degenerate:
            raise DegenerateDataError('one-step estimator needs a positive QV estimate', qv=start.value)

        theta = start.value
        score = IncrementLawService.score_total(theta, data)
        hessian = IncrementLawService.hessian_total(theta, data)
        value = theta - score / hessian if hessian < 0 else math.nan
        if not (math.isfinite(value) and value > 0):
            logger.warning(
                'one-step correction unusable (score=%g, hessian=%g); falling back to MLE',
                score, hessian,
            )
            fallback = EstimatorService.mle_estimate(data, report_variance=report_variance)
            return replace(fallback, method=EstimatorTag.ONE_STEP, flags=fallback.flags + (FALLBACK_MLE,))

        avar = EstimatorService._inverse_information(value, data) if report_variance else None
        return EstimateResult(value=value, avar=avar, method=EstimatorTag.ONE_STEP, iterations=1)

    @staticmethod
    def mle_estimate(
        data: IncrementSeries,
        bracket: Optional[Tuple[float, float]] = None,
        report_variance: bool = True,
    ) -> EstimateResult:
        """Root of the total score by Newton steps safeguarded with bisection.

        Without a bracket, one is grown by factors of 4 from
        [theta_QV/8, 8 theta_QV] until the score changes sign.
        """
        if data.is_all_zero():
            raise BoundaryError('all increments are zero; the likelihood exp(-theta T) has no interior maximum')

        def score(theta: float) -> float:
            return IncrementLawService.score_total(theta, data)

        start = EstimatorService.qv_estimate(data).value
        if bracket is None:
            lo, hi, score_lo, score_hi = _expand_bracket(score, start)
        else:
            lo, hi = (float(v) for v in bracket)
            if not (0 < lo < hi) or not math.isfinite(hi):
                raise DomainError(f'bracket must satisfy 0 < lo < hi, got ({lo}, {hi})', bracket=[lo, hi])
            score_lo, score_hi = score(lo), score(hi)
            if score_lo == 0.0 or score_hi == 0.0:
                root = lo if score_lo == 0.0 else hi
                avar = EstimatorService._inverse_information(root, data) if report_variance else None
                return EstimateResult(value=root, avar=avar, method=EstimatorTag.MLE)
            if score_lo * score_hi > 0:
                raise BracketError(
                    'total score has no sign change on the bracket',
                    bracket=(lo, hi),
                    scores=(score_lo, score_hi),
                )
            if score_lo < 0:
                raise BracketError(
                    'total score rises through zero on the bracket, so the root there is no maximum',
                    bracket=(lo, hi),
                    scores=(score_lo, score_hi),
                )

        tolerance = SCORE_RTOL * len(data) * data.scheme.step
        theta = start if lo < start < hi else 0.5 * (lo + hi)
        converged = False
        iterations = 0
        for iterations in range(1, MAX_NEWTON_ITERATIONS + 1):
            value = score(theta)
            if value > 0:
                lo = theta
            else:
                hi = theta
            if abs(value) <= tolerance:
                converged = True
                break
            curvature = IncrementLawService.hessian_total(theta, data)
            candidate = theta - value / curvature if curvature < 0 else math.nan
            if not (lo < candidate < hi):
                candidate = 0.5 * (lo + hi)
            if abs(candidate - theta) <= STEP_RTOL * theta:
                theta = candidate
                converged = True
                break
            theta = candidate
        logger.debug('MLE %.12g after %d iterations', theta, iterations)

        flags: Tuple[str, ...] = () if converged else (NOT_CONVERGED,)
        if not converged:
            logger.warning('MLE did not converge in %d iterations', MAX_NEWTON_ITERATIONS)
        avar = EstimatorService._inverse_information(theta, data) if report_variance else None
        return EstimateResult(
            value=theta,
            avar=avar,
            method=EstimatorTag.MLE,
            converged=converged,
            iterations=iterations,
            flags=flags,
        )

    @staticmethod
    def estimate(method: EstimatorTag, data: IncrementSeries, report_variance: bool = True) -> EstimateResult:
        """Dispatch by estimator tag."""
        if method is EstimatorTag.QV:
            return EstimatorService.qv_estimate(data)
        if method is EstimatorTag.ONE_STEP:
            return EstimatorService.one_step_estimate(data, report_variance=report_variance)
        return EstimatorService.mle_estimate(data, report_variance=report_variance)

    @staticmethod
    def _inverse_information(theta: float, data: IncrementSeries) -> float:
        return 1.0 / FisherService.total_information(ModelParams(theta), data.scheme)


def _expand_bracket(score: Callable[[float], float], start: float) -> Tuple[float, float, float, float]:
    lo, hi = start / BRACKET_SPREAD, start * BRACKET_SPREAD
    score_lo, score_hi = score(lo), score(hi)
    for _ in range(MAX_BRACKET_EXPANSIONS):
        if score_lo > 0 and score_hi < 0:
            return lo, hi, score_lo, score_hi
        if score_lo <= 0:
            lo /= BRACKET_GROWTH
            score_lo = score(lo)
        if score_hi >= 0:
            hi *= BRACKET_GROWTH
            score_hi = score(hi)
        logger.debug('expanded MLE bracket to [%g, %g]', lo, hi)
    raise BracketError('could not bracket the score root', bracket=(lo, hi), scores=(score_lo, score_hi))
