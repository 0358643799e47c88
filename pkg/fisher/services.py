"""
Services for Fisher information across sampling scales.

The per-increment information is step^2 * psi(theta*step) with
psi(x) = E[(h(|X|, x) + |X|/x - 1)^2], summed exactly over the law table.
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from django.conf import settings
from scipy.optimize import minimize_scalar

from core.exceptions import ConvergenceError, DomainError, NonUnimodalError
from increments.domain import ModelParams, RegimeTag, SamplingScheme
from increments.services import IncrementLawService
from .domain import DeficiencyMaximum, InfoCurvePoint, ScalePoint

logger = logging.getLogger(__name__)

SCAN_POINTS = 25
MAX_REFINE_ITERATIONS = 500


class FisherService:
    """Service class for Fisher information."""

    @staticmethod
    def psi(x: float) -> float:
        """Per-increment information divided by step^2."""
        table = IncrementLawService.pmf_table(x)
        centred = table.ratio + table.orders / table.x - 1.0
        return table.expectation(centred * centred)

    @staticmethod
    def total_information(params: ModelParams, scheme: SamplingScheme) -> float:
        """n * step^2 * psi(theta*step)."""
        step = scheme.step
        return scheme.count * step * step * FisherService.psi(scheme.product(params))

    @staticmethod
    def limit_information(regime: RegimeTag, params: ModelParams, scheme: SamplingScheme) -> float:
        """Closed-form information in the limit of the given regime."""
        theta, horizon, step = params.theta, scheme.horizon, scheme.step
        if regime is RegimeTag.MICROSCOPIC:
            return horizon / theta
        if regime is RegimeTag.MACROSCOPIC:
            return horizon / step / (2.0 * theta * theta)
        return horizon * step * FisherService.psi(theta * step)

    @staticmethod
    def qv_variance(params: ModelParams, scheme: SamplingScheme) -> float:
        """Asymptotic variance of the QV estimator: 1/I_micro + 1/I_macro."""
        micro = FisherService.limit_information(RegimeTag.MICROSCOPIC, params, scheme)
        macro = FisherService.limit_information(RegimeTag.MACROSCOPIC, params, scheme)
        return 1.0 / micro + 1.0 / macro

    @staticmethod
    def deficiency_ratio(x: float) -> float:
        """Variance of QV over the efficient bound, psi(x)(2x^2 + x)."""
        return FisherService.psi(x) * (2.0 * x * x + x)

    @staticmethod
    def info_curve(x_grid: Sequence[float]) -> List[InfoCurvePoint]:
        points = []
        for x in x_grid:
            psi = FisherService.psi(x)
            points.append(InfoCurvePoint(x=float(x), psi=psi, ratio=psi * (2.0 * x * x + x)))
        return points

    @staticmethod
    def information_through_scales(theta: float, deltas: Sequence[float], count: int) -> List[ScalePoint]:
        """Information at each step with the number of increments held fixed."""
        params = ModelParams(theta)
        points = []
        for delta in deltas:
            scheme = SamplingScheme.from_count(count, delta)
            micro = FisherService.limit_information(RegimeTag.MICROSCOPIC, params, scheme)
            macro = FisherService.limit_information(RegimeTag.MACROSCOPIC, params, scheme)
            points.append(ScalePoint(
                delta=float(delta),
                horizon=scheme.horizon,
                info=FisherService.total_information(params, scheme),
                info_micro=micro,
                info_macro=macro,
                qv_inverse_variance=1.0 / (1.0 / micro + 1.0 / macro),
            ))
        return points

    @staticmethod
    def max_deficiency(
        x_lo: Optional[float] = None,
        x_hi: Optional[float] = None,
        tol: float = 1e-4,
    ) -> DeficiencyMaximum:
        """Maximise the deficiency ratio on [x_lo, x_hi].

        A logarithmic scan checks that no interior point is lower than both
        neighbours before a bounded scalar search refines the maximum between
        the neighbours of the best scan point. The bracket defaults to
        SCALE_INFERENCE['DEFICIENCY_BRACKET'].
        """
        default_lo, default_hi = settings.SCALE_INFERENCE['DEFICIENCY_BRACKET']
        x_lo = default_lo if x_lo is None else x_lo
        x_hi = default_hi if x_hi is None else x_hi
        if not (0 < x_lo < x_hi) or not math.isfinite(x_hi):
            raise DomainError(f'need 0 < x_lo < x_hi, got ({x_lo}, {x_hi})', x_lo=x_lo, x_hi=x_hi)
        if not tol > 0:
            raise DomainError(f'tolerance must be positive, got {tol}', tol=tol)
        ratio = FisherService.deficiency_ratio

        grid = np.geomspace(x_lo, x_hi, SCAN_POINTS)
        values = [ratio(float(x)) for x in grid]
        _check_unimodal(grid, values)

        best = int(np.argmax(values))
        if best == len(grid) - 1 or best == 0:
            edge = float(grid[best])
            logger.warning('deficiency ratio is maximal at the bracket end x=%g', edge)
            return DeficiencyMaximum(x_star=edge, ratio_star=values[best], at_boundary=True)

        result = minimize_scalar(
            lambda x: -ratio(float(x)),
            bounds=(float(grid[best - 1]), float(grid[best + 1])),
            method='bounded',
            options={'xatol': tol, 'maxiter': MAX_REFINE_ITERATIONS},
        )
        if not result.success:
            raise ConvergenceError(f'deficiency maximum search failed: {result.message}', x=float(result.x))
        x_star, ratio_star = float(result.x), float(-result.fun)
        logger.debug('deficiency maximum %.6f at x=%.6f', ratio_star, x_star)
        return DeficiencyMaximum(x_star=x_star, ratio_star=ratio_star)


def _check_unimodal(grid: Sequence[float], values: Sequence[float]) -> None:
    for i in range(1, len(values) - 1):
        if values[i] < values[i - 1] and values[i] < values[i + 1]:
            triple = (float(grid[i - 1]), float(grid[i]), float(grid[i + 1]))
            raise NonUnimodalError(
                f'deficiency ratio has an interior minimum near x={grid[i]:.6g}',
                triple=triple,
            )

