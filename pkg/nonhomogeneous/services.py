"""
Services for increments under a time-dependent intensity lambda(theta, t/T).
"""
import logging
import math
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad

from core.exceptions import ConvergenceError, DomainError
from fisher.services import FisherService
from increments.domain import IncrementSeries, RegimeTag, SamplingScheme
from increments.services import rng_for
from .domain import IntensityModel, Rate

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200
GAUSS_ORDER = 8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


def _quad_unit(func: Callable[[float], float], upper: float = 1.0) -> float:
    """Integral of func over [0, upper] with a convergence check."""
    value, error, *rest = quad(
        func, 0.0, upper,
        epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
        full_output=1,
    )
    if len(rest) > 1:
        raise ConvergenceError(f'quadrature over [0, {upper:g}] did not converge: {rest[1]}', residual=float(error))
    return float(value)


def _scalar(rate: Rate, theta: float) -> Callable[[float], float]:
    return lambda s: float(np.asarray(rate(theta, s)))


class NonHomogeneousService:
    """Service class for the time-dependent intensity model."""

    @staticmethod
    def cumulative_intensity(model: IntensityModel, theta: float, t: float, horizon: float) -> float:
        """Lambda_T(t) = integral over [0, t] of lambda(theta, s/T) ds."""
        if not (horizon > 0 and math.isfinite(horizon)):
            raise DomainError(f'horizon must be positive, got {horizon}', horizon=horizon)
        if not 0 <= t <= horizon:
            raise DomainError(f'need 0 <= t <= T, got t={t}, T={horizon}', t=t, horizon=horizon)
        model.check(theta)
        if t == 0:
            return 0.0
        return horizon * _quad_unit(_scalar(model.rate, theta), t / horizon)

    @staticmethod
    def increment_intensities(model: IntensityModel, theta: float, scheme: SamplingScheme) -> NDArray[np.float64]:
        """Lambda_i = Lambda_T(i step) - Lambda_T((i-1) step), i = 1..n."""
        model.check(theta)
        width = scheme.step / scheme.horizon
        left = np.arange(scheme.count) * width
        nodes = (left[:, None] + 0.5 * width * (1.0 + _GL_NODES[None, :]))
        values = np.asarray(model.rate(theta, nodes), dtype=float)
        return scheme.horizon * 0.5 * width * (values @ _GL_WEIGHTS)

    @staticmethod
    def sample_increments_nh(
        model: IntensityModel,
        theta: float,
        scheme: SamplingScheme,
        seed: int,
        replica: int = 0,
    ) -> IncrementSeries:
        """Differences of two independent Poisson(Lambda_i/2) counts per step."""
        means = 0.5 * NonHomogeneousService.increment_intensities(model, theta, scheme)
        rng = rng_for(seed, 0, replica)
        counts = rng.poisson(means[:, None], (len(means), 2))
        return IncrementSeries(values=counts[:, 0] - counts[:, 1], scheme=scheme)

    @staticmethod
    def info_nonhomog(regime: RegimeTag, model: IntensityModel, theta: float, scheme: SamplingScheme) -> float:
        """Limit information in the given regime, by quadrature over s."""
        model.check(theta)
        rate = _scalar(model.rate, theta)
        slope = _scalar(model.rate_dtheta, theta)
        horizon, step = scheme.horizon, scheme.step

        if regime is RegimeTag.MICROSCOPIC:
            return horizon * _quad_unit(lambda s: slope(s) ** 2 / rate(s))
        if regime is RegimeTag.MACROSCOPIC:
            return 0.5 * horizon / step * _quad_unit(lambda s: (slope(s) / rate(s)) ** 2)
        return horizon * step * _quad_unit(lambda s: slope(s) ** 2 * FisherService.psi(rate(s) * step))

    @staticmethod
    def qv_limit(model: IntensityModel, theta: float) -> float:
        """Integral of lambda(theta, s) over [0, 1], the limit of the QV statistic."""
        model.check(theta)
        return _quad_unit(_scalar(model.rate, theta))

    @staticmethod
    def qv_estimate_nh(data: IncrementSeries) -> float:
        """(1/T) sum d_i^2."""
        return data.sum_of_squares() / data.scheme.horizon

    @staticmethod
    def piecewise_gap(model: IntensityModel, theta: float, scheme: SamplingScheme) -> float:
        """max_i |Lambda_i - step * lambda(theta, (i-1) step/T)|."""
        exact = NonHomogeneousService.increment_intensities(model, theta, scheme)
        left = np.arange(scheme.count) * scheme.step / scheme.horizon
        frozen = scheme.step * np.asarray(model.rate(theta, left), dtype=float)
        return float(np.max(np.abs(exact - frozen)))
