"""
Services for the exact law of one sampled increment.

One increment over a step of length Delta is a Poisson(theta*Delta) number
of independent +/-1 jumps. Its law is f(x, k) = exp(-x) I_|k|(x) with
x = theta*Delta; every expectation over k in this project is a finite sum
against the table built by `pmf_table`.
"""
import logging
import math
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import comb
from scipy.stats import poisson

from bessel.services import BesselService
from core.exceptions import DomainError, TruncationError
from .domain import IncrementSeries, LawTable, ModelParams, SamplingScheme

logger = logging.getLogger(__name__)

TABLE_RTOL = 1e-16
ORACLE_TAIL_LIMIT = 1e-14


class CentralMoments(NamedTuple):
    second: float
    fourth: float
    square_variance: float


def support_bound(x: float) -> int:
    """Initial truncation order K(x) = ceil(x + 12 sqrt(x) + 25)."""
    return int(math.ceil(x + 12.0 * math.sqrt(x) + 25.0))


def _check_product(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f'x = theta*step must be positive and finite, got {x}', x=x)
    return x


def _check_integer(name: str, value: int) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise DomainError(f'{name} must be an integer, got {value!r}', **{name: repr(value)})
    return int(value)


def rng_for(seed: int, stream: int = 0, replica: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream, replica)."""
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise DomainError(f'seed must be a nonnegative integer, got {seed!r}', seed=repr(seed))
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(replica)))
    return np.random.Generator(np.random.Philox(sequence))


@lru_cache(maxsize=256)
def _law_table(x: float) -> LawTable:
    order = support_bound(x)
    log_i0 = BesselService.log_bessel_i(0, x)
    while True:
        ratios = BesselService.bessel_ratios(order + 1, x)
        logs = np.empty(order + 1)
        logs[0] = log_i0
        logs[1:] = log_i0 + np.cumsum(np.log(ratios[:order]))
        prob = np.exp(logs - x)
        accumulated = prob[0] + 2.0 * np.sum(prob[1:])
        if prob[-1] * ratios[order] < TABLE_RTOL * accumulated:
            break
        logger.debug('extending law table at x=%g beyond order %d', x, order)
        order = int(math.ceil(order * 1.5))
    ratio = ratios[:order + 1].copy()
    ratio2 = ratios[:order + 1] * ratios[1:order + 2]
    for array in (prob, ratio, ratio2):
        array.setflags(write=False)
    return LawTable(x=x, prob=prob, ratio=ratio, ratio2=ratio2)


class IncrementLawService:
    """Service class for the increment law."""

    @staticmethod
    def pmf(x: float, k: int) -> float:
        """f(x, k) = exp(-x) I_|k|(x)."""
        x = _check_product(x)
        k = _check_integer('k', k)
        return math.exp(BesselService.log_bessel_i(abs(k), x) - x)

    @staticmethod
    def pmf_table(x: float) -> LawTable:
        """The law on |k| <= K(x), extended until the next term is negligible."""
        return _law_table(_check_product(x))

    @staticmethod
    def walk_kernel(m: int, k: int) -> float:
        """P(S_m = k) for the simple symmetric random walk started at 0."""
        m = _check_integer('m', m)
        k = abs(_check_integer('k', k))
        if m < 0:
            raise DomainError(f'm must be nonnegative, got {m}', m=m)
        if k > m or (m - k) % 2:
            return 0.0
        return int(comb(m, (m + k) // 2, exact=True)) / 2 ** m

    @staticmethod
    def pmf_oracle(x: float, k: int, m_max: int) -> float:
        """Poisson mixture of walk kernels, truncated after m_max jumps."""
        x = _check_product(x)
        k = _check_integer('k', k)
        m_max = _check_integer('m_max', m_max)
        tail = float(poisson.sf(m_max, x))
        if tail >= ORACLE_TAIL_LIMIT:
            raise TruncationError(
                f'Poisson tail beyond m_max={m_max} is {tail:.3e}',
                tail_bound=tail,
                m_max=m_max,
            )
        jumps = np.arange(abs(k), m_max + 1, 2)
        if jumps.size == 0:
            return 0.0
        kernel = np.array([IncrementLawService.walk_kernel(int(m), k) for m in jumps])
        return float(np.sum(kernel * poisson.pmf(jumps, x)))

    @staticmethod
    def sample_increments(
        params: ModelParams,
        scheme: SamplingScheme,
        seed: int,
        stream: int = 0,
        replica: int = 0,
    ) -> IncrementSeries:
        """Draw scheme.count increments as differences of two Poisson(x/2) counts."""
        rng = rng_for(seed, stream, replica)
        mean = 0.5 * scheme.product(params)
        # one (up, down) row per index, drawn in order, so a shorter series is a prefix
        counts = rng.poisson(mean, (scheme.count, 2))
        return IncrementSeries(values=counts[:, 0] - counts[:, 1], scheme=scheme)

    @staticmethod
    def sample_increments_by_signs(
        params: ModelParams,
        scheme: SamplingScheme,
        seed: int,
        replica: int = 0,
    ) -> IncrementSeries:
        """Draw each increment as a Poisson(x) count of independent +/-1 signs."""
        rng = rng_for(seed, 0, replica)
        jumps = rng.poisson(scheme.product(params), scheme.count)
        ups = rng.binomial(jumps, 0.5)
        return IncrementSeries(values=2 * ups - jumps, scheme=scheme)

    @staticmethod
    def score(params: ModelParams, step: float, k: int) -> float:
        """d/dtheta log f = step * (h + |k|/(theta step) - 1)."""
        k = abs(_check_integer('k', k))
        x = _check_product(params.theta * step)
        h = BesselService.bessel_ratio(k, x)
        return step * (h + k / x - 1.0)

    @staticmethod
    def log_pmf_hessian(params: ModelParams, step: float, k: int) -> float:
        """d^2/dtheta^2 log f at a single increment."""
        k = abs(_check_integer('k', k))
        theta = params.theta
        x = _check_product(theta * step)
        h = BesselService.bessel_ratio(k, x)
        h2 = BesselService.bessel_ratio2(k, x)
        return step * step * h2 + step * h / theta - step * step * h * h - k / theta ** 2

    @staticmethod
    def score_terms(theta: float, step: float, orders: NDArray[np.int64]) -> NDArray[np.float64]:
        """Per-order scores for an array of distinct |k|."""
        x = _check_product(theta * step)
        ratios = BesselService.bessel_ratios(int(np.max(orders)), x)
        return step * (ratios[orders] + orders / x - 1.0)

    @staticmethod
    def hessian_terms(theta: float, step: float, orders: NDArray[np.int64]) -> NDArray[np.float64]:
        """Per-order Hessians for an array of distinct |k|."""
        x = _check_product(theta * step)
        ratios = BesselService.bessel_ratios(int(np.max(orders)) + 1, x)
        h = ratios[orders]
        h2 = h * ratios[orders + 1]
        return step * step * (h2 - h * h) + step * h / theta - orders / theta ** 2

    @staticmethod
    def score_total(theta: float, data: IncrementSeries) -> float:
        """Total score of the series at theta."""
        orders, counts = data.order_counts()
        return float(np.dot(counts, IncrementLawService.score_terms(theta, data.scheme.step, orders)))

    @staticmethod
    def hessian_total(theta: float, data: IncrementSeries) -> float:
        """Total second derivative of the log-likelihood at theta."""
        orders, counts = data.order_counts()
        return float(np.dot(counts, IncrementLawService.hessian_terms(theta, data.scheme.step, orders)))

    @staticmethod
    def log_likelihood(theta: float, data: IncrementSeries) -> float:
        """Sum of log f(theta*step, d_i) over the series."""
        x = _check_product(theta * data.scheme.step)
        orders, counts = data.order_counts()
        logs = BesselService.log_bessel_i_orders(int(np.max(orders)), x)
        return float(np.dot(counts, logs[orders] - x))

    @staticmethod
    def central_moments(x: float) -> CentralMoments:
        """E[X^2] = x, E[X^4] = x(1 + 3x) and var(X^2) = x(1 + 2x)."""
        x = _check_product(x)
        return CentralMoments(second=x, fourth=x * (1.0 + 3.0 * x), square_variance=x * (1.0 + 2.0 * x))

    @staticmethod
    def score_moments(
        params: ModelParams,
        step: float,
        power: int = 2,
        table: Optional[LawTable] = None,
    ) -> Tuple[float, float]:
        """(E[score], E[score^power]) under the law at theta*step."""
        table = table or IncrementLawService.pmf_table(params.theta * step)
        scores = step * (table.ratio + table.orders / table.x - 1.0)
        return table.expectation(scores), table.expectation(scores ** power)
