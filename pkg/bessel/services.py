"""
Modified Bessel functions of the first kind at integer order.

Below SERIES_CUTOFF the power series is summed directly. Above it, ratios
I_{nu+1}/I_nu come from the continued fraction (modified Lentz) and
logarithms from integrating d/dx log I_nu(x) = I_{nu+1}(x)/I_nu(x) + nu/x
upwards from the cutoff, so I_nu(x) ~ e^x/sqrt(2 pi x) never has to be
formed.
"""
import logging
import math
from numbers import Integral, Real
from typing import Any, List, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from core.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

SERIES_CUTOFF = 30.0
SERIES_RTOL = 1e-18
SERIES_MAX_TERMS = 500

CF_TOL = 1e-15
CF_MIN_ITERATIONS = 1000

# geometric integration panels above the cutoff, Gauss-Legendre on each
PANEL_GROWTH = 1.5
GAUSS_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


def _check_order(nu: Any) -> int:
    """Return nu as a Python int or raise DomainError."""
    if isinstance(nu, bool):
        raise DomainError(f'order must be a nonnegative integer, got {nu!r}', order=repr(nu))
    if isinstance(nu, Integral):
        value = int(nu)
    elif isinstance(nu, Real) and math.isfinite(float(nu)) and float(nu).is_integer():
        value = int(nu)
    else:
        raise DomainError(f'order must be a nonnegative integer, got {nu!r}', order=repr(nu))
    if value < 0:
        raise DomainError(f'order must be nonnegative, got {value}', order=value)
    return value


def _check_argument(x: Any, allow_zero: bool = False) -> float:
    """Return x as a float or raise DomainError."""
    if isinstance(x, bool) or not isinstance(x, Real):
        raise DomainError(f'argument must be a real number, got {x!r}', argument=repr(x))
    value = float(x)
    if not math.isfinite(value):
        raise DomainError(f'argument must be finite, got {value}', argument=value)
    if value < 0 or (value == 0 and not allow_zero):
        raise DomainError(f'argument must be positive, got {value}', argument=value)
    return value


def _log_series(nu: int, x: float) -> float:
    """log I_nu(x) by the power series, for 0 < x <= SERIES_CUTOFF."""
    quarter_square = 0.25 * x * x
    term = 1.0
    total = 1.0
    for m in range(1, SERIES_MAX_TERMS):
        term *= quarter_square / (m * (nu + m))
        total += term
        if term < SERIES_RTOL * total:
            break
    else:
        logger.debug('series for I_%d(%g) stopped at the %d-term cap', nu, x, SERIES_MAX_TERMS)
    return nu * math.log(0.5 * x) - float(gammaln(nu + 1)) + math.log(total)


def _ratio_continued_fraction(nu: int, x: NDArray[np.float64]) -> NDArray[np.float64]:
    """I_{nu+1}(x)/I_nu(x) elementwise, by modified Lentz on

    I_nu/I_{nu+1} = b_1 + 1/(b_2 + 1/(b_3 + ...)),  b_j = 2(nu + j)/x.
    """
    x = np.asarray(x, dtype=float)
    f = 2.0 * (nu + 1) / x
    c = f.copy()
    d = np.zeros_like(x)
    # roughly x iterations are needed once x exceeds the order
    max_iterations = CF_MIN_ITERATIONS + 10 * int(np.max(x))
    for j in range(2, max_iterations):
        b = 2.0 * (nu + j) / x
        d = b + d
        c = b + 1.0 / c
        d = 1.0 / d
        delta = c * d
        f = f * delta
        if np.all(np.abs(delta - 1.0) < CF_TOL):
            return 1.0 / f
    residual = float(np.max(np.abs(delta - 1.0)))
    raise ConvergenceError(
        f'continued fraction for I_{nu + 1}/I_{nu} did not converge',
        residual=residual,
        order=nu,
    )


def _panel_nodes(lower: float, upper: float) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Composite Gauss-Legendre nodes and weights on geometric panels."""
    edges: List[float] = [lower]
    while edges[-1] < upper:
        edges.append(min(edges[-1] * PANEL_GROWTH, upper))
    left = np.asarray(edges[:-1])
    right = np.asarray(edges[1:])
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _log_integrated(nu: int, x: float) -> float:
    """log I_nu(x) for x > SERIES_CUTOFF by upward integration of the log-derivative."""
    nodes, weights = _panel_nodes(SERIES_CUTOFF, x)
    ratios = _ratio_continued_fraction(nu, nodes)
    return (
        _log_series(nu, SERIES_CUTOFF)
        + nu * math.log(x / SERIES_CUTOFF)
        + float(np.dot(weights, ratios))
    )


class BesselService:
    """Service class for Bessel function evaluations."""

    @staticmethod
    def log_bessel_i(nu: int, x: float) -> float:
        """log I_nu(x) for integer nu >= 0 and x > 0 (x = 0 allowed for nu = 0)."""
        nu = _check_order(nu)
        x = _check_argument(x, allow_zero=(nu == 0))
        if x == 0.0:
            return 0.0
        if x <= SERIES_CUTOFF:
            return _log_series(nu, x)
        return _log_integrated(nu, x)

    @staticmethod
    def bessel_ratio(nu: int, x: float) -> float:
        """h = I_{nu+1}(x)/I_nu(x), strictly inside (0, 1)."""
        nu = _check_order(nu)
        x = _check_argument(x)
        return float(_ratio_continued_fraction(nu, np.asarray([x]))[0])

    @staticmethod
    def bessel_ratio2(nu: int, x: float) -> float:
        """I_{nu+2}(x)/I_nu(x) as the product of two one-step ratios."""
        nu = _check_order(nu)
        x = _check_argument(x)
        upper = float(_ratio_continued_fraction(nu + 1, np.asarray([x]))[0])
        lower = 1.0 / (2.0 * (nu + 1) / x + upper)
        return lower * upper

    @staticmethod
    def bessel_ratios(nu_max: int, x: float) -> NDArray[np.float64]:
        """All ratios I_{nu+1}(x)/I_nu(x) for nu = 0..nu_max.

        The top ratio comes from the continued fraction; the others from the
        backward recurrence r_{nu-1} = 1/(2 nu/x + r_nu), which is stable for
        the minimal solution I_nu.
        """
        nu_max = _check_order(nu_max)
        x = _check_argument(x)
        ratios = np.empty(nu_max + 1)
        ratios[nu_max] = _ratio_continued_fraction(nu_max, np.asarray([x]))[0]
        for nu in range(nu_max, 0, -1):
            ratios[nu - 1] = 1.0 / (2.0 * nu / x + ratios[nu])
        return ratios

    @staticmethod
    def log_bessel_i_orders(nu_max: int, x: float) -> NDArray[np.float64]:
        """log I_nu(x) for nu = 0..nu_max from log I_0 and cumulative log ratios."""
        nu_max = _check_order(nu_max)
        x = _check_argument(x, allow_zero=(nu_max == 0))
        log_i0 = BesselService.log_bessel_i(0, x)
        if nu_max == 0:
            return np.asarray([log_i0])
        ratios = BesselService.bessel_ratios(nu_max - 1, x)
        logs = np.empty(nu_max + 1)
        logs[0] = log_i0
        logs[1:] = log_i0 + np.cumsum(np.log(ratios))
        return logs
