"""
L2 distance between the jittered increment law and its Gaussian limit.

Adding an independent uniform U[-1/2, 1/2] to a lattice increment gives a
piecewise-constant density p on the real line. The distance to the
N(0, x) density q is computed cell by cell on the real line and, as a
cross-check, on the Fourier side where p has transform
exp(-x(1 - cos xi)) sin(xi/2)/(xi/2).
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from bessel.services import BesselService
from core.exceptions import ConvergenceError, DomainError
from increments.services import IncrementLawService

logger = logging.getLogger(__name__)

SMALL_STEP_LIMIT = 0.5
GAUSS_ORDER = 16
SPECTRAL_PERIODS = 400
# the Gaussian transform must be below exp(-37) ~ 1e-16 at the cutoff
GAUSSIAN_TAIL_EXPONENT = 37.0
QUAD_EPSREL = 1e-11
QUAD_EPSABS = 1e-22
QUAD_LIMIT = 200
# largest exponent of P/Q handed to expm1
EXPM1_LIMIT = 50.0
# breakpoints at this many standard deviations around each lattice peak
PEAK_WIDTHS = 8.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class JitteredLaw:
    """Density of X + U with X ~ f(x, .) and U uniform on [-1/2, 1/2]."""
    x: float

    def density(self, y: float) -> float:
        return IncrementLawService.pmf(self.x, int(math.floor(y + 0.5)))

    def total_mass(self) -> float:
        table = IncrementLawService.pmf_table(self.x)
        return table.expectation(np.ones(table.prob.size))


@dataclass(frozen=True)
class DistanceRow:
    delta: float
    l2_direct: float
    l2_spectral: float
    small_step: bool

    @property
    def delta_times_l2(self) -> float:
        return self.delta * self.l2_direct


def _product(theta: float, delta: float) -> float:
    for name, value in (('theta', theta), ('delta', delta)):
        if not math.isfinite(value) or value <= 0:
            raise DomainError(f'{name} must be positive and finite, got {value}', **{name: value})
    return theta * delta


def _spectral_difference(xi: float, x: float) -> float:
    """(P(xi) - Q(xi))^2 for xi >= 0."""
    if xi < 1e-8:
        return 0.0
    half = 0.5 * xi
    sinc = math.sin(half) / half
    if xi <= math.pi:
        # exponent of P/Q, with xi^2/2 - (1 - cos xi) expanded where it cancels
        if xi < 0.1:
            xi2 = xi * xi
            excess = xi2 * xi2 * (1.0 / 24.0 - xi2 / 720.0 + xi2 * xi2 / 40320.0)
        else:
            excess = 0.5 * xi * xi - 2.0 * math.sin(half) ** 2
        exponent = x * excess + math.log(sinc)
        if exponent < EXPM1_LIMIT:
            gaussian = math.exp(-0.5 * x * xi * xi)
            return (gaussian * math.expm1(exponent)) ** 2
    lattice = math.exp(-2.0 * x * math.sin(half) ** 2) * sinc
    return (lattice - math.exp(-0.5 * x * xi * xi)) ** 2


def _peak_points(centre: float, width: float) -> Tuple[float, ...]:
    if width < math.pi:
        return (centre - width, centre, centre + width)
    return (centre,)


def _integrate(x: float, lower: float, upper: float, points: Sequence[float] = ()) -> float:
    value, error, *rest = quad(
        _spectral_difference, lower, upper, args=(x,),
        points=list(points) or None,
        epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
        full_output=1,
    )
    if len(rest) > 1:
        # a fourth item is only returned with a warning message
        if abs(error) > 1e-6 * abs(value) + QUAD_EPSABS:
            raise ConvergenceError(
                f'spectral quadrature on [{lower:.4g}, {upper:.4g}] did not converge',
                residual=float(error),
            )
        logger.debug('quadrature on [%g, %g] warned: %s', lower, upper, rest[-1])
    return float(value)


class GaussianizationService:
    """Service class for the Gaussian approximation of the increment law."""

    @staticmethod
    def jittered_density(x: float, y: float) -> float:
        """p(y) = f(x, nearest integer to y)."""
        return JitteredLaw(x).density(y)

    @staticmethod
    def is_small_step(theta: float, delta: float) -> bool:
        """The lattice law is far from Gaussian when theta*delta <= 0.5."""
        return _product(theta, delta) <= SMALL_STEP_LIMIT

    @staticmethod
    def l2_distance_direct(theta: float, delta: float) -> float:
        """Sum over unit cells of the integral of (p - q)^2, Gauss-Legendre per cell."""
        x = _product(theta, delta)
        if x <= SMALL_STEP_LIMIT:
            logger.warning('theta*delta=%g is small; the jittered law is not close to Gaussian', x)
        table = IncrementLawService.pmf_table(x)
        support = table.support
        lattice = np.arange(-support, support + 1)
        prob = table.prob[np.abs(lattice)]
        y = lattice[:, None] + 0.5 * _GL_NODES[None, :]
        gaussian = norm.pdf(y, scale=math.sqrt(x))
        return float(np.sum((prob[:, None] - gaussian) ** 2 @ (0.5 * _GL_WEIGHTS)))

    @staticmethod
    def l2_distance_spectral(theta: float, delta: float) -> float:
        """(1/pi) times the integral over xi > 0 of (P - Q)^2, by Plancherel.

        Quadrature runs period by period up to a half-period cutoff; beyond
        it Q is negligible and P^2 = G(xi)/xi^2 with G 2pi-periodic, so the
        remainder is the period mean of G divided by the cutoff.
        """
        x = _product(theta, delta)
        if x <= SMALL_STEP_LIMIT:
            logger.warning('theta*delta=%g is small; the jittered law is not close to Gaussian', x)
        periods = max(SPECTRAL_PERIODS, int(math.ceil(math.sqrt(2.0 * GAUSSIAN_TAIL_EXPONENT / x) / (2 * math.pi))))
        width = PEAK_WIDTHS / math.sqrt(x)
        near = (width,) if width < math.pi else ()
        total = _integrate(x, 0.0, math.pi, points=near)
        for m in range(1, periods + 1):
            centre = 2.0 * math.pi * m
            total += _integrate(x, centre - math.pi, centre + math.pi, points=_peak_points(centre, width))
        cutoff = 2.0 * math.pi * periods + math.pi
        # mean over a period of 2(1 - cos xi) exp(-2x(1 - cos xi))
        mean_g = 2.0 * math.exp(BesselService.log_bessel_i(0, 2.0 * x) - 2.0 * x) * (1.0 - BesselService.bessel_ratio(0, 2.0 * x))
        return (total + mean_g / cutoff) / math.pi

    @staticmethod
    def distance_scan(theta: float, deltas: Sequence[float], spectral: bool = True) -> List[DistanceRow]:
        rows = []
        for delta in deltas:
            direct = GaussianizationService.l2_distance_direct(theta, delta)
            other = GaussianizationService.l2_distance_spectral(theta, delta) if spectral else math.nan
            rows.append(DistanceRow(
                delta=float(delta),
                l2_direct=direct,
                l2_spectral=other,
                small_step=GaussianizationService.is_small_step(theta, delta),
            ))
        return rows

    @staticmethod
    def scaling_exponent(theta: float, deltas: Sequence[float]) -> float:
        """Least-squares slope of log distance against log delta."""
        if len(deltas) < 2:
            raise DomainError('need at least two steps to fit a scaling exponent', count=len(deltas))
        distances = [GaussianizationService.l2_distance_direct(theta, d) for d in deltas]
        slope, _ = np.polyfit(np.log(deltas), np.log(distances), 1)
        return float(slope)
