"""
Time-dependent jump intensities lambda(theta, s), s = t/T in [0, 1].
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np
from numpy.typing import ArrayLike, NDArray

from core.exceptions import DomainError

Rate = Callable[[float, ArrayLike], NDArray[np.float64]]

CHECK_POINTS = 101


@dataclass(frozen=True)
class IntensityModel:
    """Intensity with its theta-derivative and a bound on Theta x [0, 1].

    `rate` and `rate_dtheta` take theta and an array of s values.
    `theta_max` closes the parameter set on which `sup_bound` holds.
    """
    name: str
    rate: Rate
    rate_dtheta: Rate
    sup_bound: float
    theta_max: float = math.inf
    # bound on |d lambda/ds| per unit theta, for piecewise-constant approximations
    slope_bound: float = 0.0

    def check(self, theta: float) -> None:
        """Raise DomainError unless lambda(theta, .) is positive and within sup_bound."""
        if not math.isfinite(theta) or theta <= 0:
            raise DomainError(f'theta must be positive and finite, got {theta}', theta=theta)
        if theta > self.theta_max:
            raise DomainError(
                f'theta={theta} exceeds the bound {self.theta_max} of intensity {self.name!r}',
                theta=theta,
                theta_max=self.theta_max,
            )
        values = np.asarray(self.rate(theta, np.linspace(0.0, 1.0, CHECK_POINTS)), dtype=float)
        if not np.all(values > 0):
            raise DomainError(f'intensity {self.name!r} is not positive at theta={theta}', theta=theta)
        if np.max(values) > self.sup_bound:
            raise DomainError(
                f'intensity {self.name!r} exceeds its bound {self.sup_bound}',
                theta=theta,
                sup_bound=self.sup_bound,
            )


def constant_intensity(theta_max: float = 100.0) -> IntensityModel:
    return IntensityModel(
        name='constant',
        rate=lambda theta, s: theta * np.ones_like(np.asarray(s, dtype=float)),
        rate_dtheta=lambda theta, s: np.ones_like(np.asarray(s, dtype=float)),
        sup_bound=theta_max,
        theta_max=theta_max,
    )


def linear_intensity(theta_max: float = 100.0) -> IntensityModel:
    """theta (1 + s)."""
    return IntensityModel(
        name='linear',
        rate=lambda theta, s: theta * (1.0 + np.asarray(s, dtype=float)),
        rate_dtheta=lambda theta, s: 1.0 + np.asarray(s, dtype=float),
        sup_bound=2.0 * theta_max,
        theta_max=theta_max,
        slope_bound=1.0,
    )


def sine_intensity(theta_max: float = 100.0) -> IntensityModel:
    """theta (1 + 0.5 sin 2 pi s)."""
    return IntensityModel(
        name='sine',
        rate=lambda theta, s: theta * (1.0 + 0.5 * np.sin(2.0 * np.pi * np.asarray(s, dtype=float))),
        rate_dtheta=lambda theta, s: 1.0 + 0.5 * np.sin(2.0 * np.pi * np.asarray(s, dtype=float)),
        sup_bound=1.5 * theta_max,
        theta_max=theta_max,
        slope_bound=math.pi,
    )


BUILTIN_INTENSITIES: Dict[str, Callable[[float], IntensityModel]] = {
    'constant': constant_intensity,
    'linear': linear_intensity,
    'sine': sine_intensity,
}


def builtin_intensity(name: str, theta_max: float = 100.0) -> IntensityModel:
    try:
        factory = BUILTIN_INTENSITIES[name]
    except KeyError:
        raise DomainError(
            f'unknown intensity {name!r}; choose one of {sorted(BUILTIN_INTENSITIES)}',
            intensity=name,
        ) from None
    return factory(theta_max)
