"""
Domain types for the sampled increments of a symmetric compound Poisson process.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np
from numpy.typing import NDArray

from core.exceptions import DomainError


def _positive_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f'{name} must be positive and finite, got {value}', **{name: value})
    return value


@dataclass(frozen=True)
class ModelParams:
    """Jump intensity theta per unit time."""
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, 'theta', _positive_finite('theta', self.theta))


@dataclass(frozen=True)
class SamplingScheme:
    """Observation at times i*step, i = 1..count, over [0, horizon]."""
    horizon: float
    step: float
    count: int = field(init=False)

    def __post_init__(self) -> None:
        horizon = _positive_finite('horizon', self.horizon)
        step = _positive_finite('step', self.step)
        if step > horizon:
            raise DomainError(
                f'step {step} exceeds horizon {horizon}',
                horizon=horizon,
                step=step,
            )
        object.__setattr__(self, 'horizon', horizon)
        object.__setattr__(self, 'step', step)
        # horizon = n * step computed in floating point may land just below n
        object.__setattr__(self, 'count', max(1, math.floor(horizon / step * (1 + 1e-12))))

    @classmethod
    def from_count(cls, count: int, step: float) -> 'SamplingScheme':
        """Scheme with exactly `count` increments of length `step`."""
        if count < 1:
            raise DomainError(f'count must be at least 1, got {count}', count=count)
        return cls(horizon=count * step, step=step)

    def product(self, params: ModelParams) -> float:
        """Dimensionless x = theta * step."""
        return params.theta * self.step


class RegimeTag(str, Enum):
    """Observation regime label."""
    MICROSCOPIC = 'microscopic'
    INTERMEDIATE = 'intermediate'
    MACROSCOPIC = 'macroscopic'

    @classmethod
    def from_label(cls, label: str) -> 'RegimeTag':
        aliases = {
            'micro': cls.MICROSCOPIC,
            'microscopic': cls.MICROSCOPIC,
            'inter': cls.INTERMEDIATE,
            'intermediate': cls.INTERMEDIATE,
            'macro': cls.MACROSCOPIC,
            'macroscopic': cls.MACROSCOPIC,
        }
        try:
            return aliases[label.strip().lower()]
        except (KeyError, AttributeError):
            raise DomainError(f'unknown regime {label!r}', regime=str(label)) from None


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Observed increments X_{i step} - X_{(i-1) step}, i = 1..count."""
    values: NDArray[np.int64]
    scheme: SamplingScheme

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise DomainError('increments must be a one-dimensional sequence', shape=list(values.shape))
        if values.size and not np.issubdtype(values.dtype, np.integer):
            if not np.all(np.isfinite(values)) or not np.all(values == np.round(values)):
                raise DomainError('increments must be integers')
        values = values.astype(np.int64)
        if values.size != self.scheme.count:
            raise DomainError(
                f'series has {values.size} increments but the scheme expects {self.scheme.count}',
                length=int(values.size),
                count=self.scheme.count,
            )
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return int(self.values.size)

    def order_counts(self) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
        """Distinct |d| values and their multiplicities."""
        orders, counts = np.unique(np.abs(self.values), return_counts=True)
        return orders, counts

    def sum_of_squares(self) -> float:
        return float(np.sum(self.values.astype(np.float64) ** 2))

    def is_all_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True, eq=False)
class LawTable:
    """The increment law at x on |k| <= K, with the Bessel ratios it needs.

    Arrays are indexed by the order nu = |k| = 0..K.
    """
    x: float
    prob: NDArray[np.float64]
    ratio: NDArray[np.float64]
    ratio2: NDArray[np.float64]

    @property
    def support(self) -> int:
        return int(self.prob.size - 1)

    @property
    def orders(self) -> NDArray[np.int64]:
        return np.arange(self.prob.size)

    @property
    def weights(self) -> NDArray[np.float64]:
        """P(|X| = nu): the probability at order nu counted for both signs."""
        weights = 2.0 * self.prob
        weights[0] = self.prob[0]
        return weights

    def expectation(self, values: NDArray[np.float64]) -> float:
        """E[g(|X|)] for g given on the orders 0..K."""
        return float(np.dot(self.weights, values))
