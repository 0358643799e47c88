"""
Estimator tags and the estimate record.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from core.exceptions import DomainError

DEGENERATE = 'degenerate'
FALLBACK_MLE = 'fallback_mle'
NOT_CONVERGED = 'not_converged'


class EstimatorTag(str, Enum):
    QV = 'qv'
    ONE_STEP = 'onestep'
    MLE = 'mle'

    @property
    def label(self) -> str:
        return {'qv': 'QV', 'onestep': 'OneStep', 'mle': 'MLE'}[self.value]

    @classmethod
    def from_label(cls, label: str) -> 'EstimatorTag':
        key = str(label).strip().lower().replace('-', '').replace('_', '')
        aliases = {'qv': cls.QV, 'onestep': cls.ONE_STEP, 'os': cls.ONE_STEP, 'mle': cls.MLE}
        if key not in aliases:
            raise DomainError(f'unknown estimator {label!r}', estimator=str(label))
        return aliases[key]


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate of theta with its asymptotic variance proxy."""
    value: float
    avar: Optional[float]
    method: EstimatorTag
    converged: bool = True
    iterations: int = 0
    flags: Tuple[str, ...] = ()

    @property
    def stderr(self) -> Optional[float]:
        return None if self.avar is None else math.sqrt(self.avar)

    @property
    def degenerate(self) -> bool:
        return DEGENERATE in self.flags
