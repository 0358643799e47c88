"""
Result types for Fisher information curves.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class InfoCurvePoint:
    """psi(x) and the QV deficiency ratio psi(x)(2x^2 + x) at x = theta*step."""
    x: float
    psi: float
    ratio: float


@dataclass(frozen=True)
class DeficiencyMaximum:
    x_star: float
    ratio_star: float
    at_boundary: bool = False

    @property
    def loss_percent(self) -> float:
        """Relative variance excess of QV over the efficient bound, in percent."""
        return 100.0 * (self.ratio_star - 1.0)


@dataclass(frozen=True)
class ScalePoint:
    """Information at one step for a fixed number of increments."""
    delta: float
    horizon: float
    info: float
    info_micro: float
    info_macro: float
    qv_inverse_variance: float
