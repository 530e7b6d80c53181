"""
Quadratic Program Models

Problem and solution records for the dense active-set solver.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np


class QpStatus(Enum):
    """Solver exit status."""
    OPTIMAL = "optimal"
    RELAXED_OPTIMAL = "relaxed_optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class KktResiduals:
    """Infinity-norm residuals of the KKT conditions at the returned point."""
    stationarity: float
    primal: float
    complementarity: float

    def within(self, tol: float) -> bool:
        return max(self.stationarity, self.primal, self.complementarity) <= tol


@dataclass
class QpProblem:
    """min 0.5 z' H z + f' z  s.t.  G z <= g.

    soft_rows holds row indices that may be relaxed with slacks penalized by slack_weight.
    """
    H: np.ndarray
    f: np.ndarray
    G: np.ndarray
    g: np.ndarray
    soft_rows: List[int] = field(default_factory=list)
    slack_weight: float = 1e6

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def rows(self) -> int:
        return self.G.shape[0]

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.H @ z + self.f @ z)


@dataclass
class WarmStart:
    """Starting point and working-set candidates carried over from the previous step."""
    z: Optional[np.ndarray] = None
    active_set: List[int] = field(default_factory=list)


@dataclass
class QpSolution:
    """Solver output."""
    z: np.ndarray
    status: QpStatus
    kkt: KktResiduals
    iterations: int
    active_set: List[int] = field(default_factory=list)
    multipliers: Optional[np.ndarray] = None
    slack: Optional[np.ndarray] = None

    @property
    def relaxed(self) -> bool:
        return self.status is QpStatus.RELAXED_OPTIMAL

    @property
    def usable(self) -> bool:
        """A point that may be applied to the plant."""
        return self.status in (QpStatus.OPTIMAL, QpStatus.RELAXED_OPTIMAL, QpStatus.MAX_ITER)
