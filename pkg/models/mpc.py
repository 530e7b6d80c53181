"""
MPC Models

Discrete models, stacked prediction operators, tuning, condensed cost and linear inequalities.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np


class ConstraintFamily(Enum):
    """Row tag of a stacked inequality system."""
    INPUT = "input"
    COLLISION = "collision"
    CONE_EPS = "cone_eps"
    CONE_BETA = "cone_beta"
    FOV_ROLL = "fov_roll"
    FOV_PITCH = "fov_pitch"
    FOV_YAW = "fov_yaw"

    @property
    def is_soft(self) -> bool:
        """State-constraint families may be relaxed; actuator limits never."""
        return self is not ConstraintFamily.INPUT


POSITION_FAMILIES = (ConstraintFamily.INPUT, ConstraintFamily.COLLISION,
                     ConstraintFamily.CONE_EPS, ConstraintFamily.CONE_BETA)
ATTITUDE_FAMILIES = (ConstraintFamily.INPUT, ConstraintFamily.FOV_ROLL,
                     ConstraintFamily.FOV_PITCH, ConstraintFamily.FOV_YAW)


@dataclass(frozen=True)
class DiscreteModel:
    """Zero-order-hold model x+ = Ad x + Bd u over one sampling interval."""
    Ad: np.ndarray
    Bd: np.ndarray
    Ts: float

    @property
    def n(self) -> int:
        return self.Ad.shape[0]

    @property
    def m(self) -> int:
        return self.Bd.shape[1]


@dataclass
class PredictionOperators:
    """Stacked horizon operators.

    Astar (n*Np x n), Bbar (n*Np x m*Np), Bstar (n*Np x m*Nc), Lambda (m*Nc x m),
    Gamma (m*Nc x m*Nc) and the sampling block matrix Wstar (m*Nc x m*Nc).
    """
    Astar: np.ndarray
    Bbar: np.ndarray
    Bstar: np.ndarray
    Lambda: np.ndarray
    Gamma: np.ndarray
    Np: int
    Nc: int
    Wstar: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.Astar.shape[1]

    @property
    def m(self) -> int:
        return self.Lambda.shape[1]

    @property
    def b_tilde(self) -> np.ndarray:
        """B* + B* W*, or B* alone when no sampling matrix is attached."""
        if self.Wstar is None:
            return self.Bstar
        return self.Bstar + self.Bstar @ self.Wstar

    @property
    def increment_map(self) -> np.ndarray:
        """Map from the stacked input increments to the stacked predicted states."""
        return self.b_tilde @ self.Gamma

    def free_response(self, x_k: np.ndarray, u_prev: np.ndarray) -> np.ndarray:
        """Stacked predictions when every increment is zero."""
        return self.Astar @ x_k + self.b_tilde @ (self.Lambda @ u_prev)

    def predict(self, x_k: np.ndarray, u_prev: np.ndarray, du: np.ndarray) -> np.ndarray:
        """Stacked predictions for the increments du, shaped (Np, n)."""
        stacked = self.free_response(x_k, u_prev) + self.increment_map @ du
        return stacked.reshape(self.Np, self.n)


@dataclass(frozen=True)
class MpcTuning:
    """Horizon lengths, weights and sampling factors of one controller.

    q_range_scaled flags the Q diagonal entries that are divided by the current LOS range.
    """
    Np: int = 30
    Nc: int = 15
    Ts: float = 0.1
    Q: Tuple[float, ...] = (1000.0, 30000.0, 30000.0, 1000.0, 3000.0, 3000.0)
    P: Tuple[float, ...] = (100.0, 100.0, 100.0)
    ws: Tuple[float, float, float] = (0.4, 0.25, 0.25)
    seed: int = 0
    q_range_scaled: Tuple[bool, ...] = (False, False, False, False, False, False)

    def q_matrix(self, rho: float = 1.0) -> np.ndarray:
        """State weight, with flagged entries divided by rho."""
        q = np.array(self.Q, dtype=float)
        scaled = np.array(self.q_range_scaled, dtype=bool)
        q[scaled] = q[scaled] / rho
        return np.diag(q)

    def p_matrix(self) -> np.ndarray:
        return np.diag(np.array(self.P, dtype=float))


@dataclass(frozen=True)
class CondensedCost:
    """J(du) = 0.5 du' H du + f' du + c0."""
    H: np.ndarray
    f: np.ndarray
    c0: float
    E: Optional[np.ndarray] = None

    def evaluate(self, du: np.ndarray) -> float:
        return float(0.5 * du @ self.H @ du + self.f @ du + self.c0)


@dataclass(frozen=True)
class ConstraintParams:
    """Actuator limits and geometric constraint sizes."""
    umax_p: Tuple[float, float, float] = (3.0, 3.0, 3.0)
    umax_a: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    r_safe: float = 6.0
    gamma_e: float = np.deg2rad(30.0)
    gamma_f: float = np.deg2rad(30.0)
    fov_yaw_sign: int = 1


@dataclass(frozen=True)
class Selector:
    """Picks state coordinate `index` (1 = rho/phi, 2 = eps/theta, 3 = beta/psi) from each predicted state."""
    index: int

    def row(self, n: int = 6) -> np.ndarray:
        f = np.zeros(n)
        f[self.index - 1] = 1.0
        return f

    def lift(self, Np: int, n: int = 6) -> np.ndarray:
        """Kronecker lift I_Np (x) f, shape (Np, n*Np)."""
        return np.kron(np.eye(Np), self.row(n)[None, :])


@dataclass
class LinearInequalities:
    """Rows G z <= g, each tagged with the constraint family it encodes.

    steps holds the horizon index of each row and strides the distance to the
    row encoding the same bound one step earlier; both are None when unknown.
    """
    G: np.ndarray
    g: np.ndarray
    labels: List[ConstraintFamily] = field(default_factory=list)
    steps: Optional[np.ndarray] = None
    strides: Optional[np.ndarray] = None

    @property
    def rows(self) -> int:
        return self.G.shape[0]

    @property
    def cols(self) -> int:
        return self.G.shape[1]

    def slack(self, z: np.ndarray) -> np.ndarray:
        """g - G z; negative entries are violated rows."""
        return self.g - self.G @ z

    def rows_of(self, family: ConstraintFamily) -> np.ndarray:
        return np.array([i for i, label in enumerate(self.labels) if label is family], dtype=int)

    def shift_back(self, rows: Sequence[int]) -> List[int]:
        """Rows that encode the same bounds one horizon step earlier.

        Used to carry an active set over to the next control step, whose plan is
        the current one shifted by one block. Rows at step 0 fall off the horizon.
        """
        if self.steps is None or self.strides is None:
            return []
        return sorted(int(r - self.strides[r]) for r in rows if 0 <= r < self.rows and self.steps[r] > 0)

    @classmethod
    def empty(cls, cols: int) -> 'LinearInequalities':
        return cls(G=np.zeros((0, cols)), g=np.zeros(0), labels=[],
                   steps=np.zeros(0, dtype=int), strides=np.zeros(0, dtype=int))
