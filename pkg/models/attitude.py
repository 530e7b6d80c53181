"""
Attitude Models

Chaser inertia, attitude state and reaction-wheel input.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class InertiaParams:
    """Principal moments of inertia of the chaser and of its three reaction wheels (kg*m^2)."""
    J1: float
    J2: float
    J3: float
    Jw1: float
    Jw2: float
    Jw3: float

    @property
    def body(self) -> np.ndarray:
        return np.array([self.J1, self.J2, self.J3], dtype=float)

    @property
    def wheels(self) -> np.ndarray:
        return np.array([self.Jw1, self.Jw2, self.Jw3], dtype=float)

    @property
    def input_gains(self) -> np.ndarray:
        """Wheel-acceleration to body-acceleration gains (Jw^2 - J*Jw) / J^2."""
        J = self.body
        Jw = self.wheels
        return (Jw ** 2 - J * Jw) / J ** 2


@dataclass(frozen=True)
class AttitudeState:
    """Chaser 3-2-1 Euler angles and body rates, [phi, theta, psi, w1, w2, w3]."""
    phi: float
    theta: float
    psi: float
    w1: float = 0.0
    w2: float = 0.0
    w3: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.phi, self.theta, self.psi, self.w1, self.w2, self.w3], dtype=float)

    @classmethod
    def from_array(cls, x) -> 'AttitudeState':
        x = np.asarray(x, dtype=float)
        return cls(*(float(v) for v in x[:6]))


@dataclass(frozen=True)
class WheelInput:
    """Commanded wheel angular accelerations (rad/s^2)."""
    u_phi: float = 0.0
    u_theta: float = 0.0
    u_psi: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.u_phi, self.u_theta, self.u_psi], dtype=float)
