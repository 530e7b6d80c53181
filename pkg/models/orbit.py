"""
Orbit and Line-of-Sight Models

Target orbit parameters, orbital state and the LOS relative translation state.
"""

import math
from dataclasses import dataclass

import numpy as np


MU_EARTH = 3.986004418e14


@dataclass(frozen=True)
class OrbitParams:
    """Target orbit elements."""
    a: float            # semi-major axis (m)
    e: float            # eccentricity
    f0: float = 0.0     # initial true anomaly (rad)
    mu: float = MU_EARTH

    @property
    def semi_latus_rectum(self) -> float:
        """Semi-latus rectum a(1 - e^2)."""
        return self.a * (1.0 - self.e ** 2)


@dataclass(frozen=True)
class OrbitState:
    """Target orbital state at one instant."""
    f: float            # true anomaly (rad)
    Rt: float           # geocentric distance (m)
    omega: float        # orbital rate (rad/s)
    omega_dot: float    # orbital rate derivative (rad/s^2)
    mu: float = MU_EARTH

    @property
    def mu_over_r3(self) -> float:
        """Gravity-gradient coefficient mu / Rt^3 (1/s^2)."""
        return self.mu / self.Rt ** 3


@dataclass(frozen=True)
class LosState:
    """Relative translation in the LOS frame, [rho, eps, beta, rho_dot, rho*eps_dot, rho*beta_dot]."""
    rho: float
    eps: float
    beta: float
    rho_dot: float = 0.0
    rho_epsdot: float = 0.0
    rho_betadot: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.rho, self.eps, self.beta,
                         self.rho_dot, self.rho_epsdot, self.rho_betadot], dtype=float)

    @classmethod
    def from_array(cls, x) -> 'LosState':
        x = np.asarray(x, dtype=float)
        return cls(*(float(v) for v in x[:6]))

    @classmethod
    def from_rates(cls, rho: float, eps: float, beta: float, rho_dot: float = 0.0,
                   eps_dot: float = 0.0, beta_dot: float = 0.0) -> 'LosState':
        """Build a state from angle rates instead of the range-scaled components."""
        return cls(rho, eps, beta, rho_dot, rho * eps_dot, rho * beta_dot)

    @property
    def is_admissible(self) -> bool:
        """Range positive, elevation inside the open gimbal interval, azimuth in [-pi, pi]."""
        return self.rho > 0 and abs(self.eps) < math.pi / 2 and -math.pi <= self.beta <= math.pi


@dataclass(frozen=True)
class TranslationInput:
    """Specific thrust components in the LOS frame (m/s^2)."""
    u_rho: float = 0.0
    u_eps: float = 0.0
    u_beta: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.u_rho, self.u_eps, self.u_beta], dtype=float)
