"""
Target Motion Models

Tumbling-target angular velocity profile and desired chaser pose.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np


class TargetMode(Enum):
    """Target angular velocity profile."""
    CONSTANT = "constant"
    SINUSOIDAL = "sinusoidal"


class TargetKinematics(Enum):
    """How the target's Euler angles are advanced in the simulator."""
    ROTATION = "rotation"
    EULER_RK4 = "euler_rk4"


@dataclass(frozen=True)
class TargetMotion:
    """Target body-rate profile.

    Constant mode uses omega_const; sinusoidal mode uses amp_i * sin(2*pi*t / periods_i).
    """
    mode: TargetMode = TargetMode.CONSTANT
    omega_const: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    amp: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    periods: Tuple[float, float, float] = (200.0, 100.0, 200.0 / 3.0)
    initial_attitude: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    kinematics: TargetKinematics = TargetKinematics.ROTATION


@dataclass
class DesiredPose:
    """Desired LOS state and desired attitude state at one instant."""
    x_dp: np.ndarray = field(default_factory=lambda: np.zeros(6))
    x_da: np.ndarray = field(default_factory=lambda: np.zeros(6))
