"""
Tumbling Target Motion

Target body-rate profiles, target attitude propagation and the desired
chaser pose horizon coupled to the target's docking port.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from models import DesiredPose, TargetKinematics, TargetMode, TargetMotion
from .attitude import check_pitch, euler_rate_matrix
from .orbit_los import rk4_step

logger = logging.getLogger(__name__)


def target_rates(motion: TargetMotion, t: float) -> np.ndarray:
    """Target body rates at time t (rad/s)."""
    if motion.mode is TargetMode.CONSTANT:
        return np.array(motion.omega_const, dtype=float)
    amp = np.array(motion.amp, dtype=float)
    periods = np.array(motion.periods, dtype=float)
    return amp * np.sin(2.0 * math.pi * t / periods)


def propagate_target(att: Sequence[float], rates: Sequence[float], dt: float) -> np.ndarray:
    """One RK4 step of the 3-2-1 Euler kinematics with body rates held over dt.

    Args:
        att: Target (phi, theta, psi) in rad
        rates: Target body rates (rad/s)
        dt: Step length (s)

    Returns:
        Target Euler angles at the end of the step
    """
    att = np.asarray(att, dtype=float)
    check_pitch(att[1], label="target pitch")
    w = np.asarray(rates, dtype=float)

    def kinematics(angles, _u):
        return euler_rate_matrix(angles[0], angles[1]) @ w

    return rk4_step(kinematics, att, None, dt)


def _euler_321(rotation: Rotation) -> np.ndarray:
    yaw, pitch, roll = rotation.as_euler("ZYX")
    return np.array([roll, pitch, yaw])


class TargetTrajectory:
    """Target attitude on the control grid t = k*Ts, extended on demand.

    Rotation kinematics compose body-rate increments on the rotation group and
    report 3-2-1 Euler angles, so they pass the pitch pole without blowing up.
    Euler kinematics integrate the Euler-angle rates directly.
    """

    def __init__(self, motion: TargetMotion, Ts: float):
        """Initialize the trajectory.

        Args:
            motion: Target rate profile and initial attitude
            Ts: Grid spacing (s)
        """
        self.motion = motion
        self.Ts = Ts
        self.logger = logging.getLogger(__name__)
        initial = np.array(motion.initial_attitude, dtype=float)
        self._angles: List[np.ndarray] = [initial]
        self._rotation = Rotation.from_euler("ZYX", [initial[2], initial[1], initial[0]])

    def _extend(self, step: int) -> None:
        while len(self._angles) <= step:
            k = len(self._angles) - 1
            t_mid = (k + 0.5) * self.Ts
            rates = target_rates(self.motion, t_mid)
            if self.motion.kinematics is TargetKinematics.ROTATION:
                self._rotation = self._rotation * Rotation.from_rotvec(rates * self.Ts)
                self._angles.append(_euler_321(self._rotation))
            else:
                self._angles.append(propagate_target(self._angles[-1], rates, self.Ts))

    def attitude(self, step: int) -> np.ndarray:
        """Target (phi, theta, psi) at grid index `step`."""
        self._extend(step)
        return self._angles[step].copy()

    def rates(self, step: int) -> np.ndarray:
        return target_rates(self.motion, step * self.Ts)


def desired_pose(attitude: Sequence[float], rates: Sequence[float], rho_d: float,
                 pitch_margin: float = 0.0, rho_d_dot: float = 0.0) -> DesiredPose:
    """Desired LOS and attitude states for one target attitude.

    The target pitch is clipped to +/-(pi/2 - pitch_margin) and the Euler
    rates are evaluated at the clipped pitch.

    Args:
        attitude: Target (phi, theta, psi) in rad
        rates: Target body rates (rad/s)
        rho_d: Desired range (m)
        pitch_margin: Distance kept from the pitch pole (rad)
        rho_d_dot: Desired range rate (m/s)

    Returns:
        DesiredPose with x_dp = [rho_d, theta, -psi, rho_d_dot, theta_dot, -psi_dot]
        and x_da = [phi, theta, psi, phi_dot, theta_dot, psi_dot]
    """
    phi, theta, psi = (float(a) for a in attitude)
    limit = math.pi / 2 - max(pitch_margin, 1e-6)
    theta = float(np.clip(theta, -limit, limit))
    phi_dot, theta_dot, psi_dot = euler_rate_matrix(phi, theta) @ np.asarray(rates, dtype=float)

    x_dp = np.array([rho_d, theta, -psi, rho_d_dot, theta_dot, -psi_dot])
    x_da = np.array([phi, theta, psi, phi_dot, theta_dot, psi_dot])
    return DesiredPose(x_dp=x_dp, x_da=x_da)


def desired_horizon(trajectory: TargetTrajectory, t_k: float, Np: int, Ts: Optional[float] = None,
                    rho_d: float = 6.0, pitch_margin: float = 0.0) -> List[DesiredPose]:
    """Desired poses at t_k + i*Ts for i = 1..Np.

    Args:
        trajectory: Target attitude history
        t_k: Current time (s)
        Np: Prediction horizon
        Ts: Sampling interval; defaults to the trajectory grid
        rho_d: Desired range (m)
        pitch_margin: Distance kept from the pitch pole (rad)

    Returns:
        List of Np DesiredPose entries
    """
    if Np < 1:
        raise ValueError(f"Prediction horizon must be at least 1, got {Np}")
    if Ts is not None and not math.isclose(Ts, trajectory.Ts):
        raise ValueError(f"Horizon spacing {Ts} differs from the target grid {trajectory.Ts}")
    k = int(round(t_k / trajectory.Ts))
    return [current_pose(trajectory, k + i, rho_d, pitch_margin) for i in range(1, Np + 1)]


def current_pose(trajectory: TargetTrajectory, step: int, rho_d: float = 6.0,
                 pitch_margin: float = 0.0) -> DesiredPose:
    return desired_pose(trajectory.attitude(step), trajectory.rates(step), rho_d, pitch_margin)
