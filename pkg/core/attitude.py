"""
Chaser Attitude Dynamics

3-2-1 Euler kinematics, rigid-body rate dynamics with reaction-wheel
actuation, and the pseudo-linear matrices used by the attitude controller.
"""

import math
from typing import Tuple, Union

import numpy as np

from models import AttitudeState, InertiaParams, WheelInput
from .errors import GimbalLock

GIMBAL_MARGIN = 1e-9


def _attitude_vector(x) -> np.ndarray:
    if isinstance(x, AttitudeState):
        return x.to_array()
    return np.asarray(x, dtype=float)


def _wheel_vector(u) -> np.ndarray:
    if u is None:
        return np.zeros(3)
    if isinstance(u, WheelInput):
        return u.to_array()
    return np.asarray(u, dtype=float)


def check_pitch(theta: float, label: str = "pitch") -> None:
    if abs(theta) >= math.pi / 2 - GIMBAL_MARGIN:
        raise GimbalLock(float(theta), label=label)


def euler_rate_matrix(phi: float, theta: float) -> np.ndarray:
    """Map from body rates to 3-2-1 Euler angle rates.

    Args:
        phi: Roll angle (rad)
        theta: Pitch angle (rad)

    Returns:
        3x3 matrix T with (phi_dot, theta_dot, psi_dot) = T @ w
    """
    check_pitch(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    ct, tt = math.cos(theta), math.tan(theta)
    return np.array([
        [1.0, sp * tt, cp * tt],
        [0.0, cp, -sp],
        [0.0, sp / ct, cp / ct],
    ])


def euler_rates(angles, rates) -> np.ndarray:
    """Euler angle rates for body rates `rates` at attitude `angles` (phi, theta, psi)."""
    return euler_rate_matrix(angles[0], angles[1]) @ np.asarray(rates, dtype=float)


def _body_accel(w: np.ndarray, u: np.ndarray, inertia: InertiaParams) -> np.ndarray:
    J1, J2, J3 = inertia.body
    coupling = np.array([
        (J2 - J3) * w[1] * w[2] / J1,
        (J3 - J1) * w[0] * w[2] / J2,
        (J1 - J2) * w[0] * w[1] / J3,
    ])
    return coupling + inertia.input_gains * u


def attitude_rhs(x: Union[AttitudeState, np.ndarray], u: Union[WheelInput, np.ndarray, None],
                 inertia: InertiaParams, ts: float = 0.1) -> Tuple[np.ndarray, np.ndarray]:
    """Attitude right-hand side.

    The Euler-angle accelerations are a forward difference of the Euler
    rates over `ts` along the current flow; only their signs are consumed.

    Args:
        x: Attitude state [phi, theta, psi, w1, w2, w3]
        u: Wheel angular accelerations
        inertia: Chaser and wheel inertias
        ts: Differencing interval (s)

    Returns:
        Tuple (dx 6-vector, accelerations (phi_ddot, theta_ddot, psi_ddot))
    """
    x = _attitude_vector(x)
    u = _wheel_vector(u)
    check_pitch(x[1])

    angle_rates = euler_rates(x[:3], x[3:])
    w_dot = _body_accel(x[3:], u, inertia)
    dx = np.concatenate([angle_rates, w_dot])

    ahead = x + ts * dx
    T_ahead = euler_rate_matrix(ahead[0], np.clip(ahead[1], -math.pi / 2 + 1e-6, math.pi / 2 - 1e-6))
    accels = (T_ahead @ ahead[3:] - angle_rates) / ts
    return dx, accels


def attitude_jacobians(x: Union[AttitudeState, np.ndarray],
                       inertia: InertiaParams) -> Tuple[np.ndarray, np.ndarray]:
    """State-dependent Ac(x) and constant Bc with x_dot = Ac x + Bc u.

    The bilinear Euler coupling of each rate row is carried on the column of
    one of its two factors, as (J2-J3)/J1 * w3 on column w2 and cyclically.
    """
    x = _attitude_vector(x)
    Ac = np.zeros((6, 6))
    Ac[:3, 3:] = euler_rate_matrix(x[0], x[1])
    J1, J2, J3 = inertia.body
    Ac[3, 4] = x[5] * (J2 - J3) / J1
    Ac[4, 5] = x[3] * (J3 - J1) / J2
    Ac[5, 3] = x[4] * (J1 - J2) / J3
    return Ac, attitude_input_matrix(inertia)


def attitude_input_matrix(inertia: InertiaParams) -> np.ndarray:
    Bc = np.zeros((6, 3))
    Bc[3:, :] = np.diag(inertia.input_gains)
    return Bc


def attitude_derivative(inertia: InertiaParams, ts: float = 0.1):
    """Bind inertias into an rk4_step-compatible attitude derivative."""
    def rhs(x, u):
        return attitude_rhs(x, u, inertia, ts)[0]
    return rhs
