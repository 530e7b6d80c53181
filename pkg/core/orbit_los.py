"""
Line-of-Sight Relative Translation Dynamics

Nonlinear LOS plant, its pseudo-linear matrices, target orbit propagation,
LOS to LVLH reporting transform and the fixed-step RK4 integrator.
"""

import logging
import math
from typing import Callable, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from models import LosState, OrbitParams, OrbitState, TranslationInput
from .errors import DegenerateRange, GimbalLock

logger = logging.getLogger(__name__)

GIMBAL_MARGIN = 1e-9

VectorLike = Union[np.ndarray, list, tuple]


def _los_vector(x: Union[LosState, VectorLike]) -> np.ndarray:
    if isinstance(x, LosState):
        return x.to_array()
    return np.asarray(x, dtype=float)


def _input_vector(u: Union[TranslationInput, VectorLike, None]) -> np.ndarray:
    if u is None:
        return np.zeros(3)
    if isinstance(u, TranslationInput):
        return u.to_array()
    return np.asarray(u, dtype=float)


def check_los_guards(x: np.ndarray) -> None:
    """Raise if the range is not positive or the elevation is at gimbal lock."""
    if x[0] <= 0.0:
        raise DegenerateRange(float(x[0]))
    if abs(x[1]) >= math.pi / 2 - GIMBAL_MARGIN:
        raise GimbalLock(float(x[1]), label="elevation")


def orbit_state(orbit: OrbitParams, f: float) -> OrbitState:
    """Closed-form orbital quantities at true anomaly f.

    Args:
        orbit: Orbit elements
        f: True anomaly (rad)

    Returns:
        OrbitState with Rt, omega and omega_dot evaluated at f
    """
    p = orbit.semi_latus_rectum
    Rt = p / (1.0 + orbit.e * math.cos(f))
    omega = math.sqrt(orbit.mu * p) / Rt ** 2
    omega_dot = -2.0 * orbit.mu * orbit.e * math.sin(f) / Rt ** 3
    return OrbitState(f=f, Rt=Rt, omega=omega, omega_dot=omega_dot, mu=orbit.mu)


def initial_orbit_state(orbit: OrbitParams) -> OrbitState:
    return orbit_state(orbit, orbit.f0)


def propagate_orbit(orbit: OrbitParams, prev: OrbitState, dt: float) -> OrbitState:
    """Advance the true anomaly by one RK4 step of f_dot = omega(f).

    Args:
        orbit: Orbit elements
        prev: Orbital state at the start of the step
        dt: Step length (s)

    Returns:
        Orbital state at the end of the step
    """
    if dt <= 0:
        raise ValueError(f"Orbit step must be positive, got {dt}")

    def anomaly_rate(f, _u):
        return np.array([orbit_state(orbit, float(f[0])).omega])

    f_next = rk4_step(anomaly_rate, np.array([prev.f]), None, dt)[0]
    return orbit_state(orbit, float(f_next))


def los_jacobians(x: Union[LosState, VectorLike], orb: OrbitState) -> Tuple[np.ndarray, np.ndarray]:
    """State-dependent matrices Ac(x), Bc(x) with x_dot = Ac x + Bc u.

    Args:
        x: LOS state
        orb: Target orbital state

    Returns:
        Tuple (Ac 6x6, Bc 6x3)
    """
    x = _los_vector(x)
    check_los_guards(x)
    rho, eps, beta = x[0], x[1], x[2]
    x5, x6 = x[4], x[5]
    w = orb.omega
    n2 = orb.mu_over_r3

    ce, se = math.cos(eps), math.sin(eps)
    sb, cb = math.sin(beta), math.cos(beta)

    Ac = np.zeros((6, 6))
    Ac[0, 3] = 1.0
    Ac[1, 4] = 1.0 / rho
    Ac[2, 5] = 1.0 / rho

    Ac[3, 0] = w ** 2 * ce ** 2 - n2 * (1.0 - 3.0 * ce ** 2 * sb ** 2)
    Ac[3, 4] = x5 / rho
    Ac[3, 5] = (-2.0 * w + x6 / rho) * ce ** 2

    Ac[4, 0] = (-w ** 2 - 3.0 * n2 * sb ** 2) * ce * se
    Ac[4, 3] = -x5 / rho
    Ac[4, 5] = (2.0 * w - x6 / rho) * ce * se

    Ac[5, 0] = orb.omega_dot + 3.0 * n2 * sb * cb
    Ac[5, 3] = 2.0 * w - x6 / rho
    Ac[5, 4] = 2.0 * math.tan(eps) * (-w + x6 / rho)

    Bc = np.zeros((6, 3))
    Bc[3, 0] = 1.0
    Bc[4, 1] = 1.0
    Bc[5, 2] = -1.0 / ce
    return Ac, Bc


def los_rhs(x: Union[LosState, VectorLike], u: Union[TranslationInput, VectorLike, None],
            orb: OrbitState) -> Tuple[np.ndarray, np.ndarray]:
    """Nonlinear LOS right-hand side.

    Args:
        x: LOS state [rho, eps, beta, rho_dot, rho*eps_dot, rho*beta_dot]
        u: Specific thrust (u_rho, u_eps, u_beta)
        orb: Target orbital state

    Returns:
        Tuple (dx 6-vector, accelerations (rho_ddot, eps_ddot, beta_ddot))
    """
    x = _los_vector(x)
    u = _input_vector(u)
    check_los_guards(x)

    rho, eps, beta, rho_dot, x5, x6 = x
    w = orb.omega
    n2 = orb.mu_over_r3
    ce, se = math.cos(eps), math.sin(eps)
    sb, cb = math.sin(beta), math.cos(beta)
    eps_dot = x5 / rho
    beta_dot = x6 / rho
    rel = beta_dot - w

    rho_ddot = (rho * eps_dot ** 2 + rho * rel ** 2 * ce ** 2
                - n2 * (rho - 3.0 * rho * ce ** 2 * sb ** 2) + u[0])
    eps_ddot = (-2.0 * rho_dot * eps_dot - rho * rel ** 2 * se * ce
                - 3.0 * n2 * rho * se * ce * sb ** 2 + u[1]) / rho
    beta_ddot = orb.omega_dot + (-2.0 * rho_dot * rel * ce + 2.0 * rho * eps_dot * rel * se
                                 + 3.0 * n2 * rho * ce * sb * cb - u[2]) / (rho * ce)

    dx = np.array([
        rho_dot,
        eps_dot,
        beta_dot,
        rho_ddot,
        rho_dot * eps_dot + rho * eps_ddot,
        rho_dot * beta_dot + rho * beta_ddot,
    ])
    return dx, np.array([rho_ddot, eps_ddot, beta_ddot])


def los_to_lvlh(x: Union[LosState, VectorLike]) -> np.ndarray:
    """Chaser position in the LVLH frame.

    The LOS axis is obtained from LVLH by a rotation of eps about axis 3
    followed by beta about the new axis 2; the chaser sits at (rho, 0, 0)
    along that axis.
    """
    x = _los_vector(x)
    rotation = Rotation.from_euler("ZY", [x[1], x[2]])
    return rotation.apply(np.array([x[0], 0.0, 0.0]))


def rk4_step(rhs: Callable[[np.ndarray, np.ndarray], np.ndarray], state: np.ndarray,
             u, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta step with the input held constant.

    Args:
        rhs: Function (state, u) -> state derivative
        state: State at the start of the step
        u: Input held over the step
        dt: Step length (s)

    Returns:
        State at the end of the step
    """
    if dt <= 0:
        raise ValueError(f"Integration step must be positive, got {dt}")
    y = np.asarray(state, dtype=float)
    k1 = np.asarray(rhs(y, u), dtype=float)
    k2 = np.asarray(rhs(y + 0.5 * dt * k1, u), dtype=float)
    k3 = np.asarray(rhs(y + 0.5 * dt * k2, u), dtype=float)
    k4 = np.asarray(rhs(y + dt * k3, u), dtype=float)
    return y + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def los_derivative(orb: OrbitState) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Bind an orbital state into an rk4_step-compatible LOS derivative."""
    def rhs(x, u):
        return los_rhs(x, u, orb)[0]
    return rhs
