"""
Constraint Reconfiguration

Every constraint family expressed as stacked linear inequalities
G * du <= g over the input increments of one horizon, plus signed margins
of the true nonlinear state against the same bounds.
"""

import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from models import ConstraintFamily, ConstraintParams, LinearInequalities, PredictionOperators, Selector
from .errors import DimensionMismatch

logger = logging.getLogger(__name__)

PITCH_LIMIT = math.pi / 2 - 1e-9


def wrap_to_pi(angle):
    """Map angles to [-pi, pi)."""
    return (np.asarray(angle, dtype=float) + math.pi) % (2.0 * math.pi) - math.pi


def periodic_bracket(centres: Sequence[float], gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bracket of a 2*pi-periodic channel.

    Clipped into [-pi, pi] only where the centre itself lies in [-pi, pi];
    centres carried outside by a reference shift keep their full width.
    """
    centres = np.asarray(centres, dtype=float)
    lower = centres - gamma
    upper = centres + gamma
    inside = np.abs(centres) <= math.pi
    lower = np.where(inside, np.maximum(lower, -math.pi), lower)
    upper = np.where(inside, np.minimum(upper, math.pi), upper)
    return lower, upper


def pitch_bracket(centres: Sequence[float], gamma: float, label: str = "pitch") -> Tuple[np.ndarray, np.ndarray]:
    """Bracket of an elevation or pitch channel, clipped to the open gimbal interval."""
    centres = np.asarray(centres, dtype=float)
    if np.any(np.abs(centres) >= PITCH_LIMIT):
        logger.warning(f"{label} bracket centre outside (-pi/2, pi/2); bounds collapse to the legal range")
    lower = np.clip(centres - gamma, -PITCH_LIMIT, PITCH_LIMIT)
    upper = np.clip(centres + gamma, -PITCH_LIMIT, PITCH_LIMIT)
    return lower, upper


def input_ineq(Lambda: np.ndarray, Gamma: np.ndarray, u_prev: np.ndarray, umax: Sequence[float],
               Nc: int) -> LinearInequalities:
    """Actuator limits -umax <= Lambda u_prev + Gamma du <= umax.

    Args:
        Lambda: Column of Nc identity blocks
        Gamma: Lower block-triangular identities
        u_prev: Previous input
        umax: Per-axis limit
        Nc: Control horizon

    Returns:
        2*m*Nc rows, upper bounds first
    """
    umax = np.asarray(umax, dtype=float)
    if np.any(umax <= 0):
        raise ValueError(f"Input limits must be positive, got {umax}")
    u_tilde = np.kron(np.ones(Nc), umax)
    held = Lambda @ np.asarray(u_prev, dtype=float)
    G = np.vstack([Gamma, -Gamma])
    g = np.concatenate([u_tilde - held, u_tilde + held])
    steps = np.tile(np.repeat(np.arange(Nc), umax.size), 2)
    return LinearInequalities(G=G, g=g, labels=[ConstraintFamily.INPUT] * G.shape[0],
                              steps=steps, strides=np.full(G.shape[0], umax.size))


def _window_rows(ops: PredictionOperators, x_k: np.ndarray, u_prev: np.ndarray, index: int,
                 lower: Optional[np.ndarray], upper: Optional[np.ndarray],
                 family: ConstraintFamily) -> LinearInequalities:
    """Rows lower <= f_index * x* <= upper over the horizon (upper rows first)."""
    F = Selector(index).lift(ops.Np, ops.n)
    FM = F @ ops.increment_map
    Ffree = F @ ops.free_response(np.asarray(x_k, dtype=float), np.asarray(u_prev, dtype=float))
    G_parts, g_parts = [], []
    if upper is not None:
        G_parts.append(FM)
        g_parts.append(np.asarray(upper, dtype=float) - Ffree)
    if lower is not None:
        G_parts.append(-FM)
        g_parts.append(Ffree - np.asarray(lower, dtype=float))
    G = np.vstack(G_parts)
    g = np.concatenate(g_parts)
    steps = np.tile(np.arange(ops.Np), len(G_parts))
    return LinearInequalities(G=G, g=g, labels=[family] * G.shape[0], steps=steps, strides=np.ones_like(steps))


def collision_ineq(ops: PredictionOperators, x_k: np.ndarray, u_prev: np.ndarray, r_safe: float,
                   Np: Optional[int] = None) -> LinearInequalities:
    """Keep-out sphere rho(k+i) >= r_safe for i = 1..Np."""
    if r_safe <= 0:
        raise ValueError(f"Keep-out radius must be positive, got {r_safe}")
    Np = ops.Np if Np is None else Np
    if Np != ops.Np:
        raise DimensionMismatch(f"Horizon {Np} does not match operators ({ops.Np})")
    return _window_rows(ops, x_k, u_prev, 1, np.full(Np, r_safe), None, ConstraintFamily.COLLISION)


def cone_ineq(ops: PredictionOperators, x_k: np.ndarray, u_prev: np.ndarray, theta_t: Sequence[float],
              psi_t: Sequence[float], gamma_e: float, Np: Optional[int] = None) -> LinearInequalities:
    """Entry cone: eps within gamma_e of theta_t and beta within gamma_e of -psi_t.

    Args:
        ops: Position prediction operators
        x_k: Current LOS state
        u_prev: Previous position input
        theta_t: Target pitch at each prediction instant
        psi_t: Target yaw at each prediction instant
        gamma_e: Cone half-angle (rad)
        Np: Prediction horizon

    Returns:
        Elevation rows then azimuth rows
    """
    Np = ops.Np if Np is None else Np
    theta_t = np.asarray(theta_t, dtype=float)
    psi_t = np.asarray(psi_t, dtype=float)
    if theta_t.shape[0] != Np or psi_t.shape[0] != Np:
        raise DimensionMismatch(f"Target horizon length must be {Np}")
    eps_lo, eps_hi = pitch_bracket(theta_t, gamma_e, label="elevation")
    beta_lo, beta_hi = periodic_bracket(-psi_t, gamma_e)
    return stack([
        _window_rows(ops, x_k, u_prev, 2, eps_lo, eps_hi, ConstraintFamily.CONE_EPS),
        _window_rows(ops, x_k, u_prev, 3, beta_lo, beta_hi, ConstraintFamily.CONE_BETA),
    ])


def fov_ineq(ops_a: PredictionOperators, x_a: np.ndarray, u_prev_a: np.ndarray, eps: Sequence[float],
             beta: Sequence[float], gamma_f: float, Np: Optional[int] = None, yaw_sign: int = 1,
             roll_window: Tuple[float, float] = (-math.pi, math.pi)) -> LinearInequalities:
    """Field of view: roll in roll_window, pitch within gamma_f of eps, yaw within gamma_f of yaw_sign*beta.

    Args:
        ops_a: Attitude prediction operators
        x_a: Current attitude state
        u_prev_a: Previous wheel input
        eps: Nominal elevation at each prediction instant
        beta: Nominal azimuth at each prediction instant (already aligned to the yaw channel)
        gamma_f: Field-of-view half-angle (rad)
        Np: Prediction horizon
        yaw_sign: Sign relating the yaw centre to beta
        roll_window: Roll bounds, [-pi, pi] unless a roll reference shift is pending

    Returns:
        Roll rows, pitch rows, yaw rows
    """
    Np = ops_a.Np if Np is None else Np
    eps = np.asarray(eps, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if eps.shape[0] != Np or beta.shape[0] != Np:
        raise DimensionMismatch(f"Nominal LOS horizon length must be {Np}")
    pitch_lo, pitch_hi = pitch_bracket(eps, gamma_f, label="pitch")
    yaw_lo, yaw_hi = periodic_bracket(yaw_sign * beta, gamma_f)
    return stack([
        _window_rows(ops_a, x_a, u_prev_a, 1, np.full(Np, roll_window[0]), np.full(Np, roll_window[1]),
                     ConstraintFamily.FOV_ROLL),
        _window_rows(ops_a, x_a, u_prev_a, 2, pitch_lo, pitch_hi, ConstraintFamily.FOV_PITCH),
        _window_rows(ops_a, x_a, u_prev_a, 3, yaw_lo, yaw_hi, ConstraintFamily.FOV_YAW),
    ])


def stack(parts: Sequence[LinearInequalities], cols: Optional[int] = None) -> LinearInequalities:
    """Concatenate inequality systems in order, labels preserved."""
    if not parts:
        return LinearInequalities.empty(cols or 0)
    width = parts[0].cols if cols is None else cols
    for part in parts:
        if part.cols != width:
            raise DimensionMismatch(f"Cannot stack {part.cols}-column rows onto a {width}-column system")
    G = np.vstack([part.G for part in parts])
    g = np.concatenate([part.g for part in parts])
    labels = [label for part in parts for label in part.labels]
    if all(part.steps is not None and part.strides is not None for part in parts):
        steps = np.concatenate([part.steps for part in parts]).astype(int)
        strides = np.concatenate([part.strides for part in parts]).astype(int)
        return LinearInequalities(G=G, g=g, labels=labels, steps=steps, strides=strides)
    return LinearInequalities(G=G, g=g, labels=labels)


def pose_margins(x_p: np.ndarray, x_a: np.ndarray, u_p: np.ndarray, u_a: np.ndarray,
                 target_att: np.ndarray, limits: ConstraintParams,
                 roll_window: Tuple[float, float] = (-math.pi, math.pi)) -> Dict[str, float]:
    """Signed margins of the true state against the physical bounds; negative means violated.

    Args:
        x_p: LOS state
        x_a: Attitude state
        u_p: Applied translation input
        u_a: Applied wheel input
        target_att: Target (phi, theta, psi)
        limits: Constraint sizes
        roll_window: Roll bounds in force, measured on the unwrapped roll

    Returns:
        Dict keyed by input_p, collision, cone_eps, cone_beta, input_a, fov_roll, fov_pitch, fov_yaw
    """
    eps, beta = float(x_p[1]), float(x_p[2])
    phi, theta, psi = (float(v) for v in x_a[:3])
    theta_t, psi_t = float(target_att[1]), float(target_att[2])

    eps_lo, eps_hi = pitch_bracket([theta_t], limits.gamma_e, label="elevation")
    pitch_lo, pitch_hi = pitch_bracket([eps], limits.gamma_f, label="pitch")
    return {
        "input_p": float(np.min(np.asarray(limits.umax_p) - np.abs(u_p))),
        "collision": float(x_p[0] - limits.r_safe),
        "cone_eps": float(min(eps - eps_lo[0], eps_hi[0] - eps)),
        "cone_beta": float(limits.gamma_e - abs(wrap_to_pi(beta + psi_t))),
        "input_a": float(np.min(np.asarray(limits.umax_a) - np.abs(u_a))),
        "fov_roll": float(min(phi - roll_window[0], roll_window[1] - phi)),
        "fov_pitch": float(min(theta - pitch_lo[0], pitch_hi[0] - theta)),
        "fov_yaw": float(limits.gamma_f - abs(wrap_to_pi(psi - limits.fov_yaw_sign * beta))),
    }
