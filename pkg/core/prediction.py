"""
Piecewise-Affine Prediction

Zero-order-hold discretization of the pseudo-linear models, stacked horizon
operators, the sampling-correction matrix and the condensed QP cost.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag, expm

from models import CondensedCost, DiscreteModel, PredictionOperators
from .errors import DimensionMismatch, DynamicsError, NonFinite

logger = logging.getLogger(__name__)

JacobianFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def discretize(Ac: np.ndarray, Bc: np.ndarray, Ts: float) -> DiscreteModel:
    """Zero-order-hold discretization through the augmented block exponential.

        exp([[Ac, Bc], [0, 0]] * Ts) = [[Ad, Bd], [0, I]]

    Args:
        Ac: Continuous state matrix (n x n)
        Bc: Continuous input matrix (n x m)
        Ts: Sampling interval (s)

    Returns:
        DiscreteModel
    """
    Ac = np.asarray(Ac, dtype=float)
    Bc = np.asarray(Bc, dtype=float)
    if Ts <= 0:
        raise ValueError(f"Sampling interval must be positive, got {Ts}")
    if Ac.ndim != 2 or Ac.shape[0] != Ac.shape[1] or Bc.ndim != 2 or Bc.shape[0] != Ac.shape[0]:
        raise DimensionMismatch(f"Incompatible shapes Ac {Ac.shape}, Bc {Bc.shape}")
    if not (np.all(np.isfinite(Ac)) and np.all(np.isfinite(Bc))):
        raise NonFinite("Continuous model contains non-finite entries")

    n, m = Bc.shape
    augmented = np.zeros((n + m, n + m))
    augmented[:n, :n] = Ac
    augmented[:n, n:] = Bc
    phi = expm(augmented * Ts)
    return DiscreteModel(Ad=phi[:n, :n], Bd=phi[:n, n:], Ts=Ts)


def build_operators(models: Sequence[DiscreteModel], Nc: int) -> PredictionOperators:
    """Stack a horizon of discrete models into the condensed prediction operators.

    Row block i predicts x(k+i+1); inputs past the control horizon are zero.

    Args:
        models: DiscreteModel for each step k .. k+Np-1
        Nc: Control horizon

    Returns:
        PredictionOperators without a sampling matrix
    """
    Np = len(models)
    if Np < 1:
        raise DimensionMismatch("Empty model sequence")
    if not 1 <= Nc <= Np:
        raise DimensionMismatch(f"Control horizon {Nc} must lie in [1, {Np}]")
    n, m = models[0].n, models[0].m
    for model in models:
        if model.Ad.shape != (n, n) or model.Bd.shape != (n, m):
            raise DimensionMismatch("Model dimensions vary along the horizon")

    Astar = np.zeros((n * Np, n))
    Bbar = np.zeros((n * Np, m * Np))
    chain = np.eye(n)
    for i, model in enumerate(models):
        chain = model.Ad @ chain
        Astar[i * n:(i + 1) * n, :] = chain
        Bbar[i * n:(i + 1) * n, i * m:(i + 1) * m] = model.Bd
        for j in range(i):
            prev = Bbar[(i - 1) * n:i * n, j * m:(j + 1) * m]
            Bbar[i * n:(i + 1) * n, j * m:(j + 1) * m] = model.Ad @ prev

    Lambda = np.kron(np.ones((Nc, 1)), np.eye(m))
    Gamma = np.kron(np.tril(np.ones((Nc, Nc))), np.eye(m))
    return PredictionOperators(Astar=Astar, Bbar=Bbar, Bstar=Bbar[:, :m * Nc].copy(),
                               Lambda=Lambda, Gamma=Gamma, Np=Np, Nc=Nc)


def sampling_block(ws: Sequence[float], accel_signs: Sequence[float], input_signs: Sequence[float],
                   rng: np.random.Generator) -> np.ndarray:
    """Diagonal sampling correction r * diag(ws) * diag(accel_signs) * diag(input_signs).

    One uniform draw r in [0, 1) is taken per call, even when ws is zero, so
    the stream position does not depend on the mode.
    """
    r = rng.random()
    diagonal = r * np.asarray(ws, dtype=float) * np.asarray(accel_signs, dtype=float) \
        * np.asarray(input_signs, dtype=float)
    return np.diag(diagonal)


def sampling_matrix(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal W* from per-step blocks."""
    return block_diag(*blocks)


def assemble_cost(ops: PredictionOperators, x_k: np.ndarray, u_prev: np.ndarray, xd_star: np.ndarray,
                  Qt: np.ndarray, Pt: np.ndarray) -> CondensedCost:
    """Condensed cost 0.5 du' H du + f' du + c0 of the tracking objective.

    Args:
        ops: Prediction operators, with or without a sampling matrix
        x_k: Current state
        u_prev: Input applied at the previous step
        xd_star: Stacked desired states (n*Np)
        Qt: Block-diagonal state weight (n*Np square)
        Pt: Block-diagonal increment weight (m*Nc square)

    Returns:
        CondensedCost with the tracking offset E attached
    """
    x_k = np.asarray(x_k, dtype=float)
    u_prev = np.asarray(u_prev, dtype=float)
    xd_star = np.asarray(xd_star, dtype=float).ravel()
    nN = ops.n * ops.Np
    mN = ops.m * ops.Nc
    if xd_star.shape[0] != nN or Qt.shape != (nN, nN) or Pt.shape != (mN, mN):
        raise DimensionMismatch(
            f"Cost shapes: xd {xd_star.shape}, Qt {Qt.shape}, Pt {Pt.shape} for n*Np={nN}, m*Nc={mN}")
    if x_k.shape[0] != ops.n or u_prev.shape[0] != ops.m:
        raise DimensionMismatch(f"State {x_k.shape} or input {u_prev.shape} does not match operators")

    E = xd_star - ops.free_response(x_k, u_prev)
    M = ops.increment_map
    QM = Qt @ M
    H = 2.0 * (M.T @ QM + Pt)
    H = 0.5 * (H + H.T)
    f = -2.0 * QM.T @ E
    c0 = float(E @ Qt @ E)
    return CondensedCost(H=H, f=f, c0=c0, E=E)


def horizon_weights(Q: np.ndarray, P: np.ndarray, Np: int, Nc: int) -> Tuple[np.ndarray, np.ndarray]:
    """Block-diagonal Qt (Np copies of Q) and Pt (Nc copies of P)."""
    return np.kron(np.eye(Np), Q), np.kron(np.eye(Nc), P)


def shift_plan(plan: Optional[np.ndarray], u_prev: np.ndarray, Np: int) -> np.ndarray:
    """Previous absolute input plan advanced one step, last input repeated to fill Np rows."""
    if plan is None or len(plan) == 0:
        return np.tile(np.asarray(u_prev, dtype=float), (Np, 1))
    shifted = list(plan[1:]) or [plan[-1]]
    while len(shifted) < Np:
        shifted.append(shifted[-1])
    return np.array(shifted[:Np], dtype=float)


def nominal_models(jacobians: JacobianFn, x_k: np.ndarray, plan: np.ndarray, Ts: float,
                   frozen: bool = False) -> Tuple[List[DiscreteModel], np.ndarray]:
    """Models along a nominal rollout of the piecewise-affine model.

    Each step re-linearizes at the nominal state and advances it with the
    resulting discrete model. With `frozen` the model at x_k is used for
    every step. A guard violation along the rollout keeps the last valid model.

    Args:
        jacobians: x -> (Ac, Bc)
        x_k: Current state
        plan: Absolute inputs for each horizon step (Np x m)
        Ts: Sampling interval (s)
        frozen: Reuse the model at x_k for the whole horizon

    Returns:
        Tuple (models k..k+Np-1, nominal states k..k+Np as an (Np+1) x n array)
    """
    x = np.asarray(x_k, dtype=float)
    first = discretize(*jacobians(x), Ts)
    models = []
    states = [x]
    model = first
    for i, u in enumerate(plan):
        if i > 0 and not frozen:
            try:
                model = discretize(*jacobians(x), Ts)
            except (DynamicsError, NonFinite) as e:
                logger.debug(f"Nominal rollout guard at horizon step {i}: {e}; keeping previous model")
        models.append(model)
        x = model.Ad @ x + model.Bd @ u
        states.append(x)
    return models, np.array(states)


def input_signs(xd_next: np.ndarray, x_now: np.ndarray, channels: Sequence[int] = (0, 1, 2)) -> np.ndarray:
    """sign(x_d(k+1) - x(k)) on the driven channels."""
    idx = list(channels)
    return np.sign(np.asarray(xd_next, dtype=float)[idx] - np.asarray(x_now, dtype=float)[idx])
