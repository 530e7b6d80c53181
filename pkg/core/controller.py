"""
Sampling-Based PWA MPC Controllers

One receding-horizon controller per axis: relative position in the LOS
frame and chaser attitude. Each step re-linearizes along a nominal plan,
attaches the sampling correction, condenses the cost, stacks the
constraint rows and solves one QP for the input increments.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from models import (ConstraintFamily, ConstraintParams, InertiaParams, LinearInequalities, MpcTuning,
                    OrbitState, PredictionOperators, QpProblem, QpSolution, QpStatus, WarmStart)
from . import constraints as cons
from .attitude import attitude_jacobians, attitude_rhs
from .errors import QpInfeasible
from .orbit_los import los_jacobians, los_rhs
from .prediction import (assemble_cost, build_operators, horizon_weights, nominal_models, sampling_block,
                         sampling_matrix, shift_plan)
from .qp_solver import ActiveSetSolver, dump_problem, shift_increments


@dataclass
class ControlResult:
    """Outcome of one controller step."""
    u: np.ndarray
    du: np.ndarray
    status: QpStatus
    iterations: int
    predicted: np.ndarray
    nominal: np.ndarray
    inequalities: LinearInequalities
    solution: QpSolution
    sampling_diag: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def relaxed(self) -> bool:
        return self.status is QpStatus.RELAXED_OPTIMAL


class PwaMpcController:
    """Shared receding-horizon machinery; subclasses supply the model and the state constraints."""

    label = "controller"

    def __init__(self, tuning: MpcTuning, umax: Sequence[float], rng: np.random.Generator,
                 solver: Optional[ActiveSetSolver] = None, slack_weight: float = 1e6):
        """Initialize the controller.

        Args:
            tuning: Horizons, weights and sampling factors
            umax: Per-axis input limit
            rng: Generator consumed once per sampling block
            solver: QP solver; a default ActiveSetSolver when None
            slack_weight: Penalty on relaxed soft rows
        """
        self.tuning = tuning
        self.umax = np.asarray(umax, dtype=float)
        self.rng = rng
        self.solver = solver or ActiveSetSolver()
        self.slack_weight = slack_weight
        self.logger = logging.getLogger(__name__)
        self._plan: Optional[np.ndarray] = None
        self._warm = WarmStart()

    # Model hooks
    def jacobians(self, x: np.ndarray):
        raise NotImplementedError

    def accelerations(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state_inequalities(self, ops: PredictionOperators, x_k: np.ndarray, u_prev: np.ndarray,
                           xd: np.ndarray, context: Dict) -> List[LinearInequalities]:
        return []

    def weight_rho(self, x_k: np.ndarray) -> float:
        return 1.0

    # Pipeline
    def reset(self) -> None:
        self._plan = None
        self._warm = WarmStart()

    def sampling_operator(self, x_k: np.ndarray, u_prev: np.ndarray, xd: np.ndarray,
                          nominal: np.ndarray) -> np.ndarray:
        """Block-diagonal W* for the control horizon.

        Acceleration signs come from the nonlinear model at the current state;
        input signs compare the next desired state with the nominal state.
        """
        accel_signs = np.sign(self.accelerations(x_k, u_prev))
        blocks = []
        for i in range(self.tuning.Nc):
            signs = np.sign(xd[i, :3] - nominal[i, :3])
            blocks.append(sampling_block(self.tuning.ws, accel_signs, signs, self.rng))
        return sampling_matrix(blocks)

    def step(self, k: int, x_k: np.ndarray, xd: np.ndarray, u_prev: np.ndarray,
             context: Optional[Dict] = None, dump_dir: Optional[Path] = None) -> ControlResult:
        """Compute the input for control step k.

        Args:
            k: Step index
            x_k: Current state
            xd: Desired states x_d(k+1) .. x_d(k+Np), shape (Np, n)
            u_prev: Input applied at step k-1
            context: Extra data for the state constraints
            dump_dir: Directory for a flat-text dump of this step's QP

        Returns:
            ControlResult with the clipped input to apply
        """
        tuning = self.tuning
        context = context or {}
        x_k = np.asarray(x_k, dtype=float)
        u_prev = np.asarray(u_prev, dtype=float)
        xd = np.asarray(xd, dtype=float)

        first = self._plan is None
        plan = shift_plan(self._plan, u_prev, tuning.Np)
        models, nominal = nominal_models(self.jacobians, x_k, plan, tuning.Ts, frozen=first)
        ops = build_operators(models, tuning.Nc)
        W = self.sampling_operator(x_k, u_prev, xd, nominal)
        ops.Wstar = W

        Qt, Pt = horizon_weights(tuning.q_matrix(self.weight_rho(x_k)), tuning.p_matrix(), tuning.Np, tuning.Nc)
        cost = assemble_cost(ops, x_k, u_prev, xd.ravel(), Qt, Pt)
        rows = cons.stack([cons.input_ineq(ops.Lambda, ops.Gamma, u_prev, self.umax, tuning.Nc),
                           *self.state_inequalities(ops, x_k, u_prev, xd, context)])
        soft = [i for i, label in enumerate(rows.labels) if label.is_soft]
        problem = QpProblem(H=cost.H, f=cost.f, G=rows.G, g=rows.g, soft_rows=soft,
                            slack_weight=self.slack_weight)
        if dump_dir is not None:
            dump_problem(problem, Path(dump_dir) / f"{self.label}_step{k:05d}.txt", label=self.label)

        solution = self.solver.solve(problem, self._warm)
        if solution.status is QpStatus.INFEASIBLE:
            self.logger.error(f"{self.label} QP infeasible on hard rows at step {k}")
            raise QpInfeasible(self.label, k)
        if solution.relaxed:
            self.logger.warning(f"{self.label} QP relaxed at step {k}")

        du = solution.z
        m = ops.m
        increments = du.reshape(tuning.Nc, m)
        absolute = u_prev + np.cumsum(increments, axis=0)
        self._plan = np.vstack([absolute, np.tile(absolute[-1], (tuning.Np - tuning.Nc, 1))])
        self._warm = WarmStart(z=shift_increments(du, m), active_set=rows.shift_back(solution.active_set))

        u = np.clip(absolute[0], -self.umax, self.umax)
        return ControlResult(u=u, du=du, status=solution.status, iterations=solution.iterations,
                             predicted=ops.predict(x_k, u_prev, du), nominal=nominal, inequalities=rows,
                             solution=solution, sampling_diag=np.diag(W).copy())


class PositionController(PwaMpcController):
    """LOS translation controller with keep-out and entry-cone rows."""

    label = "position"

    def __init__(self, tuning: MpcTuning, limits: ConstraintParams, rng: np.random.Generator,
                 solver: Optional[ActiveSetSolver] = None, slack_weight: float = 1e6):
        super().__init__(tuning, limits.umax_p, rng, solver, slack_weight)
        self.limits = limits
        self.orbit: Optional[OrbitState] = None

    def update_orbit(self, orbit: OrbitState) -> None:
        self.orbit = orbit

    def jacobians(self, x):
        return los_jacobians(x, self.orbit)

    def accelerations(self, x, u):
        return los_rhs(x, u, self.orbit)[1]

    def weight_rho(self, x_k):
        return float(x_k[0])

    def state_inequalities(self, ops, x_k, u_prev, xd, context):
        # elevation centre is the true target pitch, azimuth centre the desired beta on its branch
        theta_t = np.asarray(context.get("theta_t", xd[:, 1]), dtype=float)
        return [
            cons.collision_ineq(ops, x_k, u_prev, self.limits.r_safe),
            cons.cone_ineq(ops, x_k, u_prev, theta_t, -xd[:, 2], self.limits.gamma_e),
        ]


class AttitudeController(PwaMpcController):
    """Chaser attitude controller with field-of-view rows driven by the position plan."""

    label = "attitude"

    def __init__(self, tuning: MpcTuning, limits: ConstraintParams, inertia: InertiaParams,
                 rng: np.random.Generator, solver: Optional[ActiveSetSolver] = None, slack_weight: float = 1e6):
        super().__init__(tuning, limits.umax_a, rng, solver, slack_weight)
        self.limits = limits
        self.inertia = inertia

    def jacobians(self, x):
        return attitude_jacobians(x, self.inertia)

    def accelerations(self, x, u):
        return attitude_rhs(x, u, self.inertia, self.tuning.Ts)[1]

    def yaw_centres(self, beta: np.ndarray, psi_ref: np.ndarray) -> np.ndarray:
        """Nominal azimuth expressed on the same 2*pi branch as the yaw reference, before the sign."""
        sign = self.limits.fov_yaw_sign
        centre = sign * np.asarray(beta, dtype=float)
        centre = centre + 2.0 * math.pi * np.round((np.asarray(psi_ref, dtype=float) - centre) / (2.0 * math.pi))
        return centre * sign

    def state_inequalities(self, ops, x_k, u_prev, xd, context):
        if "eps" not in context or "beta" not in context:
            return []
        beta = self.yaw_centres(context["beta"], xd[:, 2])
        roll_window = context.get("roll_window", (-math.pi, math.pi))
        return [cons.fov_ineq(ops, x_k, u_prev, context["eps"], beta, self.limits.gamma_f,
                              yaw_sign=self.limits.fov_yaw_sign, roll_window=roll_window)]


def relaxed_families(result: ControlResult, tol: float = 1e-8) -> List[ConstraintFamily]:
    """Families whose rows carried a positive slack in a relaxed solve."""
    if result.solution.slack is None:
        return []
    soft = [label for label in result.inequalities.labels if label.is_soft]
    return sorted({soft[i] for i, s in enumerate(result.solution.slack) if s > tol}, key=lambda f: f.value)
