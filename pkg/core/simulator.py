"""
Closed-Loop Simulator

Runs the position and attitude controllers against the nonlinear plants
for one scenario and records one StepRecord per control step.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from models import RunMode, Scenario, StepRecord, TrajectoryLog
from utils.logger import ContextLogger, performance_log
from .angle_wrap import AngleWrapper
from .attitude import attitude_derivative, check_pitch
from .constraints import pose_margins, wrap_to_pi
from .controller import AttitudeController, PositionController
from .errors import DynamicsError, QpInfeasible
from .orbit_los import (check_los_guards, initial_orbit_state, los_derivative, los_to_lvlh, propagate_orbit,
                        rk4_step)
from .qp_solver import ActiveSetSolver
from .scenario import scenario_fingerprint
from .target_motion import TargetTrajectory, current_pose, desired_horizon

POSITION_AXIS = 0
ATTITUDE_AXIS = 1


def _fit(values: np.ndarray, length: int) -> np.ndarray:
    """Truncate, or pad with the last entry, to the requested length."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] >= length:
        return values[:length]
    return np.concatenate([values, np.full(length - values.shape[0], values[-1])])


class ClosedLoopSimulator:
    """Owns the plants, both controllers and the wrap channels of one run."""

    def __init__(self, scenario: Scenario, solver_options: Optional[Dict] = None,
                 dump_dir: Optional[Union[str, Path]] = None):
        """Initialize the simulator.

        Args:
            scenario: Validated scenario
            solver_options: tol, max_iter and slack_weight; defaults from the settings file
            dump_dir: Directory receiving the first step's QP problems
        """
        self.scenario = scenario
        self.dump_dir = Path(dump_dir) if dump_dir is not None else None
        options = dict(settings.solver_options())
        options.update(solver_options or {})

        self.logger = ContextLogger(__name__, {"mode": scenario.mode.value, "seed": scenario.seed})
        solver = ActiveSetSolver(tol=options["tol"], max_iter=options["max_iter"])

        tuning_p = scenario.effective_tuning("position")
        tuning_a = scenario.effective_tuning("attitude")
        self.position = PositionController(
            tuning_p, scenario.limits,
            np.random.default_rng([scenario.seed, tuning_p.seed, POSITION_AXIS]),
            solver=solver, slack_weight=options["slack_weight"])
        self.attitude = AttitudeController(
            tuning_a, scenario.limits, scenario.inertia,
            np.random.default_rng([scenario.seed, tuning_a.seed, ATTITUDE_AXIS]),
            solver=solver, slack_weight=options["slack_weight"])

        self.target = TargetTrajectory(scenario.target, scenario.Ts)
        self.wrapper = AngleWrapper(scenario.wrap_delta)
        self.attitude_rhs = attitude_derivative(scenario.inertia, scenario.Ts)

    def _reference(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Desired LOS and attitude horizons x_d(k) .. x_d(k+Np), one row per instant."""
        s = self.scenario
        Np = max(self.position.tuning.Np, self.attitude.tuning.Np)
        now = current_pose(self.target, k, s.rho_d, s.pitch_margin)
        ahead = desired_horizon(self.target, k * s.Ts, Np, rho_d=s.rho_d, pitch_margin=s.pitch_margin)
        XDp = np.vstack([now.x_dp] + [pose.x_dp for pose in ahead])[:self.position.tuning.Np + 1]
        XDa = np.vstack([now.x_da] + [pose.x_da for pose in ahead])[:self.attitude.tuning.Np + 1]
        return XDp, XDa

    def _wrap(self, k: int, x_p: np.ndarray, x_a: np.ndarray, XDp: np.ndarray, XDa: np.ndarray) -> None:
        """Bring plant angles and references into one representation, in place."""
        if not self.scenario.singularity_free:
            x_p[2] = wrap_to_pi(x_p[2])
            x_a[0] = wrap_to_pi(x_a[0])
            x_a[2] = wrap_to_pi(x_a[2])
            return

        for name, x, XD, index in (("beta", x_p, XDp, 2), ("phi", x_a, XDa, 0), ("psi", x_a, XDa, 2),
                                   ("eps", x_p, XDp, 1), ("theta", x_a, XDa, 1)):
            x[index], XD[:, index] = self.wrapper.apply(name, k, float(x[index]), XD[:, index])

    def _roll_window(self, XDa: np.ndarray) -> Tuple[float, float]:
        """Roll bounds covering [-pi, pi] and whatever branch the shifted reference occupies."""
        if not self.scenario.singularity_free:
            return -math.pi, math.pi
        delta = self.scenario.wrap_delta
        lo = min(-math.pi, float(np.min(XDa[:, 0]))) - delta
        hi = max(math.pi, float(np.max(XDa[:, 0]))) + delta
        return lo, hi

    def _cone_pitch(self, k: int, XDp: np.ndarray, raw_eps: np.ndarray) -> np.ndarray:
        """Unclipped target pitch over the position horizon, on the branch of the wrapped elevation."""
        Np = self.position.tuning.Np
        theta = np.array([self.target.attitude(k + i)[1] for i in range(1, Np + 1)])
        return theta + (XDp[1:, 1] - raw_eps[1:])

    def run(self) -> TrajectoryLog:
        """Simulate the whole scenario.

        Returns:
            TrajectoryLog with one record per control step

        Raises:
            DynamicsError: a plant state left the admissible region
            QpInfeasible: a controller's hard rows admitted no point
        """
        s = self.scenario
        Ts = s.Ts
        log = TrajectoryLog(scenario_key=scenario_fingerprint(s), mode=s.mode.value, seed=s.seed, Ts=Ts)

        x_p = s.x0_p.to_array()
        x_a = s.x0_a.to_array()
        u_p = np.zeros(3)
        u_a = np.zeros(3)
        orb = initial_orbit_state(s.orbit)
        self.position.reset()
        self.attitude.reset()

        self.logger.info(f"Starting closed-loop run: {s.steps} steps of {Ts} s")
        started = time.perf_counter()
        k = 0
        try:
            check_los_guards(x_p)
            check_pitch(x_a[1], "chaser pitch")
            for k in range(s.steps):
                XDp, XDa = self._reference(k)
                raw_eps = XDp[:, 1].copy()
                self._wrap(k, x_p, x_a, XDp, XDa)
                roll_window = self._roll_window(XDa)
                dump = self.dump_dir if k == 0 else None

                self.position.update_orbit(orb)
                res_p = self.position.step(k, x_p, XDp[1:], u_p,
                                           context={"theta_t": self._cone_pitch(k, XDp, raw_eps)}, dump_dir=dump)

                Np_a = self.attitude.tuning.Np
                context = {
                    "eps": _fit(res_p.predicted[:, 1], Np_a),
                    "beta": _fit(res_p.predicted[:, 2], Np_a),
                    "roll_window": roll_window,
                }
                res_a = self.attitude.step(k, x_a, XDa[1:], u_a, context=context, dump_dir=dump)
                u_p, u_a = res_p.u, res_a.u

                target_att = self.target.attitude(k)
                log.records.append(StepRecord(
                    t=k * Ts,
                    x_p=x_p.copy(), x_a=x_a.copy(),
                    x_dp=XDp[0].copy(), x_da=XDa[0].copy(),
                    u_p=u_p.copy(), u_a=u_a.copy(),
                    lvlh=los_to_lvlh(x_p), lvlh_d=los_to_lvlh(XDp[0]),
                    target_att=np.asarray(target_att, dtype=float).copy(),
                    margins=pose_margins(x_p, x_a, u_p, u_a, target_att, s.limits, roll_window=roll_window),
                    qp_status_p=res_p.status.value, qp_iter_p=res_p.iterations,
                    qp_status_a=res_a.status.value, qp_iter_a=res_a.iterations,
                    wrap_events=self.wrapper.drain_events(),
                ))

                x_p = rk4_step(los_derivative(orb), x_p, u_p, Ts)
                x_a = rk4_step(self.attitude_rhs, x_a, u_a, Ts)
                orb = propagate_orbit(s.orbit, orb, Ts)
                check_los_guards(x_p)
                check_pitch(x_a[1], "chaser pitch")
        except (DynamicsError, QpInfeasible) as e:
            self.logger.error(f"Run aborted at step {k} (t={k * Ts:.1f} s): {e}")
            raise

        elapsed = time.perf_counter() - started
        relaxed = sum(1 for r in log.records if r.relaxed)
        self.logger.info(f"Run finished: {len(log)} records, {len(log.wrap_events)} wrap resets, "
                         f"{relaxed} relaxed steps")
        performance_log("closed_loop_run", elapsed,
                        {"steps": len(log), "mode": s.mode.value, "seed": s.seed, "relaxed_steps": relaxed})
        return log


def run_closed_loop(scenario: Scenario, dump_dir: Optional[Union[str, Path]] = None,
                    solver_options: Optional[Dict] = None) -> TrajectoryLog:
    """Simulate one scenario and return its trajectory log."""
    return ClosedLoopSimulator(scenario, solver_options=solver_options, dump_dir=dump_dir).run()


def run_seeds(scenario: Scenario, seeds: Sequence[int], modes: Sequence[RunMode] = (RunMode.SAMPLING,),
              jobs: int = 1) -> Dict[RunMode, List[TrajectoryLog]]:
    """Run a scenario for every (mode, seed) pair.

    Args:
        scenario: Base scenario; its mode and seed are overridden
        seeds: Seeds to run
        modes: Controller variants to run
        jobs: Worker processes; 1 runs sequentially in this process

    Returns:
        Logs per mode, ordered like `seeds`
    """
    variants = [scenario.with_mode(mode).with_seed(seed) for mode in modes for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            logs = list(pool.map(run_closed_loop, variants))
    else:
        logs = [run_closed_loop(variant) for variant in variants]

    results: Dict[RunMode, List[TrajectoryLog]] = {}
    for variant, log in zip(variants, logs):
        results.setdefault(variant.mode, []).append(log)
    return results
