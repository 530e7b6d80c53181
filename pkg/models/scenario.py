"""
Scenario and Trajectory Models

Experiment description, per-step log records, metrics and comparison report.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from .attitude import AttitudeState, InertiaParams
from .mpc import ConstraintParams, MpcTuning
from .orbit import LosState, OrbitParams
from .target import TargetMotion
from .wrap import WrapEvent


class RunMode(Enum):
    """Controller variant."""
    SAMPLING = "sampling"
    STANDARD = "standard"


TRACKING_CHANNELS = ("rho", "eps", "beta", "phi", "theta", "psi")
ANGLE_CHANNELS = ("eps", "beta", "phi", "theta", "psi")
MARGIN_KEYS = ("input_p", "collision", "cone_eps", "cone_beta",
               "input_a", "fov_roll", "fov_pitch", "fov_yaw")


@dataclass(frozen=True)
class Scenario:
    """Full experiment description."""
    orbit: OrbitParams
    inertia: InertiaParams
    target: TargetMotion
    tuning_p: MpcTuning
    tuning_a: MpcTuning
    limits: ConstraintParams
    x0_p: LosState
    x0_a: AttitudeState
    duration: float = 500.0
    mode: RunMode = RunMode.SAMPLING
    seed: int = 0
    rho_d: float = 6.0
    wrap_delta: float = np.deg2rad(0.5)
    singularity_free: bool = True
    pitch_margin: float = np.deg2rad(5.0)

    @property
    def Ts(self) -> float:
        return self.tuning_p.Ts

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.Ts))

    def effective_tuning(self, axis: str) -> MpcTuning:
        """Tuning of the 'position' or 'attitude' controller; standard mode zeroes the sampling factors."""
        tuning = self.tuning_p if axis == "position" else self.tuning_a
        if self.mode is RunMode.STANDARD:
            tuning = replace(tuning, ws=(0.0, 0.0, 0.0))
        return tuning

    def with_mode(self, mode: RunMode) -> 'Scenario':
        return replace(self, mode=mode)

    def with_seed(self, seed: int) -> 'Scenario':
        return replace(self, seed=seed)

    def with_duration(self, duration: float) -> 'Scenario':
        return replace(self, duration=duration)


@dataclass
class StepRecord:
    """One control step of the closed loop."""
    t: float
    x_p: np.ndarray
    x_a: np.ndarray
    x_dp: np.ndarray
    x_da: np.ndarray
    u_p: np.ndarray
    u_a: np.ndarray
    lvlh: np.ndarray
    lvlh_d: np.ndarray
    target_att: np.ndarray
    margins: Dict[str, float] = field(default_factory=dict)
    qp_status_p: str = "optimal"
    qp_iter_p: int = 0
    qp_status_a: str = "optimal"
    qp_iter_a: int = 0
    wrap_events: List[WrapEvent] = field(default_factory=list)

    @property
    def relaxed(self) -> bool:
        return "relaxed_optimal" in (self.qp_status_p, self.qp_status_a)

    def tracking_error(self) -> Dict[str, float]:
        """Desired minus actual per channel, angles wrapped to [-pi, pi]."""
        diff_p = self.x_dp[:3] - self.x_p[:3]
        diff_a = self.x_da[:3] - self.x_a[:3]
        raw = dict(zip(TRACKING_CHANNELS, np.concatenate([diff_p, diff_a])))
        for name in ANGLE_CHANNELS:
            raw[name] = float((raw[name] + np.pi) % (2 * np.pi) - np.pi)
        raw["rho"] = float(raw["rho"])
        return raw


@dataclass
class TrajectoryLog:
    """Per-step records of one closed-loop run."""
    scenario_key: str = ""
    mode: str = RunMode.SAMPLING.value
    seed: int = 0
    Ts: float = 0.1
    records: List[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def wrap_events(self) -> List[WrapEvent]:
        return [event for r in self.records for event in r.wrap_events]

    def errors(self, channel: str) -> np.ndarray:
        if channel == "lvlh":
            return np.array([np.linalg.norm(r.lvlh_d - r.lvlh) for r in self.records])
        return np.array([r.tracking_error()[channel] for r in self.records])


@dataclass
class Metrics:
    """Performance quantities extracted from a trajectory log."""
    convergence_time: Dict[str, Optional[float]]
    overshoot: Dict[str, float]
    steady_state_rms: Dict[str, float]
    mean_abs_error: Dict[str, float]
    max_constraint_violation: Dict[str, float]
    reset_count: int
    relaxed_steps: int


@dataclass
class ComparisonRow:
    """One metric/channel line of a mode comparison."""
    metric: str
    channel: str
    mean_a: Optional[float]
    mean_b: Optional[float]
    delta: Optional[float]
    winner: str


@dataclass
class ComparisonReport:
    """Mode comparison across seeds."""
    mode_a: str
    mode_b: str
    seeds: List[int]
    rows: List[ComparisonRow] = field(default_factory=list)
    per_seed_mean_abs_error: Dict[str, Dict[int, Dict[str, float]]] = field(default_factory=dict)
