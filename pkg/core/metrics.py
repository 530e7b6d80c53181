"""
Run Metrics and Mode Comparison

Convergence, overshoot, steady-state and constraint quantities of a
trajectory log, and the sampling-versus-standard comparison table.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import settings
from models import (ComparisonReport, ComparisonRow, MARGIN_KEYS, Metrics, TRACKING_CHANNELS, TrajectoryLog)
from .errors import ScenarioMismatch

logger = logging.getLogger(__name__)

COMPARED_METRICS = ("overshoot", "convergence_time", "mean_abs_error")
STEADY_CHANNELS = TRACKING_CHANNELS + ("lvlh",)


@dataclass(frozen=True)
class Thresholds:
    """Convergence thresholds and metric windows."""
    angle: float = math.radians(0.5)
    range: float = 0.05
    steady_window: float = 100.0
    early_window: float = 20.0

    @classmethod
    def from_settings(cls) -> 'Thresholds':
        return cls(
            angle=math.radians(float(settings.get('metrics.angle_threshold_deg', 0.5))),
            range=float(settings.get('metrics.range_threshold', 0.05)),
            steady_window=float(settings.get('metrics.steady_window', 100.0)),
            early_window=float(settings.get('metrics.early_window', 20.0)),
        )

    def for_channel(self, channel: str) -> float:
        return self.range if channel == "rho" else self.angle


def convergence_time(times: np.ndarray, errors: np.ndarray, threshold: float) -> Optional[float]:
    """First instant after which |error| stays below the threshold to the end of the run; None if never."""
    if times.size == 0:
        return None
    above = np.flatnonzero(np.abs(errors) >= threshold)
    if above.size == 0:
        return float(times[0])
    last = above[-1]
    if last == times.size - 1:
        return None
    return float(times[last + 1])


def overshoot(errors: np.ndarray) -> float:
    """Largest excursion of the error past zero, opposite to the initial error's sign."""
    if errors.size == 0:
        return 0.0
    sign = np.sign(errors[0])
    if sign == 0:
        return float(np.max(np.abs(errors)))
    return float(max(0.0, np.max(-sign * errors)))


def _window(times: np.ndarray, values: np.ndarray, start: float, end: float) -> np.ndarray:
    mask = (times >= start - 1e-9) & (times <= end + 1e-9)
    return values[mask]


def metrics(log: TrajectoryLog, thresholds: Optional[Thresholds] = None) -> Metrics:
    """Compute the performance quantities of one run.

    Args:
        log: Non-empty trajectory log
        thresholds: Convergence thresholds; defaults from the settings file

    Returns:
        Metrics
    """
    if len(log) == 0:
        raise ValueError("Cannot compute metrics of an empty log")
    thresholds = thresholds or Thresholds.from_settings()
    times = log.times
    t_end = float(times[-1])

    conv, over, rms, mae = {}, {}, {}, {}
    for channel in STEADY_CHANNELS:
        errors = log.errors(channel)
        steady = _window(times, errors, t_end - thresholds.steady_window, t_end)
        rms[channel] = float(np.sqrt(np.mean(steady ** 2))) if steady.size else 0.0
        if channel == "lvlh":
            continue
        conv[channel] = convergence_time(times, errors, thresholds.for_channel(channel))
        over[channel] = overshoot(errors)
        early = _window(times, errors, float(times[0]), float(times[0]) + thresholds.early_window)
        mae[channel] = float(np.mean(np.abs(early))) if early.size else 0.0

    violation = {}
    for key in MARGIN_KEYS:
        margins = np.array([r.margins.get(key, math.inf) for r in log.records])
        violation[key] = float(max(0.0, -np.min(margins)))

    return Metrics(
        convergence_time=conv,
        overshoot=over,
        steady_state_rms=rms,
        mean_abs_error=mae,
        max_constraint_violation=violation,
        reset_count=len(log.wrap_events),
        relaxed_steps=sum(1 for r in log.records if r.relaxed),
    )


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    """Mean of the defined values; None when a run never converged."""
    if not values or any(v is None for v in values):
        return None
    return float(np.mean(values))


def _winner(mean_a: Optional[float], mean_b: Optional[float], mode_a: str, mode_b: str) -> str:
    # lower is better for every compared metric; a run that never converged loses
    if mean_a is None and mean_b is None:
        return "none"
    if mean_a is None:
        return mode_b
    if mean_b is None:
        return mode_a
    if math.isclose(mean_a, mean_b, rel_tol=0.0, abs_tol=1e-15):
        return "tie"
    return mode_a if mean_a < mean_b else mode_b


def compare(runs_a: Sequence[TrajectoryLog], runs_b: Sequence[TrajectoryLog], seeds: Sequence[int],
            thresholds: Optional[Thresholds] = None) -> ComparisonReport:
    """Tabulate overshoot, convergence time and early mean |error| for two sets of runs.

    Args:
        runs_a: Logs of the first mode, one per seed
        runs_b: Logs of the second mode, one per seed
        seeds: Seeds the logs were produced with
        thresholds: Convergence thresholds

    Returns:
        ComparisonReport with one row per metric and tracking channel

    Raises:
        ScenarioMismatch: the logs do not share one scenario
    """
    runs_a, runs_b = list(runs_a), list(runs_b)
    if not runs_a or len(runs_a) != len(runs_b) or len(runs_a) != len(seeds):
        raise ScenarioMismatch(f"Expected one log per seed in each mode, got {len(runs_a)} and {len(runs_b)} "
                               f"for {len(seeds)} seeds")
    keys = {log.scenario_key for log in runs_a + runs_b}
    if len(keys) != 1:
        raise ScenarioMismatch(f"Logs come from different scenarios: {sorted(keys)}")

    thresholds = thresholds or Thresholds.from_settings()
    mode_a, mode_b = runs_a[0].mode, runs_b[0].mode
    metrics_a = [metrics(log, thresholds) for log in runs_a]
    metrics_b = [metrics(log, thresholds) for log in runs_b]

    rows: List[ComparisonRow] = []
    for name in COMPARED_METRICS:
        for channel in TRACKING_CHANNELS:
            mean_a = _mean([getattr(m, name)[channel] for m in metrics_a])
            mean_b = _mean([getattr(m, name)[channel] for m in metrics_b])
            delta = None if mean_a is None or mean_b is None else mean_b - mean_a
            rows.append(ComparisonRow(metric=name, channel=channel, mean_a=mean_a, mean_b=mean_b, delta=delta,
                                      winner=_winner(mean_a, mean_b, mode_a, mode_b)))

    per_seed = {
        mode_a: {seed: dict(m.mean_abs_error) for seed, m in zip(seeds, metrics_a)},
        mode_b: {seed: dict(m.mean_abs_error) for seed, m in zip(seeds, metrics_b)},
    }
    logger.info(f"Compared {mode_a} and {mode_b} over {len(seeds)} seeds")
    return ComparisonReport(mode_a=mode_a, mode_b=mode_b, seeds=list(seeds), rows=rows,
                            per_seed_mean_abs_error=per_seed)
