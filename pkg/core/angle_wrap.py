"""
Singularity-Free Angle Tracking

Keeps a wrapped angle channel and its reference horizon in one consistent
representation while either of them crosses the singular value +/-n_x*pi.
Resets and reference shifts are exact multiples of 2*n_x*pi, so the
physical pose never changes.
"""

import logging
import math
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models import Direction, PendingShift, WrapChannel, WrapEvent
from .errors import PitchSingularity

logger = logging.getLogger(__name__)

_PENDING_SIGN = {PendingShift.NONE: 0, PendingShift.PLUS: 1, PendingShift.MINUS: -1}
_SIGN_PENDING = {0: PendingShift.NONE, 1: PendingShift.PLUS, -1: PendingShift.MINUS}


def carry_error(ch: WrapChannel, x_before_reset: float, xd_before_reset: float) -> WrapChannel:
    """Store the tracking error at a reset as the next period's initial error."""
    return replace(ch, carried_error=float(xd_before_reset - x_before_reset))


def _rising_step(x: float, h: np.ndarray, pending: int, S: float, delta: float):
    """One step for an increasing reference, in a frame where the singular value is +S.

    Returns (x', h', pending', branch, (x_before, xd_before) or None).
    """
    threshold = S - delta
    period = 2.0 * S
    branch = None
    reset = None

    if pending == 0:
        if x >= threshold:
            # state reached the singular value first
            reset = (x, h[0])
            x = x - period
            pending = -1
            branch = "state_first"
        elif h[0] >= threshold:
            pending = 1

    if pending == 1 and branch is None:
        shifted = np.where(h < x - S, h + period, h)
        if x >= threshold:
            reset = (x, shifted[0])
            x = x - period
            pending = -1
            branch = "reference_first"
        else:
            h = shifted

    if pending == -1:
        behind = h > x + S
        if np.any(behind):
            h = np.where(behind, h - period, h)
        elif branch is None:
            pending = 0

    return x, h, pending, branch, reset


def _wrap(ch: WrapChannel, x: float, xd_horizon: Sequence[float],
          xd_direction: Direction) -> Tuple[float, np.ndarray, WrapChannel, Optional[str]]:
    h = np.asarray(xd_horizon, dtype=float)
    if h.size == 0 or not np.isfinite(x) or not np.all(np.isfinite(h)):
        return x, h, ch, None

    S = ch.singular_value
    if ch.n_x < 1.0:
        if abs(x) >= S - ch.delta or abs(h[0]) >= S - ch.delta:
            raise PitchSingularity(
                f"Channel '{ch.name}' with range +/-{S:.6f} rad reached its singular value "
                f"(x={x:.6f}, xd={h[0]:.6f})")
        return x, h, replace(ch, direction=xd_direction), None

    h = np.unwrap(h, period=ch.period)
    pending = _PENDING_SIGN[ch.pending_shift]
    if xd_direction is not ch.direction and pending != 0:
        logger.warning(f"Reference direction of '{ch.name}' flipped with a pending "
                       f"{ch.pending_shift.value} shift; shift cancelled")
        pending = 0
        ch = replace(ch, pending_shift=PendingShift.NONE)

    if xd_direction is Direction.INCREASING:
        x_new, h_new, pending, branch, reset = _rising_step(x, h, pending, S, ch.delta)
    else:
        x_m, h_m, pending_m, branch, reset = _rising_step(-x, -h, -pending, S, ch.delta)
        x_new, h_new, pending = -x_m, -h_m, -pending_m
        if reset is not None:
            reset = (-reset[0], -reset[1])

    ch = replace(ch, pending_shift=_SIGN_PENDING[pending], direction=xd_direction)
    if reset is not None:
        ch = carry_error(ch, reset[0], reset[1])
        suffix = "increasing" if xd_direction is Direction.INCREASING else "decreasing"
        branch = f"{branch}_{suffix}"
    return x_new, h_new, ch, branch


def wrap_step(ch: WrapChannel, x: float, xd_horizon: Sequence[float],
              xd_direction: Direction) -> Tuple[float, np.ndarray, WrapChannel]:
    """Advance one wrap channel by one control step.

    Args:
        ch: Channel state
        x: Current angle in the channel's representation (rad)
        xd_horizon: Desired values x_d(k), x_d(k+1), ... (rad)
        xd_direction: Monotone direction of the desired signal

    Returns:
        Tuple (x', shifted horizon, updated channel)
    """
    x_new, h_new, ch_new, _ = _wrap(ch, x, xd_horizon, xd_direction)
    return x_new, h_new, ch_new


def reference_direction(xd_horizon: Sequence[float], period: float, previous: Direction) -> Direction:
    """Direction of the desired signal from its first two samples; ties keep the previous direction."""
    h = np.unwrap(np.asarray(xd_horizon, dtype=float), period=period)
    if h.size < 2 or h[1] == h[0]:
        return previous
    return Direction.INCREASING if h[1] > h[0] else Direction.DECREASING


class AngleWrapper:
    """Owns the wrap channels of one closed-loop run and collects reset events."""

    def __init__(self, delta: float = math.radians(0.5)):
        """Initialize the wrapper with the standard channels.

        Args:
            delta: Neighbourhood width around the singular values (rad)
        """
        self.logger = logging.getLogger(__name__)
        self.channels: Dict[str, WrapChannel] = {
            "beta": WrapChannel(name="beta", n_x=1.0, delta=delta),
            "phi": WrapChannel(name="phi", n_x=1.0, delta=delta),
            "psi": WrapChannel(name="psi", n_x=1.0, delta=delta),
            "eps": WrapChannel(name="eps", n_x=0.5, delta=delta),
            "theta": WrapChannel(name="theta", n_x=0.5, delta=delta),
        }
        self.events: List[WrapEvent] = []

    def apply(self, name: str, step: int, x: float, xd_horizon: Sequence[float]) -> Tuple[float, np.ndarray]:
        """Wrap one channel for control step `step`.

        Args:
            name: Channel name
            step: Control step index
            x: Current plant angle (rad)
            xd_horizon: Desired horizon starting at x_d(k)

        Returns:
            Tuple (angle to write back into the plant, desired horizon to track)
        """
        ch = self.channels[name]
        direction = reference_direction(xd_horizon, ch.period, ch.direction)
        x_new, h_new, ch_new, branch = _wrap(ch, x, xd_horizon, direction)
        self.channels[name] = ch_new
        if branch is not None:
            event = WrapEvent(step=step, channel=name, branch=branch, carried_error=ch_new.carried_error)
            self.events.append(event)
            self.logger.info(f"Wrap reset on '{name}' at step {step} ({branch}), "
                             f"carried error {math.degrees(ch_new.carried_error):.4f} deg")
        return x_new, h_new

    def pending(self, name: str) -> PendingShift:
        return self.channels[name].pending_shift

    def drain_events(self) -> List[WrapEvent]:
        """Return and clear the events collected since the last call."""
        events, self.events = self.events, []
        return events
