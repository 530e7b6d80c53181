"""
Angle Wrap Models

Per-channel state of the singularity-free tracking logic.
"""

import math
from dataclasses import dataclass
from enum import Enum


class PendingShift(Enum):
    """Reference shift currently held by a channel."""
    NONE = "none"
    PLUS = "plus"
    MINUS = "minus"


class Direction(Enum):
    """Monotone direction of the desired signal."""
    INCREASING = "increasing"
    DECREASING = "decreasing"


@dataclass(frozen=True)
class WrapChannel:
    """One wrapped angle channel: x in [-n_x*pi, n_x*pi]."""
    name: str = "yaw"
    n_x: float = 1.0
    delta: float = math.radians(0.5)
    pending_shift: PendingShift = PendingShift.NONE
    carried_error: float = 0.0
    direction: Direction = Direction.INCREASING

    @property
    def singular_value(self) -> float:
        return self.n_x * math.pi

    @property
    def period(self) -> float:
        return 2.0 * self.n_x * math.pi


@dataclass(frozen=True)
class WrapEvent:
    """A state reset emitted into the trajectory log."""
    step: int
    channel: str
    branch: str
    carried_error: float
