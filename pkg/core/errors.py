"""
Exception hierarchy for the Rendezvous & Docking MPC Simulator

All library errors derive from RvdError so the CLI can map them to exit codes.
"""


class RvdError(Exception):
    """Base exception for simulator errors."""
    pass


class DynamicsError(RvdError):
    """A plant or model guard was violated."""
    pass


class GimbalLock(DynamicsError):
    """Elevation or pitch reached the ±π/2 gimbal-lock guard."""

    def __init__(self, angle: float, label: str = "pitch"):
        self.angle = angle
        self.label = label
        super().__init__(f"Gimbal lock: {label} = {angle:.12g} rad is outside the open interval (-pi/2, pi/2)")


class DegenerateRange(DynamicsError):
    """LOS range is not strictly positive."""

    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(f"Degenerate LOS range: rho = {rho:.12g} m must be > 0")


class PitchSingularity(DynamicsError):
    """A half-range (n_x = 1/2) wrap channel was asked to wrap."""
    pass


class NonFinite(RvdError, ValueError):
    """A numerical input contains NaN or infinite entries."""
    pass


class DimensionMismatch(RvdError, ValueError):
    """Matrix or vector shapes are inconsistent."""
    pass


class NotPositiveDefinite(RvdError):
    """QP Hessian failed its Cholesky factorization."""
    pass


class QpInfeasible(RvdError):
    """Hard QP rows admit no solution during a closed-loop step."""

    def __init__(self, controller: str, step: int):
        self.controller = controller
        self.step = step
        super().__init__(f"{controller} QP infeasible on hard rows at step {step}")


class ScenarioError(RvdError):
    """Scenario file could not be turned into a Scenario."""
    pass


class ParseError(ScenarioError):
    """Scenario file is not well-formed."""

    def __init__(self, message: str, line: int = None, field: str = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class ValidationError(ScenarioError):
    """Scenario value violates an invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioMismatch(RvdError):
    """Logs being compared come from different scenarios."""
    pass


class OutputError(RvdError, OSError):
    """Log or report files could not be written or read."""
    pass
