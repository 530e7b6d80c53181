"""
Scenario Files

Loading, validation and canonical serialization of scenario JSON files.
Angle fields accept a `_deg` suffix; everything is stored in SI radians.
"""

import copy
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from models import (AttitudeState, ConstraintParams, InertiaParams, LosState, MpcTuning, OrbitParams, RunMode,
                    Scenario, TargetKinematics, TargetMode, TargetMotion, MU_EARTH)
from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

SECTIONS = ("orbit", "inertia", "target", "mpc.position", "mpc.attitude", "limits", "initial", "run")

# section -> {key: is_angle}
FIELDS: Dict[str, Dict[str, bool]] = {
    "orbit": {"a": False, "e": False, "f0": True, "mu": False},
    "inertia": {"J": False, "Jw": False},
    "target": {"mode": False, "omega_const": True, "amp": True, "periods": False,
               "initial_attitude": True, "kinematics": False},
    "mpc": {"Np": False, "Nc": False, "Ts": False, "Q": False, "P": False, "ws": False, "seed": False,
            "q_range_scaled": False},
    "limits": {"umax_p": False, "umax_a": False, "r_safe": False, "gamma_e": True, "gamma_f": True,
               "fov_yaw_sign": False},
    "initial.position": {"rho": False, "eps": True, "beta": True, "rho_dot": False, "eps_dot": True,
                         "beta_dot": True},
    "initial.attitude": {"phi": True, "theta": True, "psi": True, "w1": True, "w2": True, "w3": True},
    "run": {"duration": False, "mode": False, "seed": False, "rho_d": False, "wrap_delta": True,
            "singularity_free": False, "pitch_margin": True},
}

POSITION_DEFAULTS = MpcTuning(q_range_scaled=(False, False, False, True, True, True))
ATTITUDE_DEFAULTS = MpcTuning(Q=(30000.0, 30000.0, 30000.0, 3000.0, 3000.0, 3000.0))


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    """1-based line of the first occurrence of a JSON key in the source text."""
    if not text:
        return None
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


class _Reader:
    """Reads one section, converting `_deg` fields and rejecting unknown keys."""

    def __init__(self, section: str, data: Any, text: Optional[str]):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ParseError("section must be an object", line=_line_of(text, section.split(".")[-1]), field=section)
        self.section = section
        self.text = text
        self.schema = FIELDS[section.split(".")[0] if section.startswith("mpc") else section]
        self.values: Dict[str, Any] = {}
        for raw_key, value in data.items():
            key, is_deg = (raw_key[:-4], True) if raw_key.endswith("_deg") else (raw_key, False)
            if key not in self.schema or (is_deg and not self.schema[key]):
                raise ParseError(f"unknown key '{raw_key}'", line=_line_of(text, raw_key),
                                 field=f"{section}.{raw_key}")
            if key in self.values:
                raise ParseError(f"'{key}' given both in radians and degrees", line=_line_of(text, raw_key),
                                 field=f"{section}.{raw_key}")
            self.values[key] = _to_radians(value, f"{section}.{raw_key}") if is_deg else value

    def field(self, key: str) -> str:
        return f"{self.section}.{key}"

    def number(self, key: str, default: float) -> float:
        value = self.values.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(self.field(key), f"expected a number, got {value!r}")
        return float(value)

    def integer(self, key: str, default: int) -> int:
        value = self.values.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(self.field(key), f"expected an integer, got {value!r}")
        return value

    def vector(self, key: str, default: Sequence, length: int) -> Tuple[float, ...]:
        value = self.values.get(key, default)
        if not isinstance(value, (list, tuple)) or len(value) != length:
            raise ValidationError(self.field(key), f"expected a list of {length} numbers, got {value!r}")
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ValidationError(self.field(key), f"expected numbers, got {item!r}")
        return tuple(float(v) for v in value)

    def flags(self, key: str, default: Sequence[bool], length: int) -> Tuple[bool, ...]:
        value = self.values.get(key, default)
        if not isinstance(value, (list, tuple)) or len(value) != length or \
                not all(isinstance(v, bool) for v in value):
            raise ValidationError(self.field(key), f"expected a list of {length} booleans, got {value!r}")
        return tuple(value)

    def choice(self, key: str, default: str, options: Iterable[str]) -> str:
        value = self.values.get(key, default)
        options = list(options)
        if value not in options:
            raise ValidationError(self.field(key), f"expected one of {options}, got {value!r}")
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self.values.get(key, default)
        if not isinstance(value, bool):
            raise ValidationError(self.field(key), f"expected true or false, got {value!r}")
        return value


def _to_radians(value: Any, field: str) -> Any:
    if isinstance(value, bool):
        raise ValidationError(field, f"expected degrees, got {value!r}")
    if isinstance(value, (int, float)):
        return math.radians(value)
    if isinstance(value, (list, tuple)) and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                for v in value):
        return [math.radians(v) for v in value]
    raise ValidationError(field, f"expected degrees, got {value!r}")


def _require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ValidationError(field, message)


def _sections(data: Dict[str, Any], text: Optional[str]) -> Dict[str, Any]:
    """Flatten `mpc: {position, attitude}` and `initial: {position, attitude}` into dotted sections."""
    if not isinstance(data, dict):
        raise ParseError("scenario file must contain a JSON object", line=1)
    out: Dict[str, Any] = {}
    for key, value in data.items():
        if key in ("mpc", "initial"):
            if not isinstance(value, dict):
                raise ParseError("section must be an object", line=_line_of(text, key), field=key)
            for sub, sub_value in value.items():
                if sub not in ("position", "attitude"):
                    raise ParseError(f"unknown subsection '{sub}'", line=_line_of(text, sub), field=f"{key}.{sub}")
                out[f"{key}.{sub}"] = sub_value
        elif key in SECTIONS or key in ("initial.position", "initial.attitude"):
            out[key] = value
        else:
            raise ParseError(f"unknown section '{key}'", line=_line_of(text, key), field=key)
    return out


def _tuning(reader: _Reader, defaults: MpcTuning) -> MpcTuning:
    tuning = MpcTuning(
        Np=reader.integer("Np", defaults.Np),
        Nc=reader.integer("Nc", defaults.Nc),
        Ts=reader.number("Ts", defaults.Ts),
        Q=reader.vector("Q", defaults.Q, 6),
        P=reader.vector("P", defaults.P, 3),
        ws=reader.vector("ws", defaults.ws, 3),
        seed=reader.integer("seed", defaults.seed),
        q_range_scaled=reader.flags("q_range_scaled", defaults.q_range_scaled, 6),
    )
    _require(tuning.Np >= 1, reader.field("Np"), "must be at least 1")
    _require(1 <= tuning.Nc <= tuning.Np, reader.field("Nc"), "must satisfy 1 <= Nc <= Np")
    _require(tuning.Ts > 0, reader.field("Ts"), "must be positive")
    _require(all(q >= 0 for q in tuning.Q), reader.field("Q"), "weights must be nonnegative")
    _require(all(p > 0 for p in tuning.P), reader.field("P"), "weights must be positive")
    _require(all(0.0 <= w <= 1.0 for w in tuning.ws), reader.field("ws"), "sampling factors must lie in [0, 1]")
    return tuning


def scenario_from_dict(data: Dict[str, Any], text: Optional[str] = None) -> Scenario:
    """Build a validated Scenario from a parsed scenario document.

    Args:
        data: Parsed JSON document
        text: Source text, used to report line numbers

    Returns:
        Scenario in SI units
    """
    sections = _sections(data, text)

    def reader(name: str) -> _Reader:
        return _Reader(name, sections.get(name), text)

    r = reader("orbit")
    orbit = OrbitParams(a=r.number("a", 1.0e7), e=r.number("e", 0.3), f0=r.number("f0", 0.0),
                        mu=r.number("mu", MU_EARTH))
    _require(orbit.a > 0, r.field("a"), "semi-major axis must be positive")
    _require(0.0 <= orbit.e < 1.0, r.field("e"), "eccentricity must lie in [0, 1)")
    _require(orbit.mu > 0, r.field("mu"), "gravitational parameter must be positive")

    r = reader("inertia")
    J = r.vector("J", (50.0, 35.0, 40.0), 3)
    Jw = r.vector("Jw", (5.0, 5.0, 5.0), 3)
    _require(all(v > 0 for v in J + Jw), r.field("J"), "moments of inertia must be positive")
    _require(all(w < j for w, j in zip(Jw, J)), r.field("Jw"), "wheel inertia must be below the body inertia")
    inertia = InertiaParams(*J, *Jw)

    r = reader("target")
    target = TargetMotion(
        mode=TargetMode(r.choice("mode", "constant", [m.value for m in TargetMode])),
        omega_const=r.vector("omega_const", (0.0, 0.0, 0.0), 3),
        amp=r.vector("amp", (0.0, 0.0, 0.0), 3),
        periods=r.vector("periods", (200.0, 100.0, 200.0 / 3.0), 3),
        initial_attitude=r.vector("initial_attitude", (0.0, 0.0, 0.0), 3),
        kinematics=TargetKinematics(r.choice("kinematics", "rotation", [k.value for k in TargetKinematics])),
    )
    _require(all(p > 0 for p in target.periods), r.field("periods"), "periods must be positive")
    _require(abs(target.initial_attitude[1]) < math.pi / 2, r.field("initial_attitude"),
             "target pitch must lie in (-pi/2, pi/2)")

    tuning_p = _tuning(reader("mpc.position"), POSITION_DEFAULTS)
    tuning_a = _tuning(reader("mpc.attitude"), ATTITUDE_DEFAULTS)
    _require(math.isclose(tuning_p.Ts, tuning_a.Ts), "mpc.attitude.Ts", "must equal the position sampling interval")

    r = reader("limits")
    limits = ConstraintParams(
        umax_p=r.vector("umax_p", (3.0, 3.0, 3.0), 3),
        umax_a=r.vector("umax_a", (1.0, 1.0, 1.0), 3),
        r_safe=r.number("r_safe", 6.0),
        gamma_e=r.number("gamma_e", math.radians(30.0)),
        gamma_f=r.number("gamma_f", math.radians(30.0)),
        fov_yaw_sign=r.integer("fov_yaw_sign", 1),
    )
    _require(all(u > 0 for u in limits.umax_p), r.field("umax_p"), "input limits must be positive")
    _require(all(u > 0 for u in limits.umax_a), r.field("umax_a"), "input limits must be positive")
    _require(limits.r_safe > 0, r.field("r_safe"), "keep-out radius must be positive")
    _require(0 < limits.gamma_e < math.pi / 2, r.field("gamma_e"), "cone half-angle must lie in (0, pi/2)")
    _require(0 < limits.gamma_f < math.pi / 2, r.field("gamma_f"), "field-of-view half-angle must lie in (0, pi/2)")
    _require(limits.fov_yaw_sign in (-1, 1), r.field("fov_yaw_sign"), "must be +1 or -1")

    r = reader("initial.position")
    x0_p = LosState.from_rates(r.number("rho", 80.0), r.number("eps", math.radians(25.0)),
                               r.number("beta", math.radians(-10.0)), r.number("rho_dot", 0.0),
                               r.number("eps_dot", 0.0), r.number("beta_dot", 0.0))
    _require(x0_p.rho > 0, r.field("rho"), "range must be positive")
    _require(abs(x0_p.eps) < math.pi / 2, r.field("eps"), "elevation must lie in (-pi/2, pi/2)")
    _require(abs(x0_p.beta) <= math.pi, r.field("beta"), "azimuth must lie in [-pi, pi]")

    r = reader("initial.attitude")
    x0_a = AttitudeState(r.number("phi", math.radians(20.0)), r.number("theta", math.radians(25.0)),
                         r.number("psi", math.radians(-10.0)), r.number("w1", 0.0), r.number("w2", 0.0),
                         r.number("w3", 0.0))
    _require(abs(x0_a.theta) < math.pi / 2, r.field("theta"), "pitch must lie in (-pi/2, pi/2)")
    _require(abs(x0_a.phi) <= math.pi, r.field("phi"), "roll must lie in [-pi, pi]")
    _require(abs(x0_a.psi) <= math.pi, r.field("psi"), "yaw must lie in [-pi, pi]")

    r = reader("run")
    scenario = Scenario(
        orbit=orbit, inertia=inertia, target=target, tuning_p=tuning_p, tuning_a=tuning_a, limits=limits,
        x0_p=x0_p, x0_a=x0_a,
        duration=r.number("duration", 500.0),
        mode=RunMode(r.choice("mode", "sampling", [m.value for m in RunMode])),
        seed=r.integer("seed", 0),
        rho_d=r.number("rho_d", 6.0),
        wrap_delta=r.number("wrap_delta", math.radians(0.5)),
        singularity_free=r.boolean("singularity_free", True),
        pitch_margin=r.number("pitch_margin", math.radians(5.0)),
    )
    _require(scenario.duration > 0, r.field("duration"), "must be positive")
    _require(scenario.rho_d > 0, r.field("rho_d"), "must be positive")
    _require(scenario.wrap_delta > 0, r.field("wrap_delta"), "must be positive")
    _require(0 <= scenario.pitch_margin < math.pi / 2, r.field("pitch_margin"), "must lie in [0, pi/2)")
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load and validate a scenario file.

    Args:
        path: JSON scenario file

    Returns:
        Scenario

    Raises:
        ParseError: file missing, malformed or holding unknown keys
        ValidationError: a value violates an invariant
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read scenario file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    scenario = scenario_from_dict(data, text)
    logger.info(f"Loaded scenario {path.name} (mode={scenario.mode.value}, duration={scenario.duration} s)")
    return scenario


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Canonical SI-radian document of a scenario."""

    def tuning(t: MpcTuning) -> Dict[str, Any]:
        return {"Np": t.Np, "Nc": t.Nc, "Ts": t.Ts, "Q": list(t.Q), "P": list(t.P), "ws": list(t.ws),
                "seed": t.seed, "q_range_scaled": list(t.q_range_scaled)}

    s = scenario
    return {
        "orbit": {"a": s.orbit.a, "e": s.orbit.e, "f0": s.orbit.f0, "mu": s.orbit.mu},
        "inertia": {"J": list(s.inertia.body.tolist()), "Jw": list(s.inertia.wheels.tolist())},
        "target": {"mode": s.target.mode.value, "omega_const": list(s.target.omega_const),
                   "amp": list(s.target.amp), "periods": list(s.target.periods),
                   "initial_attitude": list(s.target.initial_attitude),
                   "kinematics": s.target.kinematics.value},
        "mpc": {"position": tuning(s.tuning_p), "attitude": tuning(s.tuning_a)},
        "limits": {"umax_p": list(s.limits.umax_p), "umax_a": list(s.limits.umax_a), "r_safe": s.limits.r_safe,
                   "gamma_e": s.limits.gamma_e, "gamma_f": s.limits.gamma_f,
                   "fov_yaw_sign": s.limits.fov_yaw_sign},
        "initial": {
            "position": {"rho": s.x0_p.rho, "eps": s.x0_p.eps, "beta": s.x0_p.beta, "rho_dot": s.x0_p.rho_dot,
                         "eps_dot": s.x0_p.rho_epsdot / s.x0_p.rho, "beta_dot": s.x0_p.rho_betadot / s.x0_p.rho},
            "attitude": {"phi": s.x0_a.phi, "theta": s.x0_a.theta, "psi": s.x0_a.psi,
                         "w1": s.x0_a.w1, "w2": s.x0_a.w2, "w3": s.x0_a.w3},
        },
        "run": {"duration": s.duration, "mode": s.mode.value, "seed": s.seed, "rho_d": s.rho_d,
                "wrap_delta": s.wrap_delta, "singularity_free": s.singularity_free,
                "pitch_margin": s.pitch_margin},
    }


def dump_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    """Write the canonical form of a scenario."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(scenario), f, indent=4)
    return path


def scenario_fingerprint(scenario: Scenario) -> str:
    """Hash of everything except the run mode and seed; equal for runs that may be compared."""
    document = copy.deepcopy(scenario_to_dict(scenario))
    document["run"].pop("mode")
    document["run"].pop("seed")
    canonical = json.dumps(document, sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def validation_report(scenario: Scenario) -> List[str]:
    """Human-readable summary lines for the validate command."""
    s = scenario
    return [
        f"orbit: a={s.orbit.a:.6g} m, e={s.orbit.e:.4g}, f0={math.degrees(s.orbit.f0):.4g} deg",
        f"target: {s.target.mode.value} ({s.target.kinematics.value} kinematics)",
        f"position MPC: Np={s.tuning_p.Np}, Nc={s.tuning_p.Nc}, Ts={s.tuning_p.Ts} s, ws={s.tuning_p.ws}",
        f"attitude MPC: Np={s.tuning_a.Np}, Nc={s.tuning_a.Nc}, Ts={s.tuning_a.Ts} s, ws={s.tuning_a.ws}",
        f"limits: umax_p={s.limits.umax_p}, umax_a={s.limits.umax_a}, r_safe={s.limits.r_safe} m, "
        f"gamma_e={math.degrees(s.limits.gamma_e):.4g} deg, gamma_f={math.degrees(s.limits.gamma_f):.4g} deg",
        f"run: {s.duration} s ({s.steps} steps), mode={s.mode.value}, seed={s.seed}",
        f"fingerprint: {scenario_fingerprint(s)}",
    ]
