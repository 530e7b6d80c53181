"""
Shared pytest fixtures for the Rendezvous & Docking MPC Simulator tests.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from models import (AttitudeState, ConstraintParams, InertiaParams, LosState, MpcTuning, OrbitParams, Scenario,
                    StepRecord, TargetMotion)

PROJECT_ROOT = Path(__file__).parent
SCENARIO_DIR = PROJECT_ROOT / "config" / "scenarios"

POSITION_Q = (1000.0, 30000.0, 30000.0, 1000.0, 3000.0, 3000.0)
ATTITUDE_Q = (30000.0, 30000.0, 30000.0, 3000.0, 3000.0, 3000.0)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-length closed-loop tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-length closed-loop runs (enable with --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def case1_path():
    return SCENARIO_DIR / "case1.json"


@pytest.fixture
def case2_path():
    return SCENARIO_DIR / "case2.json"


@pytest.fixture
def yaw_crossing_path():
    return SCENARIO_DIR / "yaw_crossing.json"


@pytest.fixture
def inertia():
    return InertiaParams(50.0, 35.0, 40.0, 5.0, 5.0, 5.0)


@pytest.fixture
def circular_orbit():
    return OrbitParams(a=7.0e6, e=0.0)


@pytest.fixture
def equilibrium_scenario(circular_orbit, inertia):
    """Target at rest, chaser parked at the desired pose on a circular orbit."""
    return Scenario(
        orbit=circular_orbit,
        inertia=inertia,
        target=TargetMotion(),
        tuning_p=MpcTuning(Np=10, Nc=5, Q=POSITION_Q, q_range_scaled=(False, False, False, True, True, True)),
        tuning_a=MpcTuning(Np=10, Nc=5, Q=ATTITUDE_Q, seed=1),
        limits=ConstraintParams(r_safe=5.0, fov_yaw_sign=-1),
        x0_p=LosState(6.0, 0.0, 0.0),
        x0_a=AttitudeState(0.0, 0.0, 0.0),
        duration=10.0,
    )


@pytest.fixture
def equilibrium_document():
    """Scenario file contents equivalent to the equilibrium scenario, with short horizons."""
    return {
        "orbit": {"a": 7.0e6, "e": 0.0},
        "target": {"mode": "constant", "omega_const": [0.0, 0.0, 0.0]},
        "mpc": {
            "position": {"Np": 10, "Nc": 5, "Q": list(POSITION_Q),
                         "q_range_scaled": [False, False, False, True, True, True]},
            "attitude": {"Np": 10, "Nc": 5, "Q": list(ATTITUDE_Q), "seed": 1},
        },
        "limits": {"r_safe": 5.0, "fov_yaw_sign": -1},
        "initial": {
            "position": {"rho": 6.0, "eps": 0.0, "beta": 0.0},
            "attitude": {"phi": 0.0, "theta": 0.0, "psi": 0.0},
        },
        "run": {"duration": 0.3, "seed": 0},
    }


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario document to a temporary file and return its path."""
    def _write(document, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document, indent=4), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def make_record():
    """StepRecord factory with zero states unless overridden."""
    def _make(t=0.0, x_p=None, x_dp=None, x_a=None, x_da=None, margins=None, **kwargs):
        x_p = np.array([6.0, 0.0, 0.0, 0.0, 0.0, 0.0]) if x_p is None else np.asarray(x_p, dtype=float)
        x_dp = x_p.copy() if x_dp is None else np.asarray(x_dp, dtype=float)
        x_a = np.zeros(6) if x_a is None else np.asarray(x_a, dtype=float)
        x_da = x_a.copy() if x_da is None else np.asarray(x_da, dtype=float)
        default_margins = {"input_p": 3.0, "collision": 1.0, "cone_eps": math.radians(30.0),
                           "cone_beta": math.radians(30.0), "input_a": 1.0, "fov_roll": math.pi,
                           "fov_pitch": math.radians(30.0), "fov_yaw": math.radians(30.0)}
        default_margins.update(margins or {})
        return StepRecord(t=t, x_p=x_p, x_a=x_a, x_dp=x_dp, x_da=x_da, u_p=np.zeros(3), u_a=np.zeros(3),
                          lvlh=np.array([x_p[0], 0.0, 0.0]), lvlh_d=np.array([x_dp[0], 0.0, 0.0]),
                          target_att=np.zeros(3), margins=default_margins, **kwargs)
    return _make
