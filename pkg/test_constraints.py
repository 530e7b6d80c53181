import math

import numpy as np
import pytest

from core.constraints import (PITCH_LIMIT, collision_ineq, cone_ineq, fov_ineq, input_ineq, periodic_bracket,
                              pitch_bracket, pose_margins, stack, wrap_to_pi)
from core.errors import DimensionMismatch
from core.prediction import build_operators, discretize
from models import ConstraintFamily, ConstraintParams, LinearInequalities, MARGIN_KEYS

Np, Nc = 4, 2


@pytest.fixture
def ops():
    """Triple integrator-like operators: each position channel driven through its rate."""
    Ac = np.zeros((6, 6))
    Ac[:3, 3:] = np.eye(3)
    Bc = np.zeros((6, 3))
    Bc[3:, :] = np.eye(3)
    model = discretize(Ac, Bc, 0.1)
    return build_operators([model] * Np, Nc)


def test_input_rows_encode_absolute_limits():
    Lambda = np.ones((2, 1))
    Gamma = np.tril(np.ones((2, 2)))
    rows = input_ineq(Lambda, Gamma, np.array([1.0]), [3.0], 2)
    np.testing.assert_array_equal(rows.g, [2.0, 2.0, 4.0, 4.0])
    assert rows.labels == [ConstraintFamily.INPUT] * 4
    assert np.all(rows.slack(np.array([2.0, 0.0])) >= 0.0)
    assert np.any(rows.slack(np.array([2.0, 0.5])) < 0.0)
    assert np.any(rows.slack(np.array([-4.5, 0.0])) < 0.0)


def test_input_rows_reject_non_positive_limits():
    with pytest.raises(ValueError):
        input_ineq(np.ones((1, 1)), np.ones((1, 1)), np.zeros(1), [0.0], 1)


def test_collision_rows_at_zero_increment(ops):
    x = np.array([7.0, 0.1, 0.2, -1.0, 0.0, 0.0])
    rows = collision_ineq(ops, x, np.zeros(3), r_safe=6.0)
    assert rows.rows == Np
    predicted_rho = ops.predict(x, np.zeros(3), np.zeros(3 * Nc))[:, 0]
    np.testing.assert_allclose(rows.slack(np.zeros(3 * Nc)), predicted_rho - 6.0, atol=1e-12)
    assert set(rows.labels) == {ConstraintFamily.COLLISION}


def test_collision_rows_errors(ops):
    with pytest.raises(ValueError):
        collision_ineq(ops, np.zeros(6), np.zeros(3), r_safe=-1.0)
    with pytest.raises(DimensionMismatch):
        collision_ineq(ops, np.zeros(6), np.zeros(3), r_safe=6.0, Np=Np + 1)


def test_cone_rows_order_and_slack(ops):
    x = np.array([10.0, 0.2, -0.1, 0.0, 0.0, 0.0])
    theta_t = np.full(Np, 0.1)
    psi_t = np.full(Np, 0.05)
    gamma = math.radians(30.0)
    rows = cone_ineq(ops, x, np.zeros(3), theta_t, psi_t, gamma)
    assert rows.rows == 4 * Np
    assert rows.labels == [ConstraintFamily.CONE_EPS] * (2 * Np) + [ConstraintFamily.CONE_BETA] * (2 * Np)
    slack = rows.slack(np.zeros(3 * Nc))
    np.testing.assert_allclose(slack[:Np], 0.1 + gamma - 0.2, atol=1e-12)
    np.testing.assert_allclose(slack[Np:2 * Np], 0.2 - (0.1 - gamma), atol=1e-12)
    np.testing.assert_allclose(slack[2 * Np:3 * Np], -0.05 + gamma + 0.1, atol=1e-12)
    np.testing.assert_allclose(slack[3 * Np:], -0.1 - (-0.05 - gamma), atol=1e-12)


def test_cone_rows_check_horizon_length(ops):
    with pytest.raises(DimensionMismatch):
        cone_ineq(ops, np.ones(6), np.zeros(3), np.zeros(Np - 1), np.zeros(Np), 0.5)


def test_fov_rows(ops):
    x = np.array([0.1, 0.2, 0.3, 0.0, 0.0, 0.0])
    gamma = math.radians(30.0)
    rows = fov_ineq(ops, x, np.zeros(3), np.full(Np, 0.25), np.full(Np, -0.3), gamma, yaw_sign=-1)
    assert rows.rows == 6 * Np
    assert rows.labels[:2 * Np] == [ConstraintFamily.FOV_ROLL] * (2 * Np)
    assert rows.labels[2 * Np:4 * Np] == [ConstraintFamily.FOV_PITCH] * (2 * Np)
    assert rows.labels[4 * Np:] == [ConstraintFamily.FOV_YAW] * (2 * Np)
    slack = rows.slack(np.zeros(3 * Nc))
    np.testing.assert_allclose(slack[:Np], math.pi - 0.1, atol=1e-12)
    np.testing.assert_allclose(slack[4 * Np:5 * Np], 0.3 + gamma - 0.3, atol=1e-12)


def test_fov_roll_window_is_configurable(ops):
    x = np.array([3.2, 0.0, 0.0, 0.0, 0.0, 0.0])
    rows = fov_ineq(ops, x, np.zeros(3), np.zeros(Np), np.zeros(Np), 0.5, roll_window=(-math.pi, 3.0 * math.pi))
    roll = rows.slack(np.zeros(3 * Nc))[:2 * Np]
    assert np.all(roll > 0.0)


def test_periodic_bracket_clips_only_inside_range():
    lower, upper = periodic_bracket([3.0, 3.5, -3.0], 0.5)
    np.testing.assert_allclose(lower, [2.5, 3.0, -math.pi])
    np.testing.assert_allclose(upper, [math.pi, 4.0, -2.5])


def test_pitch_bracket_stays_in_open_interval():
    lower, upper = pitch_bracket([1.4, -1.4], 0.5)
    np.testing.assert_allclose(upper, [PITCH_LIMIT, -0.9])
    np.testing.assert_allclose(lower, [0.9, -PITCH_LIMIT])


def test_stack_preserves_order_and_checks_width():
    a = LinearInequalities(G=np.ones((1, 2)), g=np.ones(1), labels=[ConstraintFamily.INPUT])
    b = LinearInequalities(G=np.zeros((2, 2)), g=np.zeros(2), labels=[ConstraintFamily.COLLISION] * 2)
    stacked = stack([a, b])
    assert stacked.rows == 3
    assert stacked.labels == [ConstraintFamily.INPUT, ConstraintFamily.COLLISION, ConstraintFamily.COLLISION]
    np.testing.assert_array_equal(stacked.rows_of(ConstraintFamily.COLLISION), [1, 2])
    with pytest.raises(DimensionMismatch):
        stack([a, LinearInequalities(G=np.ones((1, 3)), g=np.ones(1), labels=[ConstraintFamily.INPUT])])
    assert stack([], cols=4).cols == 4


def test_wrap_to_pi():
    np.testing.assert_allclose(wrap_to_pi([0.0, 3.5, -3.5, 2 * math.pi]), [0.0, 3.5 - 2 * math.pi,
                                                                         -3.5 + 2 * math.pi, 0.0], atol=1e-15)


def test_pose_margins_at_aligned_pose():
    limits = ConstraintParams(fov_yaw_sign=-1)
    x_p = np.array([8.0, 0.2, -0.3, 0.0, 0.0, 0.0])
    x_a = np.array([0.1, 0.2, 0.3, 0.0, 0.0, 0.0])
    margins = pose_margins(x_p, x_a, np.array([1.0, -2.0, 0.5]), np.array([0.2, 0.0, -0.9]),
                           np.array([0.1, 0.2, 0.3]), limits)
    assert tuple(margins) == MARGIN_KEYS
    assert margins["input_p"] == pytest.approx(1.0)
    assert margins["input_a"] == pytest.approx(0.1)
    assert margins["collision"] == pytest.approx(2.0)
    assert margins["cone_eps"] == pytest.approx(limits.gamma_e)
    assert margins["cone_beta"] == pytest.approx(limits.gamma_e)
    assert margins["fov_pitch"] == pytest.approx(limits.gamma_f)
    assert margins["fov_yaw"] == pytest.approx(limits.gamma_f)
    assert margins["fov_roll"] == pytest.approx(math.pi - 0.1)


def test_pose_margins_use_wrapped_azimuth_distance():
    limits = ConstraintParams()
    x_p = np.array([8.0, 0.0, 3.1, 0.0, 0.0, 0.0])
    margins = pose_margins(x_p, np.zeros(6), np.zeros(3), np.zeros(3), np.array([0.0, 0.0, -3.1]), limits)
    assert margins["cone_beta"] == pytest.approx(limits.gamma_e)
    x_p[2] = -3.1
    margins = pose_margins(x_p, np.zeros(6), np.zeros(3), np.zeros(3), np.array([0.0, 0.0, -3.1]), limits)
    assert margins["cone_beta"] == pytest.approx(limits.gamma_e - (2 * math.pi - 6.2))


def test_shift_back_maps_rows_one_step_earlier(ops):
    rows = stack([input_ineq(ops.Lambda, ops.Gamma, np.zeros(3), [1.0, 1.0, 1.0], Nc),
                  collision_ineq(ops, np.array([7.0, 0.0, 0.0, 0.0, 0.0, 0.0]), np.zeros(3), r_safe=6.0)])
    # input rows: upper bounds of steps 0 and 1, then lower bounds; collision rows follow
    np.testing.assert_array_equal(rows.steps, [0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1, 0, 1, 2, 3])
    assert rows.shift_back([4, 10, 6, 12, 15]) == [1, 7, 14]
    untagged = LinearInequalities(G=np.ones((2, 2)), g=np.ones(2), labels=[ConstraintFamily.INPUT] * 2)
    assert untagged.shift_back([1]) == []
    assert stack([rows, untagged]).steps is None


def test_fov_roll_margin_measured_against_the_roll_window():
    limits = ConstraintParams()
    x_a = np.array([math.pi + 0.02, 0.0, 0.0, 0.0, 0.0, 0.0])
    x_p = np.array([8.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    margins = pose_margins(x_p, x_a, np.zeros(3), np.zeros(3), np.zeros(3), limits,
                           roll_window=(-math.pi - 0.01, math.pi + 0.01))
    assert margins["fov_roll"] == pytest.approx(-0.01)
    margins = pose_margins(x_p, x_a, np.zeros(3), np.zeros(3), np.zeros(3), limits,
                           roll_window=(-math.pi, math.pi + 0.05))
    assert margins["fov_roll"] == pytest.approx(0.03)
