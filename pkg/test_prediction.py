import math

import numpy as np
import pytest

from core.errors import DimensionMismatch, NonFinite
from core.orbit_los import initial_orbit_state, los_jacobians
from core.prediction import (assemble_cost, build_operators, discretize, horizon_weights, input_signs,
                             nominal_models, sampling_block, sampling_matrix, shift_plan)
from models import DiscreteModel, OrbitParams


def series_discretization(Ac, Bc, Ts, terms=40):
    """Taylor series of the zero-order-hold integrals."""
    n = Ac.shape[0]
    Ad = np.zeros_like(Ac)
    integral = np.zeros_like(Ac)
    power = np.eye(n)
    factorial = 1.0
    for k in range(terms):
        Ad += power * Ts ** k / factorial
        integral += power * Ts ** (k + 1) / (factorial * (k + 1))
        power = power @ Ac
        factorial *= (k + 1)
    return Ad, integral @ Bc


def random_models(rng, Np, n=4, m=2):
    return [DiscreteModel(Ad=np.eye(n) + 0.1 * rng.normal(size=(n, n)), Bd=rng.normal(size=(n, m)), Ts=0.1)
            for _ in range(Np)]


def explicit_rollout(models, x0, inputs):
    """x(k+i+1) = A_i x(k+i) + B_i u(k+i), one row per predicted state."""
    x = np.asarray(x0, dtype=float)
    states = []
    for model, u in zip(models, inputs):
        x = model.Ad @ x + model.Bd @ u
        states.append(x)
    return np.array(states)


def test_discretize_matches_series(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 4))
        Ac = rng.normal(size=(n, n))
        Bc = rng.normal(size=(n, m))
        Ts = float(rng.uniform(0.01, 0.2))
        model = discretize(Ac, Bc, Ts)
        Ad, Bd = series_discretization(Ac, Bc, Ts)
        worst = max(worst, np.max(np.abs(model.Ad - Ad)) / max(1.0, np.max(np.abs(Ad))),
                    np.max(np.abs(model.Bd - Bd)) / max(1.0, np.max(np.abs(Bd))))
    assert worst <= 1e-10


def test_discretize_double_integrator():
    Ac = np.array([[0.0, 1.0], [0.0, 0.0]])
    Bc = np.array([[0.0], [1.0]])
    model = discretize(Ac, Bc, 0.1)
    np.testing.assert_allclose(model.Ad, [[1.0, 0.1], [0.0, 1.0]], atol=1e-15)
    np.testing.assert_allclose(model.Bd, [[0.005], [0.1]], atol=1e-15)
    assert (model.n, model.m, model.Ts) == (2, 1, 0.1)


def test_discretize_errors():
    with pytest.raises(ValueError):
        discretize(np.eye(2), np.ones((2, 1)), 0.0)
    with pytest.raises(DimensionMismatch):
        discretize(np.eye(2), np.ones((3, 1)), 0.1)
    with pytest.raises(NonFinite):
        discretize(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.ones((2, 1)), 0.1)


def test_stacked_prediction_matches_recursion(rng):
    worst = 0.0
    for _ in range(50):
        Np = int(rng.integers(1, 6))
        Nc = int(rng.integers(1, Np + 1))
        models = random_models(rng, Np)
        ops = build_operators(models, Nc)
        x0 = rng.normal(size=4)
        u_prev = rng.normal(size=2)
        du = rng.normal(size=2 * Nc)

        absolute = u_prev + np.cumsum(du.reshape(Nc, 2), axis=0)
        inputs = list(absolute) + [np.zeros(2)] * (Np - Nc)
        expected = explicit_rollout(models, x0, inputs)
        predicted = ops.predict(x0, u_prev, du)
        worst = max(worst, np.max(np.abs(predicted - expected)) / max(1.0, np.max(np.abs(expected))))
    assert worst <= 1e-10


def test_stacked_prediction_with_sampling_matrix(rng):
    Np, Nc = 4, 3
    models = random_models(rng, Np)
    ops = build_operators(models, Nc)
    blocks = [np.diag(rng.uniform(-0.4, 0.4, 2)) for _ in range(Nc)]
    ops.Wstar = sampling_matrix(blocks)
    x0 = rng.normal(size=4)
    u_prev = rng.normal(size=2)
    du = rng.normal(size=2 * Nc)

    absolute = u_prev + np.cumsum(du.reshape(Nc, 2), axis=0)
    inputs = [(np.eye(2) + W) @ u for W, u in zip(blocks, absolute)] + [np.zeros(2)] * (Np - Nc)
    np.testing.assert_allclose(ops.predict(x0, u_prev, du), explicit_rollout(models, x0, inputs),
                               rtol=1e-10, atol=1e-12)


def test_operator_shapes(rng):
    ops = build_operators(random_models(rng, 5, n=6, m=3), 2)
    assert ops.Astar.shape == (30, 6)
    assert ops.Bbar.shape == (30, 15)
    assert ops.Bstar.shape == (30, 6)
    assert ops.Lambda.shape == (6, 3)
    assert ops.Gamma.shape == (6, 6)
    np.testing.assert_array_equal(ops.Gamma[3:, :3], np.eye(3))
    np.testing.assert_array_equal(ops.Gamma[:3, 3:], 0.0)


def test_build_operators_rejects_bad_horizons(rng):
    models = random_models(rng, 3)
    with pytest.raises(DimensionMismatch):
        build_operators(models, 4)
    with pytest.raises(DimensionMismatch):
        build_operators(models, 0)
    with pytest.raises(DimensionMismatch):
        build_operators([], 1)
    mixed = models[:2] + random_models(rng, 1, n=3)
    with pytest.raises(DimensionMismatch):
        build_operators(mixed, 1)


def test_condensed_cost_matches_direct_evaluation(rng):
    worst = 0.0
    for _ in range(50):
        Np = int(rng.integers(1, 6))
        Nc = int(rng.integers(1, Np + 1))
        models = random_models(rng, Np)
        ops = build_operators(models, Nc)
        if rng.random() < 0.5:
            ops.Wstar = sampling_matrix([np.diag(rng.uniform(-0.4, 0.4, 2)) for _ in range(Nc)])
        Q = np.diag(rng.uniform(0.1, 10.0, 4))
        P = np.diag(rng.uniform(0.1, 10.0, 2))
        Qt, Pt = horizon_weights(Q, P, Np, Nc)
        x0 = rng.normal(size=4)
        u_prev = rng.normal(size=2)
        xd = rng.normal(size=4 * Np)
        cost = assemble_cost(ops, x0, u_prev, xd, Qt, Pt)

        du = rng.normal(size=2 * Nc)
        error = ops.predict(x0, u_prev, du).ravel() - xd
        direct = error @ Qt @ error + du @ Pt @ du
        worst = max(worst, abs(cost.evaluate(du) - direct) / max(1.0, abs(direct)))
        np.testing.assert_allclose(cost.H, cost.H.T)
    assert worst <= 1e-9


def test_assemble_cost_shape_checks(rng):
    ops = build_operators(random_models(rng, 3), 2)
    Qt, Pt = horizon_weights(np.eye(4), np.eye(2), 3, 2)
    with pytest.raises(DimensionMismatch):
        assemble_cost(ops, np.zeros(4), np.zeros(2), np.zeros(11), Qt, Pt)
    with pytest.raises(DimensionMismatch):
        assemble_cost(ops, np.zeros(5), np.zeros(2), np.zeros(12), Qt, Pt)


def test_sampling_block_consumes_one_draw_even_when_disabled():
    a = np.random.default_rng(7)
    b = np.random.default_rng(7)
    block = sampling_block((0.0, 0.0, 0.0), (1.0, -1.0, 1.0), (1.0, 1.0, -1.0), a)
    np.testing.assert_array_equal(block, np.zeros((3, 3)))
    b.random()
    assert a.random() == b.random()


def test_sampling_block_signs_and_scale():
    rng = np.random.default_rng(3)
    r = np.random.default_rng(3).random()
    block = sampling_block((0.4, 0.25, 0.25), (1.0, -1.0, 0.0), (1.0, 1.0, 1.0), rng)
    np.testing.assert_allclose(np.diag(block), [0.4 * r, -0.25 * r, 0.0])
    assert np.count_nonzero(block - np.diag(np.diag(block))) == 0


def test_shift_plan():
    np.testing.assert_array_equal(shift_plan(None, np.array([1.0, 2.0]), 3), [[1.0, 2.0]] * 3)
    plan = np.array([[1.0], [2.0], [3.0]])
    np.testing.assert_array_equal(shift_plan(plan, np.zeros(1), 4), [[2.0], [3.0], [3.0], [3.0]])


def test_nominal_models_frozen_and_rolled():
    orbit = OrbitParams(a=1.0e7, e=0.3)
    orb = initial_orbit_state(orbit)
    x = np.array([50.0, 0.3, -0.2, -0.5, 0.1, 0.05])
    plan = np.tile([0.5, -0.2, 0.1], (5, 1))

    def jac(state):
        return los_jacobians(state, orb)

    frozen, states = nominal_models(jac, x, plan, 0.1, frozen=True)
    assert len(frozen) == 5
    assert states.shape == (6, 6)
    np.testing.assert_array_equal(states[0], x)
    for model in frozen[1:]:
        np.testing.assert_array_equal(model.Ad, frozen[0].Ad)

    rolled, rolled_states = nominal_models(jac, x, plan, 0.1)
    np.testing.assert_array_equal(rolled[0].Ad, frozen[0].Ad)
    assert not np.array_equal(rolled[-1].Ad, frozen[-1].Ad)
    for i, model in enumerate(rolled):
        np.testing.assert_allclose(rolled_states[i + 1], model.Ad @ rolled_states[i] + model.Bd @ plan[i])


def test_input_signs():
    np.testing.assert_array_equal(input_signs([6.0, 0.2, -0.1, 0, 0, 0], [8.0, 0.1, -0.1, 0, 0, 0]),
                                  [-1.0, 1.0, 0.0])


def test_horizon_weights_block_structure():
    Qt, Pt = horizon_weights(np.diag([1.0, 2.0]), np.diag([3.0]), 3, 2)
    np.testing.assert_array_equal(np.diag(Qt), [1.0, 2.0] * 3)
    np.testing.assert_array_equal(Pt, np.diag([3.0, 3.0]))
    assert math.isclose(np.sum(Qt), 9.0)
