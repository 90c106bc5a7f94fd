import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camdp import (
    AugmentedDynamics,
    JointPolicy,
    StructureError,
    augment,
    average_reward,
    check_quasi_positive,
    evaluate_exact,
    evaluate_iterative,
    relative_spread,
    stationary_distribution,
)
from camdp.evaluation import aggregate, chain_period
from conftest import random_model, random_policy


def dyn_from(P, r):
    P = np.asarray(P, dtype=float)
    return AugmentedDynamics(P, np.ones_like(P), np.asarray(r, dtype=float))


def test_gamma_zero_is_immediate_reward(case_model):
    dyn = augment(case_model, JointPolicy([0, 1, 0, 1], [1, 1, 0, 0]))
    np.testing.assert_allclose(evaluate_exact(dyn, 0.0).v, dyn.r_exp)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 0.9, 0.99])
def test_constant_reward_geometric_series(gamma):
    P = np.array([[0.2, 0.8], [0.6, 0.4]])
    v = evaluate_exact(dyn_from(P, [3.0, 3.0]), gamma).v
    np.testing.assert_allclose(v, 3.0 / (1 - gamma))


def test_two_state_closed_form():
    # v = r + gamma P v, solved by hand for a swap chain
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    g = 0.5
    v = evaluate_exact(dyn_from(P, [1.0, 0.0]), g).v
    np.testing.assert_allclose(v, [1 / (1 - g * g), g / (1 - g * g)])


def test_rejects_bad_gamma():
    d = dyn_from(np.eye(2), [1, 1])
    for g in (1.0, -0.1):
        with pytest.raises(ValueError):
            evaluate_exact(d, g)
        with pytest.raises(ValueError):
            evaluate_iterative(d, g)


@pytest.mark.parametrize("seed", range(10))
def test_iterative_agrees_with_exact(seed):
    rng = np.random.default_rng(seed)
    m = random_model(seed)
    dyn = augment(m, random_policy(m, rng))
    gamma = float(rng.uniform(0.1, 0.97))
    theta = 1e-7
    ve = evaluate_exact(dyn, gamma).v
    vi = evaluate_iterative(dyn, gamma, theta).v
    assert np.max(np.abs(ve - vi)) <= theta / (1 - gamma)
    assert evaluate_exact(dyn, gamma).residual < 1e-10


def test_stationary_distribution_two_state():
    P = np.array([[0.9, 0.1], [0.5, 0.5]])
    np.testing.assert_allclose(stationary_distribution(P), [5 / 6, 1 / 6], atol=1e-12)


def test_average_reward_uniform_reward_chain():
    P = np.array([[0.5, 0.5], [0.3, 0.7]])
    assert average_reward(dyn_from(P, [2.0, 2.0])) == pytest.approx(2.0)


@pytest.mark.parametrize(
    "P, ok, reason",
    [
        (np.eye(3), False, "reducible"),
        (np.array([[0.0, 1.0], [1.0, 0.0]]), False, "periodic"),
        (np.full((3, 3), 1 / 3), True, None),
        (np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0]]), True, None),
    ],
)
def test_quasi_positive_cases(P, ok, reason):
    d = dyn_from(P, np.ones(len(P)))
    assert check_quasi_positive(d) is ok
    if not ok:
        with pytest.raises(StructureError, match=reason):
            average_reward(d)


def test_chain_period_cycle():
    P = np.roll(np.eye(4), 1, axis=1)
    assert chain_period(P) == 4


@pytest.mark.parametrize("seed", range(5))
def test_discounted_value_approaches_average_reward(seed):
    m = random_model(seed)
    dyn = augment(m, random_policy(m, np.random.default_rng(seed)))
    gamma = 0.999
    v = evaluate_exact(dyn, gamma).v
    g = average_reward(dyn)
    assert abs((1 - gamma) * v.mean() - g) <= 0.01 * g


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_value_increases_with_gamma(seed):
    # positive rewards: each extra unit of discount adds positive mass
    m = random_model(seed)
    dyn = augment(m, random_policy(m, np.random.default_rng(seed)))
    vals = [evaluate_exact(dyn, g).v for g in (0.3, 0.6, 0.9)]
    assert np.all(np.diff(np.array(vals), axis=0) > 0)


def test_spread_single_state_is_zero():
    d = dyn_from([[1.0]], [0.7])
    for g in (0.5, 0.9, 0.998):
        assert relative_spread(evaluate_exact(d, g).v) == 0.0


def test_aggregators():
    v = np.array([1.0, 2.0, 6.0])
    assert aggregate(v, "max") == 6.0
    assert aggregate(v, "mean") == 3.0
    with pytest.raises(ValueError):
        aggregate(v, "min")
