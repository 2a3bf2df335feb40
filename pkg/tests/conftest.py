import numpy as np
import pytest

from asgld import GaussianStream, HyperParams, OptimizerState
from asgld.optimizers import STEPPERS


def fresh_state(theta, seed=0):
    return OptimizerState.fresh(np.asarray(theta, dtype=np.float64), GaussianStream(seed))


def run_trajectory(name, problem, hp, theta0, seed, steps):
    """Step `name` on `problem` from theta0; returns the theta history."""
    from asgld.problems import FULL_BATCH

    state = fresh_state(theta0, seed)
    stepper = STEPPERS[name]
    history = [state.theta.copy()]
    for _ in range(steps):
        stepper(state, problem.grad(state.theta, FULL_BATCH), hp)
        history.append(state.theta.copy())
    return np.array(history)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
