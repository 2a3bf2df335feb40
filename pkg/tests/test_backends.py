"""The compiled kernels and the numpy fallback must agree bit for bit."""

import numpy as np
import pytest

from asgld import HyperParams, backend
from asgld.optimizers import STEPPERS

from conftest import fresh_state

needs_compiled = pytest.mark.skipif(
    "compiled" not in backend.available_backends(),
    reason="compiled kernels not built",
)


@pytest.fixture
def restore_backend():
    original = backend.active_backend()
    yield
    backend.use(original)


@needs_compiled
@pytest.mark.parametrize("name", sorted(STEPPERS))
def test_trajectories_bitwise_identical(name, restore_backend):
    grads = np.random.default_rng(42).standard_normal((500, 7))
    hp = HyperParams(eta=3e-3, rho=0.85, psi=1.2, epsilon_noise=0.4,
                     beta1=0.9, beta2=0.995, stab=1e-8)

    results = {}
    for which in ("compiled", "python"):
        backend.use(which)
        state = fresh_state(np.linspace(-2, 2, 7), seed=9)
        reports = []
        for g in grads:
            reports.append(STEPPERS[name](state, g, hp))
        results[which] = (state, reports)

    sa, ra = results["compiled"]
    sb, rb = results["python"]
    for buf in ("theta", "mu", "cov", "second_moment", "max_second_moment"):
        assert np.array_equal(getattr(sa, buf), getattr(sb, buf)), buf
    for rep_a, rep_b in zip(ra, rb):
        assert np.array_equal(rep_a.effective_step, rep_b.effective_step)
        assert np.array_equal(rep_a.noise_draw, rep_b.noise_draw)


@needs_compiled
def test_accumulate_bitwise_identical(restore_backend):
    from asgld.optimizers import asgld_accumulate

    grads = np.random.default_rng(5).standard_normal((300, 4))
    hp = HyperParams(eta=1.0, rho=0.93)
    outs = {}
    for which in ("compiled", "python"):
        backend.use(which)
        state = fresh_state(np.zeros(4))
        for g in grads:
            mu, cov = asgld_accumulate(state, g, hp)
        outs[which] = (mu, cov)
    assert np.array_equal(outs["compiled"][0], outs["python"][0])
    assert np.array_equal(outs["compiled"][1], outs["python"][1])


def test_backend_switch_roundtrip(restore_backend):
    assert backend.use("python").BACKEND_NAME == "python"
    assert backend.active_backend() == "python"
    with pytest.raises(ValueError):
        backend.use("fortran")
