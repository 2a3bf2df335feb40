"""One stepper interface, nine update rules.

Every stepper mutates its ``OptimizerState`` in place, advances the step
counter by one, and returns a ``StepReport`` describing what happened.
Stochastic steppers consume exactly ``dim`` standard-normal draws from the
state's stream per step, so a trajectory is a pure function of the initial
state, the gradient sequence, the hyperparameters, and the seed.

Update rules, writing g for the minibatch gradient and d for elementwise
products:

    sgd       theta <- theta - eta * g
    momentum  mu <- rho*mu + (1-rho)*g;  theta <- theta - eta*mu
    sgld      xi ~ N(0, eps*I);          theta <- theta - eta*(g + xi)
    sghmc     momentum's mu update;      theta <- theta - eta*(mu + xi)
    asgld     mu as above; C <- rho*C + (1-rho)*(g - mu_new) d (g - mu_old);
              xi ~ N(mu_new, max(C, 0)); theta <- theta - eta*(g + psi*xi)
    psgld     v <- beta2*v + (1-beta2)*g*g;  P = 1/(sqrt(v) + stab);
              zeta ~ N(0, eps*I);  theta <- theta - eta*(P d g + sqrt(P) d zeta)
    adagrad   acc += g*g;  theta <- theta - eta * g / (sqrt(acc) + stab)
    adam      bias-corrected first/second moments (canonical form)
    amsgrad   adam's moments with a running elementwise max of v (no bias
              correction, per the original formulation)

ASGLD stores the *raw* second-moment accumulator, which can go negative
per coordinate; it is clamped at zero only when the noise is sampled, so
the recursion itself is never distorted.  Its reported noise has mean
mu_new by construction (set ``zero_mean_noise`` to sample the recentred
variant for comparison).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .vectors import (
    DimensionMismatchError,
    GaussianStream,
    NonFiniteError,
    vector,
)

__all__ = [
    "HyperParams",
    "OptimizerState",
    "StepReport",
    "STEPPERS",
    "sgd_step",
    "momentum_step",
    "sgld_step",
    "sghmc_step",
    "asgld_accumulate",
    "asgld_step",
    "psgld_step",
    "adagrad_step",
    "adam_step",
    "amsgrad_step",
]


@dataclass(frozen=True)
class HyperParams:
    """Step-size, decay and noise knobs shared by all update rules.

    eta: step size (> 0)
    rho: momentum / accumulator decay in [0, 1)
    psi: ASGLD noise scale (>= 0)
    epsilon_noise: isotropic noise variance for SGLD/SGHMC/pSGLD (>= 0)
    beta1, beta2: Adam-family decays in [0, 1)
    stab: denominator stabilizer for adaptive rules (> 0)
    zero_mean_noise: sample ASGLD noise as N(0, C) instead of N(mu, C)
        (comparison-only variant; the standard rule keeps the mean)
    """

    eta: float
    rho: float = 0.9
    psi: float = 0.0
    epsilon_noise: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    stab: float = 1e-8
    zero_mean_noise: bool = False

    def __post_init__(self):
        checks = [
            (self.eta > 0.0, "eta must be > 0"),
            (0.0 <= self.rho < 1.0, "rho must be in [0, 1)"),
            (self.psi >= 0.0, "psi must be >= 0"),
            (self.epsilon_noise >= 0.0, "epsilon_noise must be >= 0"),
            (0.0 <= self.beta1 < 1.0, "beta1 must be in [0, 1)"),
            (0.0 <= self.beta2 < 1.0, "beta2 must be in [0, 1)"),
            (self.stab > 0.0, "stab must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        for name in ("eta", "rho", "psi", "epsilon_noise", "beta1", "beta2", "stab"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass
class OptimizerState:
    """Parameters plus per-algorithm accumulators and the noise stream.

    Single-owner: a state must not be stepped from two threads.  Buffers
    all share the parameter dimension; accumulators start at zero.
    """

    theta: np.ndarray
    mu: np.ndarray
    cov: np.ndarray
    second_moment: np.ndarray
    max_second_moment: np.ndarray
    t: int
    stream: GaussianStream

    @classmethod
    def fresh(cls, theta0, stream: GaussianStream) -> "OptimizerState":
        theta = vector(theta0).copy()
        d = theta.shape[0]
        return cls(
            theta=theta,
            mu=np.zeros(d),
            cov=np.zeros(d),
            second_moment=np.zeros(d),
            max_second_moment=np.zeros(d),
            t=0,
            stream=stream,
        )

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class StepReport:
    """Observability record for one step.

    noise_draw is the noise actually used: the sampled xi for the Langevin
    rules (for pSGLD, the preconditioned injection sqrt(P) d zeta) and an
    exact zero vector for noiseless rules.  effective_step is the realized
    parameter displacement.
    """

    noise_draw: np.ndarray
    grad_norm: float
    effective_step: np.ndarray


def _prep(state: OptimizerState, grad) -> np.ndarray:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.theta.shape:
        raise DimensionMismatchError(
            f"gradient dimension {grad.shape} does not match parameters "
            f"{state.theta.shape}"
        )
    if not np.isfinite(grad).all():
        raise NonFiniteError("gradient contains NaN or Inf; state unchanged")
    return grad


def _norm(grad: np.ndarray) -> float:
    return math.sqrt(float(grad.dot(grad)))


def _checked(ok: bool) -> None:
    if not ok:
        raise NonFiniteError(
            "update produced non-finite values (diverged); state is unusable"
        )


def sgd_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    step = np.empty(d)
    ok = backend.kernels.sgd(state.theta, grad, hp.eta, step)
    state.t += 1
    _checked(ok)
    return StepReport(np.zeros(d), _norm(grad), step)


def momentum_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    step = np.empty(d)
    ok = backend.kernels.momentum(state.theta, state.mu, grad, hp.eta, hp.rho, step)
    state.t += 1
    _checked(ok)
    return StepReport(np.zeros(d), _norm(grad), step)


def sgld_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    z = state.stream.standard_normal(d)
    step = np.empty(d)
    noise = np.empty(d)
    ok = backend.kernels.sgld(
        state.theta, grad, z, hp.eta, math.sqrt(hp.epsilon_noise), step, noise
    )
    state.t += 1
    _checked(ok)
    return StepReport(noise, _norm(grad), step)


def sghmc_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    z = state.stream.standard_normal(d)
    step = np.empty(d)
    noise = np.empty(d)
    ok = backend.kernels.sghmc(
        state.theta, state.mu, grad, z, hp.eta, hp.rho,
        math.sqrt(hp.epsilon_noise), step, noise,
    )
    state.t += 1
    _checked(ok)
    return StepReport(noise, _norm(grad), step)


def asgld_accumulate(state: OptimizerState, grad, hp: HyperParams):
    """Advance the running moment buffers only; no parameter move, no draw.

    mu is refreshed first and the raw second-moment accumulator then uses
    both the fresh and the previous mu.  Returns copies of (mu, cov).
    """
    grad = _prep(state, grad)
    ok = backend.kernels.asgld_accumulate(state.mu, state.cov, grad, hp.rho)
    _checked(ok)
    return state.mu.copy(), state.cov.copy()


def asgld_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    z = state.stream.standard_normal(d)
    step = np.empty(d)
    noise = np.empty(d)
    ok = backend.kernels.asgld(
        state.theta, state.mu, state.cov, grad, z,
        hp.eta, hp.rho, hp.psi, hp.zero_mean_noise, step, noise,
    )
    state.t += 1
    _checked(ok)
    return StepReport(noise, _norm(grad), step)


def psgld_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    z = state.stream.standard_normal(d)
    step = np.empty(d)
    noise = np.empty(d)
    ok = backend.kernels.psgld(
        state.theta, state.second_moment, grad, z,
        hp.eta, hp.beta2, hp.stab, math.sqrt(hp.epsilon_noise), step, noise,
    )
    state.t += 1
    _checked(ok)
    return StepReport(noise, _norm(grad), step)


def adagrad_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    step = np.empty(d)
    ok = backend.kernels.adagrad(
        state.theta, state.second_moment, grad, hp.eta, hp.stab, step
    )
    state.t += 1
    _checked(ok)
    return StepReport(np.zeros(d), _norm(grad), step)


def adam_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    t_new = state.t + 1
    bc1 = 1.0 - hp.beta1 ** t_new
    bc2 = 1.0 - hp.beta2 ** t_new
    step = np.empty(d)
    ok = backend.kernels.adam(
        state.theta, state.mu, state.second_moment, grad,
        hp.eta, hp.beta1, hp.beta2, hp.stab, bc1, bc2, step,
    )
    state.t = t_new
    _checked(ok)
    return StepReport(np.zeros(d), _norm(grad), step)


def amsgrad_step(state: OptimizerState, grad, hp: HyperParams) -> StepReport:
    grad = _prep(state, grad)
    d = grad.shape[0]
    step = np.empty(d)
    ok = backend.kernels.amsgrad(
        state.theta, state.mu, state.second_moment, state.max_second_moment,
        grad, hp.eta, hp.beta1, hp.beta2, hp.stab, step,
    )
    state.t += 1
    _checked(ok)
    return StepReport(np.zeros(d), _norm(grad), step)


STEPPERS = {
    "sgd": sgd_step,
    "momentum": momentum_step,
    "sgld": sgld_step,
    "sghmc": sghmc_step,
    "asgld": asgld_step,
    "psgld": psgld_step,
    "adagrad": adagrad_step,
    "adam": adam_step,
    "amsgrad": amsgrad_step,
}
