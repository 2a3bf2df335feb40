"""Numpy implementations of the per-step update kernels.

Each kernel mutates the state buffers in place, writes the parameter
displacement into ``step_out`` (and the noise actually used into
``noise_out`` where applicable), and returns True iff every mutated buffer
is still finite.  Standard-normal draws are made by the caller and passed
in as ``z`` so that both backends consume the stream identically.

The compiled twin (``asgld._kernels``) mirrors these expressions
operation for operation; trajectories must match bit for bit.  Keep the
evaluation order in sync when editing either module.
"""

import numpy as np

BACKEND_NAME = "python"


def _finite(*arrays):
    ok = True
    for a in arrays:
        ok = ok and bool(np.isfinite(a).all())
    return ok


def sgd(theta, grad, eta, step_out):
    step_out[:] = -eta * grad
    theta += step_out
    return _finite(theta)


def momentum(theta, mu, grad, eta, rho, step_out):
    omr = 1.0 - rho
    mu[:] = rho * mu + omr * grad
    step_out[:] = -eta * mu
    theta += step_out
    return _finite(theta, mu)


def sgld(theta, grad, z, eta, sqrt_eps, step_out, noise_out):
    noise_out[:] = sqrt_eps * z
    step_out[:] = -eta * (grad + noise_out)
    theta += step_out
    return _finite(theta)


def sghmc(theta, mu, grad, z, eta, rho, sqrt_eps, step_out, noise_out):
    omr = 1.0 - rho
    mu[:] = rho * mu + omr * grad
    noise_out[:] = sqrt_eps * z
    step_out[:] = -eta * (mu + noise_out)
    theta += step_out
    return _finite(theta, mu)


def asgld_accumulate(mu, cov, grad, rho):
    """Running first moment, then raw second-moment accumulator.

    The accumulator update reads both the fresh and the previous first
    moment, so the previous value is captured before overwriting.  The raw
    accumulator may hold negative entries; clamping happens only when the
    noise is sampled.
    """
    omr = 1.0 - rho
    mu_old = mu.copy()
    mu[:] = rho * mu_old + omr * grad
    cov[:] = rho * cov + omr * ((grad - mu) * (grad - mu_old))
    return _finite(mu, cov)


def asgld(theta, mu, cov, grad, z, eta, rho, psi, zero_mean, step_out, noise_out):
    omr = 1.0 - rho
    mu_old = mu.copy()
    mu[:] = rho * mu_old + omr * grad
    cov[:] = rho * cov + omr * ((grad - mu) * (grad - mu_old))
    clamped = np.maximum(cov, 0.0)
    if zero_mean:
        noise_out[:] = np.sqrt(clamped) * z
    else:
        noise_out[:] = mu + np.sqrt(clamped) * z
    step_out[:] = -eta * (grad + psi * noise_out)
    theta += step_out
    return _finite(theta, mu, cov)


def psgld(theta, v, grad, z, eta, beta2, stab, sqrt_eps, step_out, noise_out):
    omb2 = 1.0 - beta2
    v[:] = beta2 * v + omb2 * (grad * grad)
    precond = 1.0 / (np.sqrt(v) + stab)
    noise_out[:] = np.sqrt(precond) * (sqrt_eps * z)
    step_out[:] = -eta * (precond * grad + noise_out)
    theta += step_out
    return _finite(theta, v)


def adagrad(theta, acc, grad, eta, stab, step_out):
    acc += grad * grad
    step_out[:] = -eta * (grad / (np.sqrt(acc) + stab))
    theta += step_out
    return _finite(theta, acc)


def adam(theta, m, v, grad, eta, beta1, beta2, stab, bc1, bc2, step_out):
    omb1 = 1.0 - beta1
    omb2 = 1.0 - beta2
    m[:] = beta1 * m + omb1 * grad
    v[:] = beta2 * v + omb2 * (grad * grad)
    mhat = m / bc1
    vhat = v / bc2
    step_out[:] = -eta * (mhat / (np.sqrt(vhat) + stab))
    theta += step_out
    return _finite(theta, m, v)


def amsgrad(theta, m, v, vmax, grad, eta, beta1, beta2, stab, step_out):
    omb1 = 1.0 - beta1
    omb2 = 1.0 - beta2
    m[:] = beta1 * m + omb1 * grad
    v[:] = beta2 * v + omb2 * (grad * grad)
    np.maximum(vmax, v, out=vmax)
    step_out[:] = -eta * (m / (np.sqrt(vmax) + stab))
    theta += step_out
    return _finite(theta, m, v, vmax)
