"""Flat parameter vectors and seeded Gaussian sampling shared by all optimizers.

A parameter vector is a plain 1-D float64 numpy array; the helpers here
validate dimensions and keep NaN/Inf from propagating silently.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "NonFiniteError",
    "GaussianStream",
    "vector",
    "zeros_like",
    "axpy",
    "elementwise_mul",
    "sample_gaussian",
    "gaussian_from_draws",
]


class DimensionMismatchError(ValueError):
    """Operands of an elementwise operation disagree on dimension."""


class NonFiniteError(FloatingPointError):
    """A vector operation received or produced NaN/Inf entries."""


def vector(values) -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float64 array (copying only if needed)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise NonFiniteError("vector contains NaN or Inf entries")
    return v


def zeros_like(v: np.ndarray) -> np.ndarray:
    return np.zeros(v.shape[0], dtype=np.float64)


def _check_same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}"
        )


def _check_finite(v: np.ndarray, what: str) -> np.ndarray:
    if not np.isfinite(v).all():
        raise NonFiniteError(f"{what} contains NaN or Inf entries")
    return v


def axpy(a: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``a*x + y`` without modifying the inputs."""
    x = vector(x)
    y = vector(y)
    _check_same_dim(x, y)
    return _check_finite(a * x + y, "axpy result")


def elementwise_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return the Hadamard product ``x * y``."""
    x = vector(x)
    y = vector(y)
    _check_same_dim(x, y)
    return _check_finite(x * y, "elementwise product")


class GaussianStream:
    """Seeded source of standard-normal draws.

    Two streams built from the same seed yield identical sample sequences.
    A stream is single-owner: it must not be shared between concurrently
    executing runs.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def standard_normal(self, n: int) -> np.ndarray:
        """Draw ``n`` independent N(0, 1) samples, advancing the stream by ``n``."""
        return self._gen.standard_normal(n)

    def __repr__(self):
        return f"GaussianStream(seed={self.seed})"


def gaussian_from_draws(
    mean: np.ndarray, variance: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """Map standard-normal draws ``z`` to N(mean, diag(variance)) samples."""
    return mean + np.sqrt(variance) * z


def sample_gaussian(
    stream: GaussianStream, mean: np.ndarray, variance: np.ndarray
) -> np.ndarray:
    """Draw one sample of N(mean, diag(variance)).

    Advances the stream by exactly ``dim`` draws.  A zero variance entry
    yields exactly the corresponding mean entry.  Negative variances are
    rejected; callers holding raw (possibly negative) accumulators must
    clamp before sampling.
    """
    mean = vector(mean)
    variance = vector(variance)
    _check_same_dim(mean, variance)
    if np.any(variance < 0.0):
        raise ValueError("variance entries must be >= 0")
    z = stream.standard_normal(mean.shape[0])
    return gaussian_from_draws(mean, variance, z)
