"""Loss/gradient oracles for the optimizer benchmark.

Three analytic landscapes (quadratic bowl, banana valley, strict saddle),
a noisy-gradient wrapper that models minibatch variance on landscapes,
dataset generation/loading, and two small models with hand-coded exact
gradients.  Every oracle is pure: identical (theta, batch) inputs give
bitwise-identical outputs, so problems can be evaluated concurrently.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .vectors import GaussianStream, vector

__all__ = [
    "BatchRef",
    "Dataset",
    "Problem",
    "NoDatasetError",
    "DatasetFormatError",
    "MalformedRowError",
    "UnknownLabelColumnError",
    "EmptyDatasetError",
    "quadratic_problem",
    "rosenbrock_problem",
    "saddle_problem",
    "stochastic_wrapper",
    "two_moons",
    "load_csv_dataset",
    "logistic_problem",
    "mlp_problem",
    "finite_difference_grad",
    "accuracy",
]


class NoDatasetError(ValueError):
    """Raised when a dataset-only operation is applied to a landscape problem."""


class DatasetFormatError(ValueError):
    """Base for CSV ingestion failures."""


class MalformedRowError(DatasetFormatError):
    pass


class UnknownLabelColumnError(DatasetFormatError):
    pass


class EmptyDatasetError(DatasetFormatError):
    pass


@dataclass(frozen=True)
class BatchRef:
    """What one stochastic evaluation is computed over.

    Dataset problems read the row ``indices`` (None = the full training
    partition).  Synthetic landscapes key their gradient noise off the
    ``ticket``, so re-evaluating with the same ticket reproduces the same
    draw exactly.
    """

    indices: Optional[np.ndarray] = None
    ticket: int = 0


FULL_BATCH = BatchRef()


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, integer labels and a fixed train/test partition."""

    inputs: np.ndarray
    labels: np.ndarray
    n_classes: int
    train_idx: np.ndarray
    test_idx: np.ndarray

    def __post_init__(self):
        n = self.inputs.shape[0]
        if n == 0:
            raise ValueError("dataset must contain at least one row")
        if self.labels.shape[0] != n:
            raise ValueError("inputs and labels disagree on row count")
        combined = np.concatenate([self.train_idx, self.test_idx])
        if len(np.unique(combined)) != n or combined.shape[0] != n:
            raise ValueError("train/test partitions must cover all rows exactly once")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise ValueError("labels must lie in [0, n_classes)")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def p(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class Problem:
    """A minibatch loss/gradient oracle.

    ``loss`` and ``grad`` take (theta, BatchRef); ``full_eval`` is the
    deterministic full-data (or exact, for landscapes) loss.  Dataset-backed
    problems also expose ``dataset`` and a ``scores`` function returning
    per-class scores for accuracy computation.  ``default_init`` maps a seed
    to a starting point.
    """

    name: str
    dim: int
    loss: Callable[[np.ndarray, BatchRef], float]
    grad: Callable[[np.ndarray, BatchRef], np.ndarray]
    full_eval: Callable[[np.ndarray], float]
    default_init: Callable[[int], np.ndarray]
    dataset: Optional[Dataset] = None
    scores: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None


# ---------------------------------------------------------------------------
# Analytic landscapes


def quadratic_problem(d: int, condition: float = 1.0) -> Problem:
    """Convex bowl 0.5 * theta' D theta with diagonal D log-spaced in [1, condition]."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if condition < 1.0:
        raise ValueError("condition must be >= 1")
    diag = np.logspace(0.0, math.log10(condition), d) if condition > 1.0 else np.ones(d)

    def loss(theta, batch=FULL_BATCH):
        return 0.5 * float(theta.dot(diag * theta))

    def grad(theta, batch=FULL_BATCH):
        return diag * theta

    return Problem(
        name=f"quadratic(d={d},cond={condition:g})",
        dim=d,
        loss=loss,
        grad=grad,
        full_eval=lambda theta: loss(theta),
        default_init=lambda seed: np.ones(d),
    )


def rosenbrock_problem() -> Problem:
    """The classic banana valley; global minimum at (1, 1)."""

    def loss(theta, batch=FULL_BATCH):
        x, y = theta
        return float((1.0 - x) ** 2 + 100.0 * (y - x * x) ** 2)

    def grad(theta, batch=FULL_BATCH):
        x, y = theta
        gy = 200.0 * (y - x * x)
        gx = -2.0 * (1.0 - x) - 2.0 * x * gy
        return np.array([gx, gy])

    return Problem(
        name="rosenbrock",
        dim=2,
        loss=loss,
        grad=grad,
        full_eval=lambda theta: loss(theta),
        default_init=lambda seed: np.array([-1.2, 1.0]),
    )


def saddle_problem() -> Problem:
    """Strict saddle at the origin: f(x, y) = (x^2 - y^2)/2 + y^4/4.

    Minima sit at (0, +-1) with value -1/4; the descent direction out of
    the saddle is invisible to the gradient on the x-axis, so only noise
    can find it.
    """

    def loss(theta, batch=FULL_BATCH):
        x, y = theta
        return float(0.5 * (x * x - y * y) + 0.25 * y**4)

    def grad(theta, batch=FULL_BATCH):
        x, y = theta
        return np.array([x, -y + y**3])

    return Problem(
        name="saddle",
        dim=2,
        loss=loss,
        grad=grad,
        full_eval=lambda theta: loss(theta),
        default_init=lambda seed: np.array([0.1, 0.0]),
    )


def stochastic_wrapper(p: Problem, sigma_g: float, stream: GaussianStream) -> Problem:
    """Add N(0, sigma_g^2 I) noise to ``p``'s gradients, keyed to the batch ticket.

    The same ticket always reproduces the same draw (purity), and distinct
    wrapper streams give independent noise.  Loss and full_eval delegate
    unchanged, so the noisy gradient intentionally disagrees with finite
    differences of the loss at any single ticket; it matches in
    expectation.
    """
    if sigma_g < 0.0:
        raise ValueError("sigma_g must be >= 0")
    if sigma_g == 0.0:
        return p
    key = stream.seed

    def grad(theta, batch=FULL_BATCH):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([key, batch.ticket]))
        )
        return p.grad(theta, batch) + sigma_g * rng.standard_normal(p.dim)

    return Problem(
        name=f"{p.name}+noise({sigma_g:g})",
        dim=p.dim,
        loss=p.loss,
        grad=grad,
        full_eval=p.full_eval,
        default_init=p.default_init,
        dataset=p.dataset,
        scores=p.scores,
    )


# ---------------------------------------------------------------------------
# Datasets


def two_moons(n: int, noise_sd: float, seed: int) -> Dataset:
    """Two interleaved half-circles with Gaussian jitter; 80/20 split.

    Deterministic in the seed.  n must be even (half the points per moon).
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 2")
    rng = np.random.default_rng(seed)
    m = n // 2
    t = np.linspace(0.0, math.pi, m)
    outer = np.column_stack([np.cos(t), np.sin(t)])
    inner = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    inputs = np.concatenate([outer, inner]) + noise_sd * rng.standard_normal((n, 2))
    labels = np.concatenate([np.zeros(m, dtype=np.int64), np.ones(m, dtype=np.int64)])
    perm = rng.permutation(n)
    n_train = int(0.8 * n)
    return Dataset(
        inputs=inputs,
        labels=labels,
        n_classes=2,
        train_idx=perm[:n_train],
        test_idx=perm[n_train:],
    )


def load_csv_dataset(path, label_column: str) -> Dataset:
    """Load a numeric CSV with a header into a Dataset.

    Feature columns must parse as floats; the label column as nonnegative
    integers.  Rows are split 80/20 into train/test in file order.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"dataset file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"empty dataset: {path} has no header") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise UnknownLabelColumnError(
                f"unknown label column {label_column!r}; file has {header}"
            )
        label_pos = header.index(label_column)
        features, labels = [], []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRowError(
                    f"row {row_no}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                values = [float(f) for f in row]
            except ValueError:
                raise MalformedRowError(
                    f"row {row_no}: non-numeric field in {row!r}"
                ) from None
            label = values.pop(label_pos)
            if label != int(label) or label < 0:
                raise MalformedRowError(
                    f"row {row_no}: label must be a nonnegative integer, got {label!r}"
                )
            features.append(values)
            labels.append(int(label))
    if not features:
        raise EmptyDatasetError(f"empty dataset: {path} has a header but no rows")
    inputs = np.array(features, dtype=np.float64)
    label_arr = np.array(labels, dtype=np.int64)
    n = inputs.shape[0]
    n_train = max(1, int(0.8 * n))
    order = np.arange(n)
    return Dataset(
        inputs=inputs,
        labels=label_arr,
        n_classes=int(label_arr.max()) + 1,
        train_idx=order[:n_train],
        test_idx=order[n_train:],
    )


# ---------------------------------------------------------------------------
# Models


def _batch_rows(ds: Dataset, batch: BatchRef):
    idx = ds.train_idx if batch.indices is None else batch.indices
    return ds.inputs[idx], ds.labels[idx]


def logistic_problem(ds: Dataset, l2: float = 0.0) -> Problem:
    """Binary cross-entropy with optional L2 penalty on the weights.

    Parameters are [w_1..w_p, bias]; the loss is the mean over the batch
    plus 0.5 * l2 * |w|^2.
    """
    if ds.n_classes != 2:
        raise ValueError("logistic_problem requires exactly 2 classes")
    if l2 < 0.0:
        raise ValueError("l2 must be >= 0")
    p = ds.p

    def split(theta):
        return theta[:p], theta[p]

    def loss(theta, batch=FULL_BATCH):
        w, b = split(theta)
        x, y = _batch_rows(ds, batch)
        zlin = x @ w + b
        # mean of log(1 + e^z) - y*z, computed stably
        ce = float(np.mean(np.logaddexp(0.0, zlin) - y * zlin))
        return ce + 0.5 * l2 * float(w.dot(w))

    def grad(theta, batch=FULL_BATCH):
        w, b = split(theta)
        x, y = _batch_rows(ds, batch)
        zlin = x @ w + b
        resid = _sigmoid(zlin) - y
        gw = x.T @ resid / x.shape[0] + l2 * w
        gb = float(np.mean(resid))
        return np.concatenate([gw, [gb]])

    def scores(theta, x):
        w, b = split(theta)
        zlin = x @ w + b
        return np.column_stack([np.zeros_like(zlin), zlin])

    return Problem(
        name="logistic",
        dim=p + 1,
        loss=loss,
        grad=grad,
        full_eval=lambda theta: loss(theta),
        default_init=lambda seed: np.zeros(p + 1),
        dataset=ds,
        scores=scores,
    )


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_softmax(logits):
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class _MlpLayout:
    """Deterministic flattening of a fully connected net.

    For layer sizes [p, h_1, ..., h_k, K], the flat vector holds, per
    layer, the (fan_in x fan_out) weight matrix in row-major order followed
    by the fan_out biases.
    """

    def __init__(self, sizes):
        self.sizes = list(sizes)
        self.slices = []
        off = 0
        for fan_in, fan_out in zip(self.sizes, self.sizes[1:]):
            w = slice(off, off + fan_in * fan_out)
            off += fan_in * fan_out
            b = slice(off, off + fan_out)
            off += fan_out
            self.slices.append((w, b, fan_in, fan_out))
        self.dim = off

    def unpack(self, theta):
        for w, b, fan_in, fan_out in self.slices:
            yield theta[w].reshape(fan_in, fan_out), theta[b]

    def glorot_init(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        theta = np.zeros(self.dim)
        for w, b, fan_in, fan_out in self.slices:
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            theta[w] = rng.uniform(-bound, bound, fan_in * fan_out)
        return theta


def mlp_problem(ds: Dataset, hidden) -> Problem:
    """Fully connected net: tanh hidden layers, softmax cross-entropy output.

    An empty ``hidden`` list degrades to multinomial logistic regression.
    Gradients are exact backpropagation; the flat parameter layout is
    documented on _MlpLayout.
    """
    hidden = list(hidden)
    if any(h < 1 for h in hidden):
        raise ValueError("hidden layer widths must be >= 1")
    if ds.n_classes < 2:
        raise ValueError("need at least 2 classes")
    layout = _MlpLayout([ds.p, *hidden, ds.n_classes])

    def forward(theta, x):
        activations = [x]
        layers = list(layout.unpack(theta))
        for w, b in layers[:-1]:
            activations.append(np.tanh(activations[-1] @ w + b))
        w, b = layers[-1]
        logits = activations[-1] @ w + b
        return activations, logits

    def loss(theta, batch=FULL_BATCH):
        x, y = _batch_rows(ds, batch)
        _, logits = forward(theta, x)
        logp = _log_softmax(logits)
        return -float(np.mean(logp[np.arange(x.shape[0]), y]))

    def grad(theta, batch=FULL_BATCH):
        x, y = _batch_rows(ds, batch)
        s = x.shape[0]
        activations, logits = forward(theta, x)
        layers = list(layout.unpack(theta))
        probs = np.exp(_log_softmax(logits))
        probs[np.arange(s), y] -= 1.0
        delta = probs / s
        out = np.zeros(layout.dim)
        grads = []
        for layer_i in range(len(layers) - 1, -1, -1):
            a_prev = activations[layer_i]
            grads.append((a_prev.T @ delta, delta.sum(axis=0)))
            if layer_i > 0:
                w, _ = layers[layer_i]
                delta = (delta @ w.T) * (1.0 - activations[layer_i] ** 2)
        grads.reverse()
        for (wslice, bslice, *_), (gw, gb) in zip(layout.slices, grads):
            out[wslice] = gw.ravel()
            out[bslice] = gb
        return out

    def scores(theta, x):
        _, logits = forward(theta, x)
        return logits

    return Problem(
        name=f"mlp({'-'.join(map(str, layout.sizes))})",
        dim=layout.dim,
        loss=loss,
        grad=grad,
        full_eval=lambda theta: loss(theta),
        default_init=layout.glorot_init,
        dataset=ds,
        scores=scores,
    )


# ---------------------------------------------------------------------------
# Oracles over problems


def finite_difference_grad(
    p: Problem, theta: np.ndarray, batch: BatchRef = FULL_BATCH, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient, evaluating the same batch on both sides."""
    if h <= 0.0:
        raise ValueError("h must be > 0")
    theta = vector(theta)
    out = np.empty(p.dim)
    probe = theta.copy()
    for i in range(p.dim):
        orig = probe[i]
        probe[i] = orig + h
        hi = p.loss(probe, batch)
        probe[i] = orig - h
        lo = p.loss(probe, batch)
        probe[i] = orig
        out[i] = (hi - lo) / (2.0 * h)
    return out


def accuracy(p: Problem, theta: np.ndarray, partition: str) -> float:
    """Fraction of argmax-correct predictions; ties resolve to the lowest class."""
    if p.dataset is None or p.scores is None:
        raise NoDatasetError("no dataset: accuracy is undefined for landscapes")
    if partition == "train":
        idx = p.dataset.train_idx
    elif partition == "test":
        idx = p.dataset.test_idx
    else:
        raise ValueError("partition must be 'train' or 'test'")
    if idx.shape[0] == 0:
        return float("nan")
    x = p.dataset.inputs[idx]
    y = p.dataset.labels[idx]
    pred = np.argmax(p.scores(theta, x), axis=1)
    return float(np.mean(pred == y))
