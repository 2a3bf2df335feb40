"""Experiment runner: schedules, the epoch loop, learning-rate grid search,
multi-seed comparisons, and CSV persistence.

Everything here is deterministic in (config, seed): per-run streams are
derived from the run seed with fixed purpose tags, runs own all their
mutable state, and persisted CSVs are byte-reproducible.  Wall-clock
timing is therefore only recorded when explicitly requested.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .optimizers import STEPPERS, HyperParams, OptimizerState
from .problems import (
    FULL_BATCH,
    BatchRef,
    Problem,
    accuracy,
    load_csv_dataset,
    logistic_problem,
    mlp_problem,
    quadratic_problem,
    rosenbrock_problem,
    saddle_problem,
    stochastic_wrapper,
    two_moons,
)
from .vectors import GaussianStream, NonFiniteError

__all__ = [
    "Schedule",
    "ProblemSpec",
    "ExperimentConfig",
    "EpochRow",
    "RunRecord",
    "GridSpec",
    "GridResult",
    "GridSearchError",
    "ComparisonTable",
    "schedule_eta",
    "derive_seed",
    "run_experiment",
    "grid_search",
    "compare",
]

CSV_COLUMNS = ("epoch", "eta", "train_loss", "train_acc", "test_loss", "test_acc", "wall_secs")

# Purpose tags for per-run stream derivation.
_SEED_INIT, _SEED_NOISE, _SEED_BATCH, _SEED_GRADNOISE = 0, 1, 2, 3


def derive_seed(seed: int, purpose: int) -> int:
    """Collision-free 64-bit child seed for one purpose within one run."""
    return int(np.random.SeedSequence([seed, purpose]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Schedule:
    """Step-size-over-time rule applied on epoch boundaries.

    step_decay divides by decay_factor once past decay_at_fraction of the
    budget (0.75 with factor 10 gives the usual drop at epoch 150 of 200);
    inverse_time uses base/epoch.
    """

    kind: str = "constant"
    base_eta: float = 0.1
    decay_factor: float = 10.0
    decay_at_fraction: float = 0.75

    def __post_init__(self):
        if self.kind not in ("constant", "step_decay", "inverse_time"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.base_eta > 0.0:
            raise ValueError("base_eta must be > 0")
        if not self.decay_factor > 0.0:
            raise ValueError("decay_factor must be > 0")
        if not 0.0 < self.decay_at_fraction <= 1.0:
            raise ValueError("decay_at_fraction must be in (0, 1]")


def schedule_eta(sch: Schedule, epoch: int, total_epochs: int) -> float:
    """Step size in effect during ``epoch`` (1-based) of ``total_epochs``."""
    if not 1 <= epoch <= total_epochs:
        raise ValueError("epoch out of range")
    if sch.kind == "constant":
        return sch.base_eta
    if sch.kind == "step_decay":
        if epoch > sch.decay_at_fraction * total_epochs:
            return sch.base_eta / sch.decay_factor
        return sch.base_eta
    return sch.base_eta / epoch  # inverse_time


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative problem description, so a persisted config replays a run.

    kind selects the family: quadratic | rosenbrock | saddle (landscapes),
    two_moons | csv (dataset problems, fitted with ``model``).  grad_noise
    wraps a landscape's gradients with seeded Gaussian noise; init
    overrides the starting point.
    """

    kind: str
    dim: int = 2
    condition: float = 1.0
    n: int = 1000
    noise_sd: float = 0.2
    data_seed: int = 0
    path: Optional[str] = None
    label_column: str = "label"
    model: str = "mlp"
    hidden: tuple = (16,)
    l2: float = 0.0
    grad_noise: float = 0.0
    init: Optional[tuple] = None

    @property
    def is_dataset(self) -> bool:
        return self.kind in ("two_moons", "csv")

    def build_base(self) -> Problem:
        """The deterministic oracle, before any gradient-noise wrapping."""
        if self.kind == "quadratic":
            return quadratic_problem(self.dim, self.condition)
        if self.kind == "rosenbrock":
            return rosenbrock_problem()
        if self.kind == "saddle":
            return saddle_problem()
        if self.kind == "two_moons":
            ds = two_moons(self.n, self.noise_sd, self.data_seed)
        elif self.kind == "csv":
            if self.path is None:
                raise ValueError("csv problem requires problem.path")
            ds = load_csv_dataset(self.path, self.label_column)
        else:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.model == "logistic":
            return logistic_problem(ds, self.l2)
        if self.model == "mlp":
            return mlp_problem(ds, list(self.hidden))
        raise ValueError(f"unknown model {self.model!r}")

    def build(self, run_seed: int):
        """Instantiate (problem, theta0) for one run."""
        problem = self.build_base()
        if self.grad_noise > 0.0:
            if self.is_dataset:
                raise ValueError("grad_noise applies to landscape problems only")
            problem = stochastic_wrapper(
                problem, self.grad_noise,
                GaussianStream(derive_seed(run_seed, _SEED_GRADNOISE)),
            )
        if self.init is not None:
            theta0 = np.asarray(self.init, dtype=np.float64)
            if theta0.shape[0] != problem.dim:
                raise ValueError(
                    f"init has dimension {theta0.shape[0]}, problem needs {problem.dim}"
                )
        else:
            theta0 = problem.default_init(derive_seed(run_seed, _SEED_INIT))
        return problem, theta0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; hashable and replayable."""

    optimizer: str
    hp: HyperParams
    problem: ProblemSpec
    schedule: Schedule
    epochs: int
    batch_size: int = 32
    steps_per_epoch: int = 100
    seed: int = 0
    out: Optional[Path] = None
    label: str = ""
    record_walltime: bool = False

    @property
    def display_label(self) -> str:
        return self.label or self.optimizer

    def with_eta(self, eta: float) -> "ExperimentConfig":
        """Rebind the step size in both the hyperparameters and the schedule."""
        return replace(
            self,
            hp=replace(self.hp, eta=eta),
            schedule=replace(self.schedule, base_eta=eta),
        )


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    eta: float
    train_loss: float
    train_acc: float
    test_loss: float
    test_acc: float
    wall_secs: float


@dataclass
class RunRecord:
    """Per-epoch metrics for one run; diverged_at marks an aborted run."""

    rows: list = field(default_factory=list)
    diverged_at: Optional[int] = None

    @property
    def final(self) -> EpochRow:
        if not self.rows:
            raise ValueError("record has no completed epochs")
        return self.rows[-1]

    def metric_series(self, name: str):
        return np.array([getattr(r, name) for r in self.rows])

    def write_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([r.epoch] + [_fmt(v) for v in (
                    r.eta, r.train_loss, r.train_acc, r.test_loss, r.test_acc, r.wall_secs)])
            if self.diverged_at is not None:
                writer.writerow(["diverged", self.diverged_at])

    @classmethod
    def read_csv(cls, path) -> "RunRecord":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            rec = cls()
            for row in reader:
                if row and row[0] == "diverged":
                    rec.diverged_at = int(row[1])
                    break
                rec.rows.append(EpochRow(int(row[0]), *map(float, row[1:])))
        return rec


def _fmt(v: float) -> str:
    return format(v, ".9g")


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.epochs < 1:
        raise ValueError("empty schedule: epochs must be >= 1")
    if cfg.optimizer not in STEPPERS:
        raise ValueError(
            f"unknown optimizer {cfg.optimizer!r}; choose from {sorted(STEPPERS)}"
        )
    if cfg.seed < 0:
        raise ValueError("seed must be >= 0")
    if cfg.problem.is_dataset:
        if cfg.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
    elif cfg.steps_per_epoch < 1:
        raise ValueError("steps_per_epoch must be >= 1")


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Run one seeded experiment and persist its record if cfg.out is set.

    A non-finite loss or gradient aborts the run: the record is marked
    diverged at the failing epoch and the completed epochs are still
    persisted.  Nothing escapes to the caller, so sibling runs are safe.
    """
    _validate(cfg)
    problem, theta0 = cfg.problem.build(cfg.seed)
    stepper = STEPPERS[cfg.optimizer]
    state = OptimizerState.fresh(theta0, GaussianStream(derive_seed(cfg.seed, _SEED_NOISE)))

    is_ds = cfg.problem.is_dataset
    if is_ds:
        train_idx = problem.dataset.train_idx
        n_train = train_idx.shape[0]
        if cfg.batch_size > n_train:
            raise ValueError(
                f"batch_size {cfg.batch_size} exceeds training-set size {n_train}"
            )
        steps_per_epoch = math.ceil(n_train / cfg.batch_size)
        batch_rng = np.random.default_rng(derive_seed(cfg.seed, _SEED_BATCH))
        test_batch = BatchRef(indices=problem.dataset.test_idx)
    else:
        steps_per_epoch = cfg.steps_per_epoch

    record = RunRecord()
    started = time.perf_counter()
    ticket = 0
    for epoch in range(1, cfg.epochs + 1):
        eta = schedule_eta(cfg.schedule, epoch, cfg.epochs)
        hp = replace(cfg.hp, eta=eta)
        try:
            with np.errstate(all="ignore"):
                for _ in range(steps_per_epoch):
                    if is_ds:
                        batch = BatchRef(
                            indices=train_idx[batch_rng.integers(0, n_train, cfg.batch_size)]
                        )
                    else:
                        batch = BatchRef(ticket=ticket)
                    ticket += 1
                    stepper(state, problem.grad(state.theta, batch), hp)
                if is_ds:
                    train_loss = problem.loss(state.theta, FULL_BATCH)
                    test_loss = problem.loss(state.theta, test_batch)
                    train_acc = accuracy(problem, state.theta, "train")
                    test_acc = accuracy(problem, state.theta, "test")
                else:
                    train_loss = test_loss = problem.full_eval(state.theta)
                    train_acc = test_acc = float("nan")
        except (NonFiniteError, FloatingPointError, OverflowError):
            record.diverged_at = epoch
            break
        if not (math.isfinite(train_loss) and math.isfinite(test_loss)):
            record.diverged_at = epoch
            break
        wall = time.perf_counter() - started if cfg.record_walltime else 0.0
        record.rows.append(
            EpochRow(epoch, eta, train_loss, train_acc, test_loss, test_acc, wall)
        )
    if cfg.out is not None:
        record.write_csv(cfg.out)
    return record


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced step-size grid: center * ratio^k for k centered on 0."""

    center: float
    points: int = 5
    ratio: float = 10.0
    max_extensions: int = 4

    def __post_init__(self):
        if not self.center > 0.0:
            raise ValueError("center must be > 0")
        if self.points < 1:
            raise ValueError("points must be >= 1")
        if not self.ratio > 1.0:
            raise ValueError("ratio must be > 1")
        if self.max_extensions < 0:
            raise ValueError("max_extensions must be >= 0")

    def initial_etas(self):
        lo = -(self.points // 2)
        return [self.center * self.ratio**k for k in range(lo, lo + self.points)]


class GridSearchError(RuntimeError):
    pass


@dataclass
class GridResult:
    best_eta: float
    records: list  # (eta, RunRecord) sorted by eta
    extensions: int = 0
    capped_at_boundary: bool = False


def _score(record: RunRecord, metric: str) -> float:
    """Higher is better; diverged/empty runs rank below everything."""
    if record.diverged_at is not None or not record.rows:
        return -math.inf
    if metric == "test_acc":
        return record.final.test_acc
    if metric == "full_eval":
        return -record.final.train_loss
    raise ValueError(f"unknown grid metric {metric!r}")


def _default_metric(cfg: ExperimentConfig) -> str:
    return "test_acc" if cfg.problem.is_dataset else "full_eval"


def grid_search(
    cfg_template: ExperimentConfig,
    grid: GridSpec,
    metric: Optional[str] = None,
    out_dir=None,
    runner=run_experiment,
) -> GridResult:
    """Tune the step size on a log grid, extending past a boundary optimum.

    Runs every initial grid point, then, while the best point sits at
    either end, adds one point a ratio-step beyond that end (at most
    max_extensions times).  ``runner`` is swappable for tests.
    """
    metric = metric or _default_metric(cfg_template)
    out_dir = Path(out_dir) if out_dir is not None else None

    def run_at(eta: float) -> RunRecord:
        cfg = cfg_template.with_eta(eta)
        if out_dir is not None:
            name = f"sweep_{cfg.display_label}_eta{eta:.6g}_seed{cfg.seed}.csv"
            cfg = replace(cfg, out=out_dir / name)
        else:
            cfg = replace(cfg, out=None)
        return runner(cfg)

    etas = sorted(grid.initial_etas())
    results = {eta: run_at(eta) for eta in etas}
    extensions = 0
    capped = False
    while True:
        scores = [_score(results[e], metric) for e in etas]
        best_i = int(np.argmax(scores))
        if math.isinf(scores[best_i]) and scores[best_i] < 0:
            raise GridSearchError(
                "all grid runs diverged; step sizes tried: "
                + ", ".join(f"{e:.6g}" for e in etas)
            )
        at_low, at_high = best_i == 0, best_i == len(etas) - 1
        if not (at_low or at_high) or grid.points == 1:
            break
        if extensions >= grid.max_extensions:
            capped = True
            break
        new_eta = etas[0] / grid.ratio if at_low else etas[-1] * grid.ratio
        results[new_eta] = run_at(new_eta)
        etas = sorted(results)
        extensions += 1
    best_eta = etas[best_i]
    return GridResult(
        best_eta=best_eta,
        records=[(e, results[e]) for e in etas],
        extensions=extensions,
        capped_at_boundary=capped,
    )


@dataclass
class ComparisonTable:
    """Multi-seed, multi-optimizer summary over one shared problem."""

    labels: list
    seeds: list
    records: dict  # label -> [RunRecord per seed]
    epochs: int

    def final_stats(self, metric: str):
        """label -> (mean, std) of the final-epoch metric (population std)."""
        out = {}
        for label in self.labels:
            finals = [getattr(r.final, metric) for r in self.records[label] if r.rows]
            arr = np.array(finals)
            out[label] = (float(arr.mean()), float(arr.std())) if finals else (
                float("nan"), float("nan"))
        return out

    def mean_curve(self, label: str, metric: str) -> np.ndarray:
        """Per-epoch mean across seeds; epochs missing after divergence are nan."""
        table = np.full((len(self.records[label]), self.epochs), np.nan)
        for i, rec in enumerate(self.records[label]):
            for row in rec.rows:
                table[i, row.epoch - 1] = getattr(row, metric)
        with np.errstate(all="ignore"):
            return np.nanmean(table, axis=0)

    def n_diverged(self, label: str) -> int:
        return sum(1 for r in self.records[label] if r.diverged_at is not None)

    def write_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("optimizer", "seed") + CSV_COLUMNS)
            for label in self.labels:
                for seed, rec in zip(self.seeds, self.records[label]):
                    for r in rec.rows:
                        writer.writerow(
                            [label, seed, r.epoch] + [_fmt(v) for v in (
                                r.eta, r.train_loss, r.train_acc,
                                r.test_loss, r.test_acc, r.wall_secs)])


def compare(
    cfgs, seeds: int = 5, out_dir=None, runner=run_experiment
) -> ComparisonTable:
    """Run each config over ``seeds`` consecutive seeds on the shared problem."""
    cfgs = list(cfgs)
    if len(cfgs) < 2:
        raise ValueError("compare needs at least 2 configs")
    first = cfgs[0]
    labels = []
    for cfg in cfgs:
        if cfg.problem != first.problem:
            raise ValueError("mismatched problems: compare requires one shared problem")
        if cfg.epochs != first.epochs:
            raise ValueError("mismatched epoch budgets")
        if cfg.seed != first.seed:
            raise ValueError("mismatched seed policy: compare runs share base seeds")
        if cfg.display_label in labels:
            raise ValueError(f"duplicate optimizer label {cfg.display_label!r}")
        labels.append(cfg.display_label)
    out_dir = Path(out_dir) if out_dir is not None else None

    seed_list = list(range(first.seed, first.seed + seeds))
    records = {}
    for cfg, label in zip(cfgs, labels):
        per_seed = []
        for seed in range(cfg.seed, cfg.seed + seeds):
            run_cfg = replace(cfg, seed=seed)
            if out_dir is not None:
                run_cfg = replace(
                    run_cfg, out=out_dir / f"compare_{label}_seed{seed}.csv"
                )
            else:
                run_cfg = replace(run_cfg, out=None)
            per_seed.append(runner(run_cfg))
        records[label] = per_seed
    table = ComparisonTable(
        labels=labels, seeds=seed_list, records=records, epochs=first.epochs
    )
    if out_dir is not None:
        table.write_csv(out_dir / "comparison.csv")
    return table
