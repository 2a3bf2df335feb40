"""Experiment config files: a flat, typed key-value format with dotted keys.

One file fully describes one experiment (TOML syntax, conventionally flat:
``optimizer.eta = 0.1``).  Unknown keys and type mismatches are rejected
up front, and command-line overrides apply after file parsing with
precedence CLI > file > defaults.  The full schema is in SCHEMA below and
mirrored in the README.
"""

from __future__ import annotations

from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .harness import ExperimentConfig, GridSpec, ProblemSpec, Schedule
from .optimizers import HyperParams

__all__ = ["ConfigError", "SCHEMA", "load_config", "apply_overrides",
           "build_experiment", "build_problem_spec", "build_grid"]


class ConfigError(ValueError):
    pass


def _int_list(v):
    return isinstance(v, list) and all(isinstance(x, int) for x in v)


def _num_list(v):
    return isinstance(v, list) and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    )


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_str(v):
    return isinstance(v, str)


def _is_bool(v):
    return isinstance(v, bool)


# key -> (predicate, human-readable type)
SCHEMA = {
    "optimizer.name": (_is_str, "string"),
    "optimizer.eta": (_num, "number"),
    "optimizer.rho": (_num, "number"),
    "optimizer.psi": (_num, "number"),
    "optimizer.epsilon_noise": (_num, "number"),
    "optimizer.beta1": (_num, "number"),
    "optimizer.beta2": (_num, "number"),
    "optimizer.stab": (_num, "number"),
    "optimizer.zero_mean_noise": (_is_bool, "bool"),
    "problem.kind": (_is_str, "string"),
    "problem.dim": (_is_int, "int"),
    "problem.condition": (_num, "number"),
    "problem.n": (_is_int, "int"),
    "problem.noise_sd": (_num, "number"),
    "problem.data_seed": (_is_int, "int"),
    "problem.path": (_is_str, "string"),
    "problem.label_column": (_is_str, "string"),
    "problem.model": (_is_str, "string"),
    "problem.hidden": (_int_list, "list of ints"),
    "problem.l2": (_num, "number"),
    "problem.grad_noise": (_num, "number"),
    "problem.init": (_num_list, "list of numbers"),
    "schedule.kind": (_is_str, "string"),
    "schedule.decay_factor": (_num, "number"),
    "schedule.decay_at_fraction": (_num, "number"),
    "run.epochs": (_is_int, "int"),
    "run.batch_size": (_is_int, "int"),
    "run.steps_per_epoch": (_is_int, "int"),
    "run.seed": (_is_int, "int"),
    "run.out": (_is_str, "string"),
    "run.label": (_is_str, "string"),
    "run.walltime": (_is_bool, "bool"),
    "grid.center": (_num, "number"),
    "grid.points": (_is_int, "int"),
    "grid.ratio": (_num, "number"),
    "grid.max_extensions": (_is_int, "int"),
    "grid.metric": (_is_str, "string"),
    "compare.seeds": (_is_int, "int"),
}


def _flatten(tree, prefix=""):
    flat = {}
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _check(key: str, value) -> None:
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    pred, type_name = SCHEMA[key]
    if not pred(value):
        raise ConfigError(f"config key {key!r} expects {type_name}, got {value!r}")


def load_config(path) -> dict:
    """Parse and validate one config file into a flat dotted-key dict."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        tree = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    flat = _flatten(tree)
    for key, value in flat.items():
        _check(key, value)
    return flat


def parse_override(text: str):
    """Parse one ``key=value`` override; values use TOML literals, with a
    bare-word fallback so ``optimizer.name=adam`` works unquoted."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"malformed override {text!r}; expected key=value")
    raw = raw.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    _check(key, value)
    return key, value


def apply_overrides(cfg: dict, overrides) -> dict:
    merged = dict(cfg)
    for text in overrides or ():
        key, value = parse_override(text)
        merged[key] = value
    return merged


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing required config key {key!r}")
    return cfg[key]


def build_problem_spec(cfg: dict) -> ProblemSpec:
    return ProblemSpec(
        kind=str(_need(cfg, "problem.kind")),
        dim=int(cfg.get("problem.dim", 2)),
        condition=float(cfg.get("problem.condition", 1.0)),
        n=int(cfg.get("problem.n", 1000)),
        noise_sd=float(cfg.get("problem.noise_sd", 0.2)),
        data_seed=int(cfg.get("problem.data_seed", 0)),
        path=cfg.get("problem.path"),
        label_column=str(cfg.get("problem.label_column", "label")),
        model=str(cfg.get("problem.model", "mlp")),
        hidden=tuple(cfg.get("problem.hidden", [16])),
        l2=float(cfg.get("problem.l2", 0.0)),
        grad_noise=float(cfg.get("problem.grad_noise", 0.0)),
        init=tuple(cfg["problem.init"]) if "problem.init" in cfg else None,
    )


def build_experiment(cfg: dict, out_path=None) -> ExperimentConfig:
    """Materialize an ExperimentConfig from a validated flat dict."""
    hp = HyperParams(
        eta=float(cfg.get("optimizer.eta", 0.1)),
        rho=float(cfg.get("optimizer.rho", 0.9)),
        psi=float(cfg.get("optimizer.psi", 0.0)),
        epsilon_noise=float(cfg.get("optimizer.epsilon_noise", 0.0)),
        beta1=float(cfg.get("optimizer.beta1", 0.9)),
        beta2=float(cfg.get("optimizer.beta2", 0.999)),
        stab=float(cfg.get("optimizer.stab", 1e-8)),
        zero_mean_noise=bool(cfg.get("optimizer.zero_mean_noise", False)),
    )
    problem = build_problem_spec(cfg)
    schedule = Schedule(
        kind=str(cfg.get("schedule.kind", "constant")),
        base_eta=hp.eta,
        decay_factor=float(cfg.get("schedule.decay_factor", 10.0)),
        decay_at_fraction=float(cfg.get("schedule.decay_at_fraction", 0.75)),
    )
    return ExperimentConfig(
        optimizer=str(_need(cfg, "optimizer.name")),
        hp=hp,
        problem=problem,
        schedule=schedule,
        epochs=int(cfg.get("run.epochs", 200)),
        batch_size=int(cfg.get("run.batch_size", 32)),
        steps_per_epoch=int(cfg.get("run.steps_per_epoch", 100)),
        seed=int(cfg.get("run.seed", 0)),
        out=Path(out_path) if out_path is not None else None,
        label=str(cfg.get("run.label", "")),
        record_walltime=bool(cfg.get("run.walltime", False)),
    )


def build_grid(cfg: dict) -> GridSpec:
    return GridSpec(
        center=float(cfg.get("grid.center", cfg.get("optimizer.eta", 0.1))),
        points=int(cfg.get("grid.points", 5)),
        ratio=float(cfg.get("grid.ratio", 10.0)),
        max_extensions=int(cfg.get("grid.max_extensions", 4)),
    )
