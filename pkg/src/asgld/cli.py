"""Command-line front end: run / sweep / compare / plot / gradcheck.

A thin shell over the library: every verb maps onto the corresponding
library call with identical results.  Exit codes: 0 success, 1 runtime or
validation failure, 2 usage error.  When --out is absent the output
directory comes from ASGLD_OUT_DIR, defaulting to the working directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, backend
from .config import (
    ConfigError,
    apply_overrides,
    build_experiment,
    build_grid,
    build_problem_spec,
    load_config,
)
from .harness import GridSearchError, compare, grid_search, run_experiment
from .problems import FULL_BATCH, finite_difference_grad
from .svgplot import PlotError, emit_plot

__all__ = ["main", "build_parser"]

GRADCHECK_POINTS = 20
GRADCHECK_TOL = 1e-5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asgld",
        description="Stochastic optimizers with adaptive Langevin noise: "
        "experiment runner and plotting tools.",
    )
    parser.add_argument("--version", action="version", version=f"asgld {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(sp, multi_config=False):
        if multi_config:
            sp.add_argument(
                "--config", action="append", required=True, metavar="FILE",
                help="experiment config (repeatable)",
            )
        else:
            sp.add_argument("--config", required=True, metavar="FILE")
        sp.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="override a config key (repeatable)",
        )
        sp.add_argument("--out", default=None, metavar="DIR", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override run.seed")

    sp = sub.add_parser("run", help="run one experiment and persist its record")
    common(sp)
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("sweep", help="tune the step size on a log grid")
    common(sp)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("compare", help="run several configs over multiple seeds")
    common(sp, multi_config=True)
    sp.add_argument("--seeds", type=int, default=None, help="seeds per config")
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("plot", help="render training-curve CSVs to SVG")
    sp.add_argument("records", nargs="+", metavar="CSV")
    sp.add_argument("--metric", default="test_acc", metavar="COLUMN")
    sp.add_argument("--out", default=None, metavar="FILE", help="output SVG path")
    sp.set_defaults(func=_cmd_plot)

    sp = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    common(sp)
    sp.add_argument(
        "--corrupt", action="store_true",
        help="test hook: scale one gradient coordinate by 1.01 (must fail)",
    )
    sp.set_defaults(func=_cmd_gradcheck)

    sp = sub.add_parser("backend", help="report which step-kernel backend is active")
    sp.set_defaults(func=_cmd_backend)
    return parser


def _out_dir(arg) -> Path:
    if arg is not None:
        return Path(arg)
    env = os.environ.get("ASGLD_OUT_DIR")
    return Path(env) if env else Path(".")


def _load(args) -> dict:
    cfg = apply_overrides(load_config(args.config), args.set)
    if args.seed is not None:
        cfg["run.seed"] = args.seed
    return cfg


def _cmd_run(args) -> int:
    cfg_dict = _load(args)
    cfg = build_experiment(cfg_dict)
    out_dir = _out_dir(args.out)
    name = cfg_dict.get(
        "run.out",
        f"run_{cfg.display_label}_{cfg.problem.kind}_seed{cfg.seed}.csv",
    )
    cfg = replace(cfg, out=out_dir / name)
    record = run_experiment(cfg)
    if record.diverged_at is not None:
        print(f"run diverged at epoch {record.diverged_at}")
    if record.rows:
        f = record.final
        print(
            f"final epoch {f.epoch}: train_loss={f.train_loss:.6g} "
            f"train_acc={f.train_acc:.4g} test_loss={f.test_loss:.6g} "
            f"test_acc={f.test_acc:.4g}"
        )
    print(f"wrote {cfg.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg_dict = _load(args)
    cfg = build_experiment(cfg_dict)
    grid = build_grid(cfg_dict)
    metric = cfg_dict.get("grid.metric", "auto")
    result = grid_search(
        cfg, grid,
        metric=None if metric == "auto" else metric,
        out_dir=_out_dir(args.out),
    )
    for eta, record in result.records:
        if record.diverged_at is not None:
            status = f"diverged at epoch {record.diverged_at}"
        else:
            f = record.final
            status = f"train_loss={f.train_loss:.6g} test_acc={f.test_acc:.4g}"
        print(f"eta={eta:<12.6g} {status}")
    print(f"best eta: {result.best_eta:.6g} ({result.extensions} grid extensions)")
    if result.capped_at_boundary:
        print("warning: optimum sits at the grid boundary (extension budget spent)")
    return 0


def _cmd_compare(args) -> int:
    cfgs = []
    seeds = args.seeds
    for path in args.config:
        cfg_dict = apply_overrides(load_config(path), args.set)
        if args.seed is not None:
            cfg_dict["run.seed"] = args.seed
        if seeds is None and "compare.seeds" in cfg_dict:
            seeds = int(cfg_dict["compare.seeds"])
        cfgs.append(build_experiment(cfg_dict))
    out_dir = _out_dir(args.out)
    table = compare(cfgs, seeds=seeds if seeds is not None else 5, out_dir=out_dir)
    print(f"{'optimizer':<14} {'train_loss':>22} {'test_loss':>22} {'test_acc':>18}")
    for label in table.labels:
        parts = []
        for metric in ("train_loss", "test_loss", "test_acc"):
            mean, std = table.final_stats(metric)[label]
            parts.append(f"{mean:.6g} +- {std:.3g}")
        flag = f"  [{table.n_diverged(label)} diverged]" if table.n_diverged(label) else ""
        print(f"{label:<14} {parts[0]:>22} {parts[1]:>22} {parts[2]:>18}{flag}")
    print(f"wrote {out_dir / 'comparison.csv'}")
    return 0


def _cmd_plot(args) -> int:
    if args.out is not None:
        out = Path(args.out)
    else:
        out = _out_dir(None) / f"plot_{args.metric}.svg"
    emit_plot(args.records, args.metric, out)
    print(f"wrote {out}")
    return 0


def _cmd_gradcheck(args) -> int:
    cfg_dict = _load(args)
    spec = build_problem_spec(cfg_dict)
    problem = spec.build_base()  # gradient-noise wrapping is excluded on purpose
    rng = np.random.default_rng(cfg_dict.get("run.seed", 0))
    worst = 0.0
    for _ in range(GRADCHECK_POINTS):
        theta = rng.standard_normal(problem.dim)
        g = problem.grad(theta, FULL_BATCH).copy()
        if args.corrupt:
            g[0] *= 1.01
        fd = finite_difference_grad(problem, theta, FULL_BATCH, h=1e-5)
        diff = g - fd
        rel = math.sqrt(float(diff.dot(diff))) / max(1.0, math.sqrt(float(g.dot(g))))
        worst = max(worst, rel)
    print(
        f"{problem.name}: max relative error over {GRADCHECK_POINTS} points: {worst:.3e}"
    )
    if worst < GRADCHECK_TOL:
        print("gradcheck passed")
        return 0
    print(f"gradcheck FAILED (tolerance {GRADCHECK_TOL:g})", file=sys.stderr)
    return 1


def _cmd_backend(args) -> int:
    print(f"active backend: {backend.active_backend()}")
    print(f"available: {', '.join(backend.available_backends())}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, GridSearchError, PlotError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
