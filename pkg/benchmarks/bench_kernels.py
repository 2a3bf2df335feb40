#!/usr/bin/env python3
"""Throughput comparison of the compiled step kernels vs the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--steps N] [--dim D]
"""

import argparse
import time

import numpy as np

from asgld import GaussianStream, HyperParams, backend
from asgld.optimizers import STEPPERS, OptimizerState

HP = HyperParams(eta=1e-3, rho=0.9, psi=1.0, epsilon_noise=1e-4,
                 beta1=0.9, beta2=0.999, stab=1e-8)


def steps_per_second(name, which, steps, dim):
    backend.use(which)
    state = OptimizerState.fresh(np.zeros(dim), GaussianStream(0))
    grad = np.full(dim, 0.5)
    stepper = STEPPERS[name]
    stepper(state, grad, HP)  # warm up
    t0 = time.perf_counter()
    for _ in range(steps):
        stepper(state, grad, HP)
    return steps / (time.perf_counter() - t0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=50_000)
    parser.add_argument("--dim", type=int, default=10)
    args = parser.parse_args()

    backends = backend.available_backends()
    if "compiled" not in backends:
        print("note: compiled kernels unavailable; showing python only")

    header = f"{'stepper':<10}" + "".join(f"{b:>16}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(f"dim={args.dim}, {args.steps} steps per cell\n\n{header}")
    print("-" * len(header))
    for name in sorted(STEPPERS):
        rates = [steps_per_second(name, b, args.steps, args.dim) for b in backends]
        line = f"{name:<10}" + "".join(f"{r:>14,.0f}/s" for r in rates)
        if len(rates) == 2:
            line += f"{rates[0] / rates[1]:>9.2f}x"
        print(line)
    backend.use(backends[0])


if __name__ == "__main__":
    main()
