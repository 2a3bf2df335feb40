"""Selects the step-kernel backend at import time.

The compiled extension is used when it imported cleanly; otherwise the
numpy fallback takes over.  Set ``ASGLD_PURE_PYTHON=1`` to force the
fallback, e.g. to compare the two (see benchmarks/bench_kernels.py).
Both backends produce bit-identical trajectories.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if os.environ.get("ASGLD_PURE_PYTHON") == "1" or _compiled is None:
    kernels = _kernels_py
else:
    kernels = _compiled


def active_backend() -> str:
    """Name of the kernel backend in use: 'compiled' or 'python'."""
    return kernels.BACKEND_NAME


def available_backends() -> tuple[str, ...]:
    if _compiled is None:
        return ("python",)
    return ("compiled", "python")


def use(name: str):
    """Switch backends globally (testing and benchmarking hook)."""
    global kernels
    if name == "python":
        kernels = _kernels_py
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        kernels = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    return kernels
