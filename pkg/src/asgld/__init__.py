"""Stochastic-gradient optimizers with adaptively preconditioned Langevin
noise, a problem suite, and a reproducible experiment harness.

The headline update rule (``asgld``) tracks running first and second
moments of the gradients and injects Gaussian noise whose per-coordinate
scale grows with them, so exploration concentrates where gradients are
large; classical baselines (SGD, momentum, SGLD, SGHMC, pSGLD, AdaGrad,
Adam, AMSGrad) share the same stepper interface for comparison.
"""

__version__ = "0.1.0"

from .backend import active_backend, available_backends
from .harness import (
    ComparisonTable,
    ExperimentConfig,
    GridSpec,
    ProblemSpec,
    RunRecord,
    Schedule,
    compare,
    grid_search,
    run_experiment,
    schedule_eta,
)
from .optimizers import (
    STEPPERS,
    HyperParams,
    OptimizerState,
    StepReport,
    adagrad_step,
    adam_step,
    amsgrad_step,
    asgld_accumulate,
    asgld_step,
    momentum_step,
    psgld_step,
    sgd_step,
    sghmc_step,
    sgld_step,
)
from .problems import (
    BatchRef,
    Dataset,
    Problem,
    accuracy,
    finite_difference_grad,
    load_csv_dataset,
    logistic_problem,
    mlp_problem,
    quadratic_problem,
    rosenbrock_problem,
    saddle_problem,
    stochastic_wrapper,
    two_moons,
)
from .svgplot import emit_plot
from .vectors import (
    DimensionMismatchError,
    GaussianStream,
    NonFiniteError,
    axpy,
    elementwise_mul,
    sample_gaussian,
)
