"""
sparse_iscra - sequential truncated-l1 sparse regression

Solves b ~ A x for sparse x by a short sequence of truncated-l1 subproblems,
each handled by a semismooth Newton augmented Lagrangian solver, and ships
the folded-concave baselines, null-space diagnostics and experiment harness
used to evaluate it.

Subpackages:
    - models: problem instance, penalty, options and trace records
    - solver: proximal kernels, inner solver, driver, baselines
    - analysis: sparse singular values, theory constants, null-space checks
    - data: toy instances, synthetic generator, LIBSVM reader, polynomial expansion
    - experiments: sweeps and acceptance checks
    - utils: console output, configuration, CSV/JSON artifacts, errors

Example:
    from sparse_iscra import SolverOptions, lambda_from_c, run_iscra
    from sparse_iscra.data.synthetic import gen_synthetic, preset_spec

    instance, truth = gen_synthetic(preset_spec("exam51", m=400, seed=7))
    trace = run_iscra(instance, SolverOptions.from_config(lambda_from_c(instance, 10.0)))
    print(trace.status, trace.outer_iters)
"""

from .models.problem import (
    GroundTruth,
    ProblemInstance,
    SeparablePenalty,
    SolveTrace,
    SolverOptions,
    lambda_from_c,
    loss,
    relative_error,
)
from .solver.iscra import postprocess
from .solver.iscra import run as run_iscra
from .solver.ssnal import SsnalCaps, solve_subproblem
from .utils.errors import SparseIscraError

__version__ = "1.0.0"

__all__ = [
    "GroundTruth",
    "ProblemInstance",
    "SeparablePenalty",
    "SolveTrace",
    "SolverOptions",
    "SsnalCaps",
    "SparseIscraError",
    "lambda_from_c",
    "loss",
    "postprocess",
    "relative_error",
    "run_iscra",
    "solve_subproblem",
    "__version__",
]
