"""
Solver dispatch and parameter sweeps

run_solver() maps a solver name to the iSCRA driver or one of the baselines;
metrics_row() turns a trace into one CSV metrics row. A SweepPlan expands into
cells (value x solver x c_lambda x seed); cells run in a worker pool and each
cell regenerates its synthetic instance from (preset, m, seed), so results do
not depend on the worker count or on the order cells finish in.

SWEEP MODES:
------------
- vary="lambda": one row per (solver, c_lambda, seed), lam = (c_lambda/m)*||A^T b||_inf
- vary="mu":     iSCRA only, one row per mu value; solver column reads "iscra(mu=...)"
- vary="rho":    iSCRA only, one row per rho value; solver column reads "iscra(rho=...)"

Each (solver, c_lambda) group is followed by a mean row with seed = "mean".
Failed cells keep their identifying fields and leave the metrics empty.

PROTOCOLS:
----------
Named plans for the standard comparison grids: mu-sensitivity, rho-sensitivity
and compare-<preset>-m<m> for the four solver comparisons; see PROTOCOLS.

Example:
    plan = SweepPlan(preset="exam51", m=400, solvers=("iscra", "lasso"),
                     c_lambdas=(10.0,), seeds=(0, 1, 2))
    rows = run_sweep(plan)
"""

import functools
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data.synthetic import gen_synthetic, preset_spec
from ..models.problem import (
    GroundTruth, ProblemInstance, SolveTrace, SolverOptions,
    lambda_from_c, loss, nnz_count, relative_error,
)
from ..solver import baselines, iscra
from ..solver.ssnal import SsnalCaps
from ..utils.console import Fore, print_colored, progress
from ..utils.errors import InvalidArgumentError, SparseIscraError

SOLVER_NAMES = ("iscra", "lasso", "lla-scad", "lla-mcp", "mscr-cl1", "dca-trl1")
COMPARISON_SOLVERS = ("iscra", "lla-scad", "mscr-cl1", "dca-trl1")
VARY_MODES = ("lambda", "mu", "rho")

MU_GRID = (1.0, 5.0, 10.0, 50.0, 100.0, 500.0, 1e3, 1e4)
RHO_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

MEAN_SEED = "mean"


def run_solver(
    name: str,
    instance: ProblemInstance,
    lam: float,
    config: Optional[Dict[str, Any]] = None,
    caps: Optional[SsnalCaps] = None,
    verbose: bool = False,
    **iscra_overrides: Any,
) -> SolveTrace:
    """
    Run one solver by name.

    Args:
        name: One of SOLVER_NAMES
        instance: Regression instance
        lam: Regularization parameter
        config: Loaded configuration (cached file config if None)
        caps: Inner solver caps
        verbose: Per-iteration progress lines
        **iscra_overrides: SolverOptions fields (rho, mu, epsilon, ...) for "iscra"

    Raises:
        InvalidArgumentError: Unknown solver name
    """
    caps = caps or SsnalCaps.from_config(config)
    if name == "iscra":
        options = SolverOptions.from_config(lam, config, **iscra_overrides)
        return iscra.run(instance, options, caps=caps, verbose=verbose)

    options = baselines.BaselineOptions.from_config(lam, config)
    dispatch: Dict[str, Callable[[], SolveTrace]] = {
        "lasso": lambda: baselines.lasso_trace(instance, options, caps),
        "lla-scad": lambda: baselines.lla(instance, options, "scad", caps, verbose),
        "lla-mcp": lambda: baselines.lla(instance, options, "mcp", caps, verbose),
        "mscr-cl1": lambda: baselines.mscr_cl1(instance, options, caps, verbose),
        "dca-trl1": lambda: baselines.dca_trl1(instance, options, caps, verbose),
    }
    if name not in dispatch:
        raise InvalidArgumentError(f"unknown solver {name!r}; expected one of {SOLVER_NAMES}")
    return dispatch[name]()


def metrics_row(
    solver: str,
    instance: ProblemInstance,
    trace: SolveTrace,
    truth: Optional[GroundTruth] = None,
    c_lambda: Optional[float] = None,
    seed: Any = None,
    record_time: bool = False,
) -> Dict[str, Any]:
    """One metrics row; relerr needs a nonzero ground truth, time_s needs record_time."""
    x = trace.final_x
    relerr = None
    if truth is not None and np.any(truth.x_bar):
        relerr = relative_error(x, truth)
    return {
        "solver": solver,
        "lambda": trace.lam,
        "c_lambda": c_lambda,
        "seed": seed,
        "relerr": relerr,
        "nnz": nnz_count(x),
        "loss": loss(instance, x),
        "time_s": trace.total_time if record_time else None,
        "outer_iters": trace.outer_iters,
        "inexactness": trace.max_inexactness,
    }


@dataclass(frozen=True)
class SweepCell:
    preset: str
    m: int
    solver: str
    c_lambda: float
    seed: int
    noise_std: float = 1.0
    overrides: Tuple[Tuple[str, float], ...] = ()
    record_time: bool = False
    config: Optional[Dict[str, Any]] = field(default=None, compare=False, hash=False)

    @property
    def label(self) -> str:
        if not self.overrides:
            return self.solver
        inner = ",".join(f"{key}={value:g}" for key, value in self.overrides)
        return f"{self.solver}({inner})"


@dataclass(frozen=True)
class SweepPlan:
    preset: str
    m: int
    solvers: Tuple[str, ...] = COMPARISON_SOLVERS
    c_lambdas: Tuple[float, ...] = (10.0,)
    seeds: Tuple[int, ...] = tuple(range(10))
    vary: str = "lambda"
    values: Tuple[float, ...] = ()
    rho: Optional[float] = None
    noise_std: float = 1.0
    record_time: bool = False

    def __post_init__(self) -> None:
        if self.vary not in VARY_MODES:
            raise InvalidArgumentError(f"vary must be one of {VARY_MODES}, got {self.vary!r}")
        unknown = [s for s in self.solvers if s not in SOLVER_NAMES]
        if unknown:
            raise InvalidArgumentError(f"unknown solvers {unknown}; expected names from {SOLVER_NAMES}")
        if self.vary != "lambda" and tuple(self.solvers) != ("iscra",):
            raise InvalidArgumentError(f"vary={self.vary} sweeps run iscra only")
        if not self.c_lambdas or not self.seeds or not self.solvers:
            raise InvalidArgumentError("a sweep needs at least one solver, c_lambda and seed")

    def cells(self, config: Optional[Dict[str, Any]] = None) -> List[SweepCell]:
        if self.vary == "lambda":
            variants: List[Tuple[Tuple[str, float], ...]] = [()]
        else:
            grid = self.values or (MU_GRID if self.vary == "mu" else RHO_GRID)
            variants = [((self.vary, float(v)),) for v in grid]
        extra = (("rho", self.rho),) if self.rho is not None and self.vary != "rho" else ()
        return [
            SweepCell(self.preset, self.m, solver, float(c), int(seed), self.noise_std,
                      variant + extra, self.record_time, config)
            for variant in variants
            for solver in self.solvers
            for c in self.c_lambdas
            for seed in self.seeds
        ]


@functools.lru_cache(maxsize=4)
def _instance(preset: str, m: int, seed: int, noise_std: float) -> Tuple[ProblemInstance, GroundTruth]:
    return gen_synthetic(preset_spec(preset, m, seed, noise_std))


def run_cell(cell: SweepCell) -> Tuple[Dict[str, Any], Optional[str]]:
    """Run one cell; returns (row, error message or None). Never raises for solver failures."""
    instance, truth = _instance(cell.preset, cell.m, cell.seed, cell.noise_std)
    lam = lambda_from_c(instance, cell.c_lambda)
    try:
        trace = run_solver(cell.solver, instance, lam, cell.config, **dict(cell.overrides))
    except (SparseIscraError, np.linalg.LinAlgError, ArithmeticError, ValueError) as e:
        row = {"solver": cell.label, "lambda": lam, "c_lambda": cell.c_lambda, "seed": cell.seed}
        return row, f"{cell.label} c_lambda={cell.c_lambda:g} seed={cell.seed}: {e}"
    row = metrics_row(cell.label, instance, trace, truth, cell.c_lambda, cell.seed, cell.record_time)
    return row, None


def _mean(values: Sequence[Any]) -> Optional[float]:
    present = [float(v) for v in values if v is not None]
    return float(np.mean(present)) if present else None


def mean_rows(rows: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """One mean row per (solver, c_lambda) group, in first-appearance order."""
    groups: Dict[Tuple[str, float], List[Dict[str, Any]]] = {}
    for row in rows:
        groups.setdefault((row["solver"], row["c_lambda"]), []).append(row)
    means = []
    for (solver, c_lambda), members in groups.items():
        ok = [r for r in members if r.get("loss") is not None]
        mean = {"solver": solver, "c_lambda": c_lambda, "seed": MEAN_SEED,
                "lambda": _mean([r.get("lambda") for r in members])}
        for column in ("relerr", "nnz", "loss", "time_s", "outer_iters", "inexactness"):
            mean[column] = _mean([r.get(column) for r in ok])
        means.append(mean)
    return means


def order_rows(rows: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Per-seed rows grouped by (solver, c_lambda), each group followed by its mean row."""
    groups: Dict[Tuple[str, float], List[Dict[str, Any]]] = {}
    for row in rows:
        groups.setdefault((row["solver"], row["c_lambda"]), []).append(row)
    ordered: List[Dict[str, Any]] = []
    for members in groups.values():
        members = sorted(members, key=lambda r: r["seed"])
        ordered.extend(members)
        ordered.extend(mean_rows(members))
    return ordered


def run_sweep(
    plan: SweepPlan,
    workers: int = 1,
    config: Optional[Dict[str, Any]] = None,
    show_progress: bool = True,
) -> List[Dict[str, Any]]:
    """
    Run every cell of a plan and return ordered rows (per-seed plus mean rows).

    Args:
        plan: Sweep definition
        workers: Worker processes; 1 runs in-process
        config: Configuration passed to every cell
        show_progress: tqdm bar when available

    Returns:
        List[Dict]: Metrics rows in deterministic order
    """
    cells = plan.cells(config)
    if workers > 1:
        with Pool(workers) as pool:
            results = list(progress(pool.imap(run_cell, cells), total=len(cells),
                                    desc=plan.preset, enabled=show_progress))
    else:
        results = [run_cell(cell) for cell in progress(cells, total=len(cells),
                                                       desc=plan.preset, enabled=show_progress)]
    rows = []
    for row, error in results:
        if error:
            print_colored(f"  cell failed: {error}", Fore.YELLOW)
        rows.append(row)
    return order_rows(rows)


EXAM54_M400_C = (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0)
EXAM54_M600_C = (0.01, 0.05, 0.1, 0.5, 1.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0)
EXAM55_M500_C = (0.05, 0.1, 0.5, 1.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0)
EXAM55_M700_C = (0.5, 1.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0)

# protocol name -> plans (seeds default to 0..9)
PROTOCOLS: Dict[str, Tuple[SweepPlan, ...]] = {
    "mu-sensitivity": (
        SweepPlan("exam51", 400, ("iscra",), (10.0,), vary="mu", rho=0.8),
        SweepPlan("exam52", 600, ("iscra",), (40.0,), vary="mu", rho=0.8),
    ),
    "rho-sensitivity": (
        SweepPlan("exam53", 400, ("iscra",), (10.0,), vary="rho"),
        SweepPlan("exam53", 600, ("iscra",), (10.0,), vary="rho"),
    ),
    "compare-exam54-m400": (SweepPlan("exam54", 400, COMPARISON_SOLVERS, EXAM54_M400_C),),
    "compare-exam54-m600": (SweepPlan("exam54", 600, COMPARISON_SOLVERS, EXAM54_M600_C),),
    "compare-exam55-m500": (SweepPlan("exam55", 500, COMPARISON_SOLVERS, EXAM55_M500_C),),
    "compare-exam55-m700": (SweepPlan("exam55", 700, COMPARISON_SOLVERS, EXAM55_M700_C),),
}


def protocol_plans(name: str, seeds: Optional[Sequence[int]] = None, record_time: bool = False) -> Tuple[SweepPlan, ...]:
    """
    Raises:
        InvalidArgumentError: Unknown protocol name
    """
    if name not in PROTOCOLS:
        raise InvalidArgumentError(f"unknown protocol {name!r}; expected one of {sorted(PROTOCOLS)}")
    updates: Dict[str, Any] = {"record_time": record_time}
    if seeds is not None:
        updates["seeds"] = tuple(int(s) for s in seeds)
    return tuple(replace(plan, **updates) for plan in PROTOCOLS[name])
