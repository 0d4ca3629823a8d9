"""
Core Orchestration Module for sparse_iscra

Command-line harness around the solvers, diagnostics and experiment
helpers. Every subcommand follows the same short workflow: load the
configuration, build the instance, run, then write artifacts and print a
summary table.

Subcommands:
    solve      one solver on one instance; writes solution JSON, trace JSON
               and a one-row metrics CSV
    sweep      c_lambda / mu / rho sweeps over seeded synthetic instances,
               or a named protocol (mu-sensitivity, rho-sensitivity, compare-exam54-m400, ...)
    diagnose   theory constants and null-space verdicts as a JSON report
    verify     acceptance checks; exit code 0 iff nothing FAILs

Instance sources (solve / diagnose):
    --preset exam31|exam41|exam42        toy instances (exam41 takes --e)
    --preset exam51..exam55 --m M        seeded synthetic instances (--seed, --noise-std)
    --libsvm PATH [--poly P]             LIBSVM file, optional polynomial expansion

lambda is given as --lambda, --clambda (lam = c/m * ||A^T b||_inf) or
--m-lambda (lam = value/m); the default is --clambda from the iscra config
section.

Error Handling:
    Library errors (SparseIscraError) and file errors (OSError) are printed
    in red and turn into exit code 1; argparse usage errors exit with 2.

Usage:
    python3 run.py solve --preset exam41 --e 0.05 --solver iscra --lambda 0.1 --rho 0.8
    python3 run.py sweep --protocol compare-exam54-m400 --workers 4
    python3 run.py diagnose --preset exam31 --lambda 0.1
    python3 run.py verify --full

Version: 1.0.0
"""

import argparse
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .analysis.diagnostics import diagnose
from .analysis.nsp import KIND_NSP, KIND_REC, KIND_RRNSP, NspQuery
from .data.libsvm_io import read_libsvm
from .data.poly_expand import poly_expand
from .data.synthetic import PRESETS, gen_synthetic, preset_spec
from .data.toy_instances import TOY_NAMES, exam31_lasso_distance, toy_instance
from .experiments.acceptance import FAIL, PASS, SKIP, VerifyOptions, run_checks
from .experiments.sweep import (
    MEAN_SEED, PROTOCOLS, SOLVER_NAMES, VARY_MODES, SweepPlan,
    metrics_row, protocol_plans, run_solver, run_sweep,
)
from .models.problem import (
    TERMINATION_MODES, GroundTruth, ProblemInstance, lambda_from_c,
    loss, nnz_count, relative_error,
)
from .solver.iscra import postprocess
from .utils.config import BASE_DIR, get_section, load_solver_config, merge_config
from .utils.console import Fore, print_colored, print_grid, print_metric_table, print_step
from .utils.csv_utils import write_metrics_csv
from .utils.errors import InvalidArgumentError, SparseIscraError
from .utils.json_utils import dump_json

REPORTS_DIR = BASE_DIR / "reports"

INSTANCE_PRESETS = TOY_NAMES + tuple(PRESETS)


def _timestamp() -> str:
    return datetime.now().isoformat(timespec="seconds")


# ===================================================================
# Instance and lambda resolution
# ===================================================================

def load_instance(args: argparse.Namespace) -> Tuple[ProblemInstance, Optional[GroundTruth], Dict[str, Any]]:
    """
    Build the instance named by the command-line arguments.

    Returns:
        Tuple: (instance, ground truth or None, source description for artifacts)

    Raises:
        InvalidArgumentError: No source given, unknown preset, or --m missing
        ParseError / OSError: LIBSVM file problems
    """
    if args.libsvm:
        instance, column_map = read_libsvm(args.libsvm, args.n_features)
        source: Dict[str, Any] = {"libsvm": str(args.libsvm), "column_map": list(column_map)}
        if args.poly:
            expanded = poly_expand(instance.A, args.poly)
            instance = ProblemInstance(expanded, instance.b, name=f"{instance.name}{args.poly}")
            source["poly"] = args.poly
        return instance, None, source

    if args.synthetic:
        args.preset = args.synthetic
    if not args.preset:
        raise InvalidArgumentError("an instance source is required: --preset NAME, --synthetic NAME or --libsvm PATH")
    if args.preset in TOY_NAMES:
        instance, truth = toy_instance(args.preset, args.e)
        return instance, truth, {"preset": args.preset, "e": args.e if args.preset == "exam41" else None}
    if args.preset in PRESETS:
        if not args.m:
            raise InvalidArgumentError(f"synthetic preset {args.preset} needs --m")
        instance, truth = gen_synthetic(preset_spec(args.preset, args.m, args.seed, args.noise_std))
        return instance, truth, {"preset": args.preset, "m": args.m, "seed": args.seed, "noise_std": args.noise_std}
    raise InvalidArgumentError(f"unknown preset {args.preset!r}; expected one of {INSTANCE_PRESETS}")


def resolve_lambda(args: argparse.Namespace, instance: ProblemInstance,
                   config: Dict[str, Any]) -> Tuple[float, Optional[float]]:
    """
    Returns:
        Tuple[float, Optional[float]]: (lambda, c_lambda when lambda came from it)
    """
    if args.lam is not None:
        if not args.lam > 0:
            raise InvalidArgumentError(f"--lambda must be positive, got {args.lam}")
        return args.lam, None
    if args.m_lambda is not None:
        if not args.m_lambda > 0:
            raise InvalidArgumentError(f"--m-lambda must be positive, got {args.m_lambda}")
        return args.m_lambda / instance.m, None
    c_lambda = args.clambda if args.clambda is not None else float(get_section("iscra", config)["c_lambda"])
    lam = lambda_from_c(instance, c_lambda)
    if not lam > 0:
        raise InvalidArgumentError("A^T b = 0, so c_lambda gives lambda = 0; pass --lambda")
    return lam, c_lambda


def _with_tolerance(config: Dict[str, Any], tol: Optional[float]) -> Dict[str, Any]:
    if tol is None:
        return config
    return merge_config(config, {"baselines": {"inner_tolerance": tol}})


# ===================================================================
# Subcommands
# ===================================================================

def cmd_solve(args: argparse.Namespace) -> int:
    """
    Run one solver and write solution, trace summary and metrics artifacts.

    Artifacts (in --out):
        <instance>_<solver>_solution.json
        <instance>_<solver>_trace.json
        <instance>_<solver>_metrics.csv
    """
    config = _with_tolerance(load_solver_config(override_path=args.config), args.tol)

    print_step(1, "Load instance")
    instance, truth, source = load_instance(args)
    lam, c_lambda = resolve_lambda(args, instance, config)
    print_colored(f"  {instance.name}: m={instance.m}, n={instance.n}, lambda={lam:.6g}", Fore.CYAN)

    print_step(2, f"Solve with {args.solver}")
    overrides = {"rho": args.rho, "mu": args.mu, "epsilon": args.epsilon,
                 "inner_tolerance": args.tol, "termination": args.termination}
    trace = run_solver(args.solver, instance, lam, config, verbose=args.verbose,
                       **(overrides if args.solver == "iscra" else {}))
    x = trace.final_x
    x_post = postprocess(instance, trace) if args.postprocess and args.solver == "iscra" else None

    print_step(3, "Write artifacts")
    out_dir = Path(args.out)
    stem = f"{instance.name}_{args.solver}"
    solution = {"instance": instance.name, "source": source, "solver": args.solver, "lambda": lam,
                "c_lambda": c_lambda, "x": x, "x_postprocessed": x_post}
    row = metrics_row(args.solver, instance, trace, truth, c_lambda,
                      args.seed if args.preset in PRESETS else None, args.record_time)
    paths = [
        dump_json(solution, out_dir / f"{stem}_solution.json"),
        dump_json(trace.summary(), out_dir / f"{stem}_trace.json"),
        write_metrics_csv(out_dir / f"{stem}_metrics.csv", [row], _timestamp()),
    ]
    for path in paths:
        print_colored(f"  wrote {path}", Fore.GREEN)

    rows: List[Tuple[str, object]] = [
        ("solver", args.solver),
        ("status", trace.status),
        ("lambda", lam),
        ("outer_iters", trace.outer_iters),
        ("nnz", nnz_count(x)),
        ("loss", loss(instance, x)),
        ("max inexactness", trace.max_inexactness),
        ("relerr", row["relerr"]),
    ]
    if x_post is not None:
        rows.append(("loss (postprocessed)", loss(instance, x_post)))
        if truth is not None and np.any(truth.x_bar):
            rows.append(("relerr (postprocessed)", relative_error(x_post, truth)))
    if args.preset in ("exam31", "exam42") and args.solver == "lasso" and lam < 0.25:
        rows.append(("distance to Lasso family", exam31_lasso_distance(x, lam)))
    if instance.n <= 10:
        rows.append(("x", np.array2string(np.asarray(x), precision=6)))
    print_metric_table(rows, title=f"\nSummary ({instance.name})")
    return 0


def _sweep_plans(args: argparse.Namespace, config: Dict[str, Any]) -> Tuple[SweepPlan, ...]:
    section = get_section("sweep", config)
    seeds = args.seeds
    if args.protocol:
        return protocol_plans(args.protocol, seeds, args.record_time)
    if not args.synthetic or not args.m:
        raise InvalidArgumentError("sweep needs --protocol NAME or --synthetic PRESET --m M")
    if seeds is None:
        base = int(section["base_seed"])
        seeds = range(base, base + int(section["seeds"]))
    solvers = tuple(args.solvers) if args.solvers else ("iscra",)
    c_lambdas = tuple(args.clambdas) if args.clambdas else (float(get_section("iscra", config)["c_lambda"]),)
    return (SweepPlan(
        preset=args.synthetic,
        m=args.m,
        solvers=solvers,
        c_lambdas=c_lambdas,
        seeds=tuple(int(s) for s in seeds),
        vary=args.vary,
        values=tuple(args.values or ()),
        rho=args.rho,
        noise_std=args.noise_std,
        record_time=args.record_time,
    ),)


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run every plan and write one metrics CSV per plan."""
    config = load_solver_config(override_path=args.config)
    plans = _sweep_plans(args, config)
    workers = args.workers if args.workers is not None else int(get_section("sweep", config)["workers"])
    out_dir = Path(args.out)

    for number, plan in enumerate(plans, start=1):
        print_step(number, f"Sweep {plan.preset} m={plan.m} vary={plan.vary} ({len(plan.cells(config))} cells)")
        rows = run_sweep(plan, workers=workers, config=config)
        name = f"sweep_{args.protocol}_{number}" if args.protocol else f"sweep_{plan.preset}_m{plan.m}_{plan.vary}"
        path = write_metrics_csv(out_dir / f"{name}.csv", rows, _timestamp())
        print_colored(f"  wrote {path} ({len(rows)} rows)", Fore.GREEN)
        means = [r for r in rows if r["seed"] == MEAN_SEED]
        print_grid([[r["solver"], r["c_lambda"], r["relerr"], r["nnz"], r["loss"], r["outer_iters"]] for r in means],
                   headers=["solver", "c_lambda", "relerr", "nnz", "loss", "outer_iters"])
    return 0


def toy_nsp_queries(name: str, truth: GroundTruth, gamma: float, tau: float) -> List[NspQuery]:
    """Default null-space queries for the toy presets."""
    if name not in TOY_NAMES:
        return []
    r = truth.r
    return [
        NspQuery(KIND_NSP, r=r, gamma=gamma, tau=tau),
        NspQuery(KIND_RRNSP, r=r, l=r, eta=0.0, M=float(np.max(np.abs(truth.x_bar))), gamma=gamma, tau=tau),
        NspQuery(KIND_REC, r=r, c=2.0),
    ]


def cmd_diagnose(args: argparse.Namespace) -> int:
    """Write <instance>_diagnostics.json and print the headline numbers."""
    config = load_solver_config(override_path=args.config)

    print_step(1, "Load instance")
    instance, truth, source = load_instance(args)
    lam, _ = resolve_lambda(args, instance, config)

    print_step(2, "Compute diagnostics")
    queries = toy_nsp_queries(args.preset, truth, args.gamma, args.tau) if truth is not None else []
    report = diagnose(instance, truth, lam, gamma=args.gamma, tau=args.tau,
                      mu=args.mu if args.mu is not None else float(get_section("iscra", config)["mu"]),
                      rho=args.rho if args.rho is not None else float(get_section("iscra", config)["rho"]),
                      nsp_queries=queries, config=config, seed=args.seed)

    print_step(3, "Write report")
    payload = {"instance": instance.name, "source": source, "lambda": lam, **report.to_dict()}
    path = dump_json(payload, Path(args.out) / f"{instance.name}_diagnostics.json")
    print_colored(f"  wrote {path}", Fore.GREEN)

    rows: List[Tuple[str, object]] = [
        ("lambda", lam),
        ("||A||_2", report.spectral_norm),
        ("kappa", report.kappa),
        ("M_hat", report.m_hat),
        ("M", report.m_cap),
        ("lambda floor", report.lambda_floor),
        ("beta_0 (exact)", report.beta0_exact),
        ("assumption", report.assumption),
    ]
    rows.extend((f"sigma_A({l})", value) for l, value in sorted(report.sigma_a.items())[:6])
    if report.oracle is not None and instance.n <= 10:
        rows.append(("oracle", np.array2string(np.array(report.oracle), precision=6)))
    for verdict in report.nsp_verdicts:
        rows.append((verdict["query"]["kind"], verdict["verdict"]))
    print_metric_table(rows, title=f"\nDiagnostics ({instance.name})")
    for key, note in report.notes.items():
        print_colored(f"  note [{key}]: {note}", Fore.YELLOW)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the acceptance checks; nonzero exit when any check fails."""
    print_step(1, "Acceptance checks" + (" (full)" if args.full else ""))
    options = VerifyOptions(lam41=args.lambda41, full=args.full, seed=args.seed)
    results = run_checks(options, only=args.only)
    print_grid([[r.number, r.name, r.status, f"{r.elapsed:.2f}s", r.detail] for r in results],
               headers=["#", "check", "status", "time", "detail"])

    failed = [r.name for r in results if r.status == FAIL]
    skipped = sum(r.status == SKIP for r in results)
    passed = sum(r.status == PASS for r in results)
    if failed:
        print_colored(f"\n{len(failed)} check(s) failed: {', '.join(failed)}", Fore.RED)
        return 1
    print_colored(f"\nAll checks passed ({passed} passed, {skipped} skipped).", Fore.GREEN)
    return 0


# ===================================================================
# Argument parsing
# ===================================================================

def _add_instance_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--preset", choices=INSTANCE_PRESETS, help="toy or synthetic preset")
    source.add_argument("--synthetic", choices=sorted(PRESETS), help="synthetic preset (same as --preset)")
    source.add_argument("--libsvm", metavar="PATH", help="LIBSVM data file")
    parser.add_argument("--e", type=float, default=0.05, help="exam41 noise level (default: 0.05)")
    parser.add_argument("--m", type=int, help="rows of a synthetic preset")
    parser.add_argument("--noise-std", type=float, default=1.0, help="synthetic noise level (default: 1)")
    parser.add_argument("--poly", type=int, metavar="ORDER", help="polynomial expansion order for --libsvm")
    parser.add_argument("--n-features", type=int, help="declared LIBSVM feature count")


def _add_lambda_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="lam", type=float, help="regularization parameter")
    group.add_argument("--clambda", type=float, help="lambda = c/m * ||A^T b||_inf")
    group.add_argument("--m-lambda", type=float, help="lambda = value/m")


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    parser.add_argument("--config", metavar="PATH", help="JSON file merged over config/solver_config.json")
    parser.add_argument("--out", default=str(REPORTS_DIR), help="output directory (default: reports/)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparse_iscra",
        description="Sequential truncated-l1 sparse regression: solve, sweep, diagnose, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solver on one instance")
    _add_instance_arguments(solve)
    _add_lambda_arguments(solve)
    _add_common_arguments(solve)
    solve.add_argument("--solver", choices=SOLVER_NAMES, default="iscra")
    solve.add_argument("--rho", type=float, help="selection ratio (iscra)")
    solve.add_argument("--mu", type=float, help="box radius of identified coordinates (iscra)")
    solve.add_argument("--epsilon", type=float, help="theory stopping threshold (iscra)")
    solve.add_argument("--tol", type=float, help="inner solver tolerance")
    solve.add_argument("--termination", choices=TERMINATION_MODES, help="stopping rule (iscra)")
    solve.add_argument("--postprocess", action="store_true", help="least squares on the identified support")
    solve.add_argument("--record-time", action="store_true", help="fill the time_s column")
    solve.add_argument("-v", "--verbose", action="store_true", help="one line per outer iteration")
    solve.set_defaults(handler=cmd_solve)

    sweep = sub.add_parser("sweep", help="run a parameter sweep over seeded synthetic instances")
    _add_common_arguments(sweep)
    sweep.add_argument("--protocol", choices=sorted(PROTOCOLS), help="named experiment grid")
    sweep.add_argument("--synthetic", choices=sorted(PRESETS), help="synthetic preset")
    sweep.add_argument("--m", type=int, help="rows per instance")
    sweep.add_argument("--noise-std", type=float, default=1.0)
    sweep.add_argument("--solvers", nargs="+", choices=SOLVER_NAMES)
    sweep.add_argument("--clambdas", nargs="+", type=float, help="c_lambda grid")
    sweep.add_argument("--vary", choices=VARY_MODES, default="lambda")
    sweep.add_argument("--values", nargs="+", type=float, help="mu or rho grid for --vary mu|rho")
    sweep.add_argument("--rho", type=float, help="fixed rho for --vary mu")
    sweep.add_argument("--seeds", nargs="+", type=int, help="explicit seeds (default from config)")
    sweep.add_argument("--workers", type=int, help="worker processes")
    sweep.add_argument("--record-time", action="store_true", help="fill the time_s column")
    sweep.set_defaults(handler=cmd_sweep)

    diag = sub.add_parser("diagnose", help="theory constants and null-space verdicts")
    _add_instance_arguments(diag)
    _add_lambda_arguments(diag)
    _add_common_arguments(diag)
    diag.add_argument("--gamma", type=float, default=0.5)
    diag.add_argument("--tau", type=float, default=200.0)
    diag.add_argument("--mu", type=float)
    diag.add_argument("--rho", type=float)
    diag.set_defaults(handler=cmd_diagnose)

    verify = sub.add_parser("verify", help="run the acceptance checks")
    verify.add_argument("--full", action="store_true", help="include the slow synthetic checks")
    verify.add_argument("--lambda41", type=float, default=0.1, help="lambda of the exam41 checks")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--only", nargs="+", metavar="CHECK", help="run only the named checks")
    verify.set_defaults(handler=cmd_verify)
    return parser


def run_tool(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and dispatch to a subcommand.

    Returns:
        int: Exit code (0 success, 1 failure)
    """
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (SparseIscraError, OSError) as e:
        print_colored(f"\nError: {e}", Fore.RED)
        return 1


if __name__ == "__main__":
    raise SystemExit(run_tool())
