"""Command-line entry point.

Subcommands:
    solve    load a problem, run the two-step pipeline (norm estimation,
             then PDHG) on the chosen backend, write solution/trace/telemetry
    compare  relative-error report between two solution files
    suite    run every instance in a directory and print one summary table

Exit codes: 0 optimal; 3 iteration limit; 4 numerical failure;
5 invalid input (parse/validation); 6 I/O error; 2 is argparse usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .accel import ExactBackend
from .io import ParseError, load_problem, read_solution, write_solution
from .pdhg import (
    STATUS_ITERATION_LIMIT,
    STATUS_NUMERICAL_FAILURE,
    STATUS_OPTIMAL,
    PdhgConfig,
    Solution,
    pdhg_solve,
    write_trace,
)
from .problem import ProblemError, recover_solution, to_standard_form
from .rram import ProfileError, RramBackend, bundled_profile, profile_from_file

EXIT_OPTIMAL = 0
EXIT_ITERATION_LIMIT = 3
EXIT_NUMERICAL_FAILURE = 4
EXIT_INPUT_ERROR = 5
EXIT_IO_ERROR = 6

PROFILE_DIR_ENV = "XBARLP_PROFILE_DIR"


def _resolve_profile(spec: str):
    """Profile lookup order: explicit path, $XBARLP_PROFILE_DIR, bundled."""
    if os.path.sep in spec or spec.endswith(".json"):
        return profile_from_file(spec)
    env_dir = os.environ.get(PROFILE_DIR_ENV)
    if env_dir:
        cand = Path(env_dir) / f"{spec}.json"
        if cand.exists():
            return profile_from_file(str(cand))
    return bundled_profile(spec)


def _make_backend(args):
    if args.backend == "exact":
        return ExactBackend()
    profile = _resolve_profile(args.profile)
    return RramBackend(profile, seed=args.seed)


def _config_from_args(args) -> PdhgConfig:
    return PdhgConfig(
        max_iters=args.max_iters,
        tolerance=args.tol,
        eta=args.eta,
        gamma=args.gamma,
        ruiz_iters=args.ruiz_iters,
        lanczos_max=args.lanczos_max,
        seed=args.seed,
        check_interval=args.check_interval,
    )


def _status_exit(status: str) -> int:
    return {
        STATUS_OPTIMAL: EXIT_OPTIMAL,
        STATUS_ITERATION_LIMIT: EXIT_ITERATION_LIMIT,
        STATUS_NUMERICAL_FAILURE: EXIT_NUMERICAL_FAILURE,
    }[status]


def _solution_payload(problem, std, sol: Solution, args) -> dict:
    x_boxed = recover_solution(std, sol.x_orig)
    return {
        "name": problem.name or Path(args.problem).stem,
        "status": sol.status,
        "iterations": sol.iterations,
        "backend": args.backend,
        "seed": args.seed,
        "objective": sol.objective,
        "objective_boxed": problem.objective_value(x_boxed),
        "x": x_boxed,
        "x_standard": sol.x_orig,
        "y": sol.y_orig,
        "residuals": sol.residuals.as_dict(),
        "scaled_residuals": sol.scaled_residuals.as_dict(),
        "norm_estimate": sol.norm_estimate.sigma1,
        "scaling": sol.scaling.as_dict(),
    }


def _print_summary(sol: Solution, file=sys.stdout) -> None:
    led = sol.telemetry
    print(f"status      : {sol.status}", file=file)
    print(f"objective   : {sol.objective:.10g}", file=file)
    print(f"iterations  : {sol.iterations}", file=file)
    r = sol.residuals
    print(f"residuals   : pri={r.r_pri:.3e} dual={r.r_dual:.3e} "
          f"bounds={r.r_iter:.3e} gap={r.gap:.3e}", file=file)
    print(f"norm est    : {sol.norm_estimate.sigma1:.10g} "
          f"({sol.norm_estimate.iters_used} Lanczos steps)", file=file)
    print("phase         energy [J]     latency [s]    MVMs", file=file)
    for phase in ("encode", "lanczos", "pdhg"):
        print(f"  {phase:<10}  {led.phase_energy(phase):<13.6e}  "
              f"{led.phase_latency(phase):<13.6e}  {led.phase_mvm_calls(phase)}",
              file=file)
    print(f"  {'total':<10}  {led.energy_j:<13.6e}  {led.latency_s:<13.6e}  "
          f"{led.n_mvm_calls}", file=file)


def cmd_solve(args) -> int:
    try:
        problem = load_problem(args.problem, args.format)
    except FileNotFoundError as e:
        print(f"error: cannot open problem file: {e}", file=sys.stderr)
        return EXIT_IO_ERROR
    except (ParseError, ProblemError) as e:
        print(f"error: invalid problem: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        std = to_standard_form(problem)
        backend = _make_backend(args)
        cfg = _config_from_args(args)
        sol = pdhg_solve(std, cfg, backend)
    except (ProblemError, ProfileError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.problem).stem
    sol_path = args.solution_out or out_dir / f"{stem}.solution.json"
    trace_path = args.trace_out or out_dir / f"{stem}.trace.csv"
    telem_path = args.telemetry_out or out_dir / f"{stem}.telemetry.json"
    try:
        write_solution(str(sol_path), _solution_payload(problem, std, sol, args))
        write_trace(str(trace_path), sol)
        sol.telemetry.write_report(str(telem_path))
    except OSError as e:
        print(f"error: cannot write outputs: {e}", file=sys.stderr)
        return EXIT_IO_ERROR

    _print_summary(sol)
    if args.verbose:
        hist = ", ".join(f"{t:.6g}" for t in sol.norm_estimate.theta_history)
        print(f"lanczos ritz trace: [{hist}]")
        print(f"outputs: {sol_path} {trace_path} {telem_path}")
    return _status_exit(sol.status)


def cmd_compare(args) -> int:
    try:
        evaluated = read_solution(args.solution)
        reference = read_solution(args.reference)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO_ERROR
    except json.JSONDecodeError as e:
        print(f"error: bad solution file: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    z_star = float(evaluated["objective"])
    z = float(reference["objective"])
    delta_rel = abs(z - z_star) / abs(z) if z != 0 else abs(z_star)
    print(f"objective (evaluated) : {z_star:.10g}")
    print(f"objective (reference) : {z:.10g}")
    print(f"relative error        : {delta_rel:.6e}")
    for key in ("primal", "dual", "bounds"):
        a = evaluated.get("residuals", {}).get(key)
        b = reference.get("residuals", {}).get(key)
        if a is not None and b is not None:
            print(f"residual {key:<7}      : {a:.3e} vs {b:.3e}")
    return EXIT_OPTIMAL


def cmd_suite(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return EXIT_IO_ERROR
    paths = sorted(p for p in root.iterdir() if p.suffix.lower() in (".json", ".mps"))
    if not paths:
        print(f"error: no .json/.mps instances in {root}", file=sys.stderr)
        return EXIT_IO_ERROR

    backends: list[tuple[str, str | None]] = [("exact", None)]
    for prof in args.profile or []:
        backends.append(("rram", prof))

    rows = []
    worst = EXIT_OPTIMAL
    for path in paths:
        reference_obj = None
        for backend_name, prof in backends:
            run_args = argparse.Namespace(**vars(args))
            run_args.problem = str(path)
            run_args.backend = backend_name
            run_args.profile = prof or "taox-hfox"
            try:
                problem = load_problem(str(path), None)
                std = to_standard_form(problem)
                backend = _make_backend(run_args)
                sol = pdhg_solve(std, _config_from_args(run_args), backend)
            except (ParseError, ProblemError, ProfileError, ValueError) as e:
                print(f"error: {path.name}: {e}", file=sys.stderr)
                worst = max(worst, EXIT_INPUT_ERROR)
                continue
            label = backend_name if prof is None else f"rram:{prof}"
            if backend_name == "exact":
                reference_obj = sol.objective
                gap = 0.0
            elif reference_obj not in (None, 0.0):
                gap = abs(sol.objective - reference_obj) / abs(reference_obj)
            else:
                gap = float("nan")
            led = sol.telemetry
            rows.append((
                path.stem, label, sol.status, sol.iterations, sol.objective, gap,
                led.phase_energy("lanczos"), led.phase_latency("lanczos"),
                led.phase_energy("pdhg"), led.phase_latency("pdhg"),
            ))
            if args.out_dir:
                out = Path(args.out_dir)
                out.mkdir(parents=True, exist_ok=True)
                tag = label.replace(":", "-")
                write_solution(str(out / f"{path.stem}.{tag}.solution.json"),
                               _solution_payload(problem, std, sol, run_args))
            worst = max(worst, _status_exit(sol.status))

    hdr = (f"{'instance':<16} {'backend':<16} {'status':<16} {'iters':>7} "
           f"{'objective':>14} {'gap':>10} {'E_lanczos':>11} {'t_lanczos':>11} "
           f"{'E_pdhg':>11} {'t_pdhg':>11}")
    print(hdr)
    print("-" * len(hdr))
    for r in rows:
        print(f"{r[0]:<16.16} {r[1]:<16.16} {r[2]:<16.16} {r[3]:>7} "
              f"{r[4]:>14.6g} {r[5]:>10.2e} {r[6]:>11.4e} {r[7]:>11.4e} "
              f"{r[8]:>11.4e} {r[9]:>11.4e}")
    return worst


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["native-json", "mps-subset"], default=None,
                   help="problem format (default: by file extension)")
    p.add_argument("--backend", choices=["exact", "rram"], default="exact")
    p.add_argument("--profile", default="taox-hfox",
                   help="device profile name or JSON path (rram backend)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--eta", type=float, default=0.95)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--ruiz-iters", type=int, default=10)
    p.add_argument("--lanczos-max", type=int, default=100)
    p.add_argument("--check-interval", type=int, default=1)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--trace-out", default=None)
    p.add_argument("--telemetry-out", default=None)
    p.add_argument("--solution-out", default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xbarlp",
                                     description="LP solver on a simulated "
                                                 "crossbar accelerator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem file")
    p_solve.add_argument("--problem", required=True)
    _add_solver_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_cmp = sub.add_parser("compare", help="relative error between two solutions")
    p_cmp.add_argument("--solution", required=True, help="solution under evaluation")
    p_cmp.add_argument("--reference", required=True, help="ground-truth solution")
    p_cmp.set_defaults(func=cmd_compare)

    p_suite = sub.add_parser("suite", help="run all instances in a directory")
    p_suite.add_argument("--dir", required=True)
    _add_solver_flags(p_suite)
    # suite-specific: --profile may repeat; exact always runs first
    for a in p_suite._actions:
        if a.dest == "profile":
            a.default = None
            a.nargs = "*"
            a.help = "rram profiles to run in addition to the exact backend"
    p_suite.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # numpy warnings should not crash a batch run; diagnostics go to stderr
    with np.errstate(over="warn", invalid="warn"):
        return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
