"""
simulate.py | Entry Point
Purpose: Command-line surface for curriculum experiments: Monte Carlo runs, curriculum enumeration,
active-regression property checks and figure data export.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: python-dotenv, pandas, numpy
Abstract Spec: Subcommands `run <config>`, `enumerate <config>`, `verify-active`, `plot-data <dir>`.
Flags override config values, which override .env defaults (CURRICULUM_SEED, CURRICULUM_JOBS,
CURRICULUM_OUTPUT_DIR). Exit status is 0 on success and 1 on any failure.
"""
import argparse
import sys
from dataclasses import replace
from pathlib import Path

from dotenv import load_dotenv

from core.errors import ConfigError
from core.file_utils import ensure_folder
from core.log_utils import log_event, set_log_path
from core.selectors import SELECTOR_KINDS
from ports.config_loader import add_config_arg, env_default, parse_config

load_dotenv()


def display_help(parser: argparse.ArgumentParser) -> None:
    print("\nCurriculum Simulators - active task selection for reinforcement learning\n")
    print("USAGE:")
    print("  python simulate.py <command> [ARGS] [FLAGS]\n")
    print("COMMANDS:")
    print("  run <config>          Monte Carlo runs of every configured selector")
    print("  enumerate <config>    Steps to convergence for every full-length curriculum")
    print("  verify-active         Active-regression property suites")
    print("  plot-data <dir>       Per-figure CSVs from a results folder\n")
    print("FLAGS (run / enumerate):")
    print("  --seed N              Master seed (config 'seed', then CURRICULUM_SEED)")
    print("  --runs N              Monte Carlo runs per selector (config 'n_runs')")
    print("  --jobs N              Worker processes (CURRICULUM_JOBS, default 1)")
    print("  --out DIR             Output folder (config 'output_dir', then CURRICULUM_OUTPUT_DIR)")
    print("  --selectors a,b       Subset of selectors to run")
    print("  --verbose             Write tagged events to <out>/logs.txt\n")
    print("EXAMPLES:")
    print("  python simulate.py run user_inputs/experiments/maze.json --jobs 8")
    print("  python simulate.py run user_inputs/experiments/cartpole.json --selectors baseline,rmgs,ltms")
    print("  python simulate.py enumerate user_inputs/experiments/maze.json --runs 10 --out results/enum")
    print("  python simulate.py verify-active")
    print("  python simulate.py plot-data results/maze")
    print()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate.py", description="Curriculum Simulators")
    sub = parser.add_subparsers(dest="command")

    def common(p: argparse.ArgumentParser) -> None:
        add_config_arg(p)
        p.add_argument("--seed", type=int, default=None, help="Master seed")
        p.add_argument("--runs", type=int, default=None, help="Monte Carlo runs per selector")
        p.add_argument("--jobs", type=int, default=None, help="Worker processes")
        p.add_argument("--out", type=str, default=None, help="Output folder")
        p.add_argument("--verbose", action="store_true", help="Enable verbose logging")

    run_p = sub.add_parser("run", help="Monte Carlo runs of every configured selector")
    common(run_p)
    run_p.add_argument("--selectors", type=str, default=None, help="Comma-separated subset of selectors")
    common(sub.add_parser("enumerate", help="Enumerate every full-length curriculum"))

    verify_p = sub.add_parser("verify-active", help="Active-regression property suites")
    verify_p.add_argument("--fault", type=float, default=None, help="Perturb A in the trace-identity suite")
    verify_p.add_argument("--verbose", action="store_true", help="Enable verbose logging")

    plot_p = sub.add_parser("plot-data", help="Per-figure CSVs from a results folder")
    plot_p.add_argument("results_dir", type=str, help="Folder written by run/enumerate")
    plot_p.add_argument("--verbose", action="store_true", help="Enable verbose logging")
    return parser


def resolve_config(args):
    """
    Purpose: Apply CLI and .env overrides to a parsed config.
    Inputs: args (argparse.Namespace)
    Outputs: (ExperimentConfig, jobs, output folder Path)
    Role: Precedence is flag, then config file, then .env.
    """
    config = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.runs is not None:
        if args.runs < 1:
            raise ConfigError("--runs", f"must be >= 1, got {args.runs}")
        overrides["n_runs"] = args.runs
    if args.out:
        overrides["output_dir"] = args.out
    config = replace(config, **overrides)
    jobs = args.jobs if args.jobs is not None else env_default("CURRICULUM_JOBS", int, 1)
    if jobs < 1:
        raise ConfigError("--jobs", f"must be >= 1, got {jobs}")
    return config, jobs, ensure_folder(config.output_dir)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] in ("-h", "--help"):
        display_help(parser)
        return 0
    args = parser.parse_args(argv)
    try:
        if args.command == "verify-active":
            from core.verify_active import verify_active
            report = verify_active(fault=args.fault, verbose=args.verbose)
            for res in report:
                print(res.line())
            return 0 if all(r.passed for r in report) else 1

        if args.command == "plot-data":
            from core.plot_data import emit_plot_data
            if args.verbose:
                set_log_path(str(Path(args.results_dir) / "logs.txt"))
            status = emit_plot_data(args.results_dir, verbose=args.verbose)
            for figure, state in status.items():
                print(f"{figure}: {state}")
            return 0

        config, jobs, out = resolve_config(args)
        if args.verbose:
            set_log_path(str(out / "logs.txt"))
        log_event(f"[START] {args.command} {args.config} seed={config.seed} runs={config.n_runs} jobs={jobs}", args.verbose)

        if args.command == "run":
            from core.harness import monte_carlo
            selectors = None
            if args.selectors:
                selectors = [s.strip() for s in args.selectors.split(",") if s.strip()]
                for s in selectors:
                    if s not in SELECTOR_KINDS:
                        raise ConfigError("--selectors", f"unknown selector {s!r}; choose from {', '.join(SELECTOR_KINDS)}")
                if "fixed" in selectors and config.fixed_order is None:
                    raise ConfigError("fixed_order", "required to run the 'fixed' selector")
            result = monte_carlo(config, jobs=jobs, selectors=selectors, out_dir=out, verbose=args.verbose)
            print(f"Wrote results for {config.name} to {out}")
            if result.failed:
                print(f"[ERROR] {len(result.failures)} run(s) failed; see {out / 'failures.csv'}")
                return 1
            return 0

        if args.command == "enumerate":
            from core.harness import enumerate_curricula
            table = enumerate_curricula(config, jobs=jobs, out_dir=out, verbose=args.verbose)
            print(f"Wrote {len(table)} rows to {out / 'enumerate.csv'}")
            if table.attrs.get("failed_runs"):
                print(f"[ERROR] {table.attrs['failed_runs']} run(s) failed; see {out / 'failures.csv'}")
                return 1
            return 0
    except Exception as e:
        print(str(e))
        log_event(f"[ERROR] {e}", getattr(args, "verbose", False))
        return 1
    display_help(parser)
    return 1


if __name__ == "__main__":
    sys.exit(main())
