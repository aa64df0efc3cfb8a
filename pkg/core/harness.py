"""
core/harness.py | Monte Carlo Experiment Harness
Purpose: Execute independent runs of every configured selector across seeds, aggregate reward-vs-steps
curves, and enumerate all full-length curricula.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: pandas, numpy
Abstract Spec: Run i of every selector uses the child seed derived from (master seed, i), so selectors are
compared on identical random streams. Runs execute in a ProcessPoolExecutor; results are sorted by
(selector, run id) before anything is written, so output bytes do not depend on worker scheduling.
A failed run is recorded in failures.csv, left out of the aggregates, and makes the CLI exit nonzero.
"""
import itertools
import math
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from adapters.results_writer import (
    AGGREGATE_COLUMNS,
    CURRICULA_COLUMNS,
    ENUMERATE_COLUMNS,
    FAILURE_COLUMNS,
    RECORD_COLUMNS,
    SUMMARY_COLUMNS,
    frame,
    write_csv,
    write_records,
    write_summary,
)
from core.log_utils import get_log_path, log_event, set_log_path
from core.mdp import child_seed, make_rng
from core.orchestrator import RunSettings, run_active_simulators, time_to_threshold, total_reward
from core.selectors import SelectorSettings
from core.task_builder import build_agent, build_tasks
from ports.config_loader import ExperimentConfig


@dataclass
class RunOutput:
    selector: str
    run_id: int
    seed: int
    order: Optional[Tuple[int, ...]] = None
    records: List[Dict] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    transfer: List[Dict] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class MonteCarloResult:
    outputs: List[RunOutput]
    summary: pd.DataFrame
    aggregate: pd.DataFrame
    curricula: pd.DataFrame
    failures: pd.DataFrame

    @property
    def failed(self) -> bool:
        return not self.failures.empty


def curriculum_label(order: Sequence[int]) -> str:
    return "-".join(str(int(t)) for t in order)


def run_settings(config: ExperimentConfig) -> RunSettings:
    selector = SelectorSettings(
        probe_steps=config.probe_steps,
        measure_steps=config.measure_steps,
        probe_cap=config.probe_cap,
        measure_budget=config.measure_budget,
        pair_budget=config.pair_budget,
        prune_threshold=-math.inf if config.prune_threshold is None else float(config.prune_threshold),
        diversity_threshold=config.diversity_threshold,
    )
    return RunSettings(stage_steps=config.stage_steps, convergence_cap=config.convergence_cap, selector=selector)


def execute_run(config: ExperimentConfig, selector: str, run_id: int, seed: int, order: Sequence[int] = None,
                verbose: bool = False, log_path: Optional[str] = None) -> RunOutput:
    """
    Purpose: One independent run of one selector; safe to call in a worker process.
    Inputs: config, selector (kind), run_id, seed (child seed), order (fixed selector permutation)
    Outputs: RunOutput with run records, a summary row, the transfer matrix dump (LTMS variants) or an error
    Role: Builds fresh environments and agent, calls the orchestrator, flattens its result.
    """
    if verbose and log_path:
        set_log_path(log_path, reset=False)
    out = RunOutput(selector, run_id, seed, tuple(order) if order is not None else None)
    try:
        task_set = build_tasks(config)
        agent = build_agent(config, task_set)
        tasks = task_set.tasks
        if selector == "fixed" and order is None:
            order = config.fixed_order
        result = run_active_simulators(
            agent, tasks, task_set.target, config.budget_steps, selector, run_settings(config), make_rng(seed),
            features=task_set.features, fixed_order=order, verbose=verbose,
        )
    except Exception as e:
        log_event(f"[ERROR] Run {selector}#{run_id} (seed {seed}) failed: {e}", verbose)
        out.error = f"{type(e).__name__}: {e}"
        if verbose:
            log_event(traceback.format_exc(), verbose)
        return out

    for rec in result.records:
        out.records.append({
            "run_id": run_id, "seed": seed, "selector": selector, "phase": rec.phase, "stage": rec.stage,
            "cumulative_steps": rec.cumulative_steps, "episode_index": rec.episode_index,
            "episode_reward": rec.episode_reward, "cumulative_reward": rec.cumulative_reward,
            "converged": rec.converged,
        })
    ledger = result.ledger
    budget = config.episode_budget if config.episode_budget is not None else len(result.target_rewards)
    reward = total_reward(result, budget)
    out.summary = {
        "selector": selector, "run_id": run_id, "seed": seed,
        "curriculum": curriculum_label(result.curriculum), "skipped": curriculum_label(sorted(result.skipped)),
        "preprocess_steps": ledger.preprocess, "selection_steps": sum(ledger.selection),
        "training_steps": sum(ledger.training), "g_T": ledger.g_T, "target_steps": ledger.target,
        "time_to_threshold": time_to_threshold(result), "total_reward": reward.total,
        "total_reward_episodes": reward.episodes_used, "budget_exhausted": result.budget_exhausted,
    }
    matrix = result.selector_state.matrix if result.selector_state is not None else None
    if matrix is not None:
        out.transfer = matrix.to_frame().to_dict("records")
    return out


def _execute_all(config: ExperimentConfig, plan: List[Tuple[str, int, Optional[Tuple[int, ...]]]], jobs: int,
                 verbose: bool) -> List[RunOutput]:
    log_path = get_log_path()
    seeds = {run_id: child_seed(config.seed, run_id) for _, run_id, _ in plan}
    if jobs <= 1:
        outputs = [execute_run(config, sel, run_id, seeds[run_id], order, verbose, log_path) for sel, run_id, order in plan]
    else:
        outputs = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(execute_run, config, sel, run_id, seeds[run_id], order, verbose, log_path)
                       for sel, run_id, order in plan]
            for fut in as_completed(futures):
                outputs.append(fut.result())
    return sorted(outputs, key=lambda o: (o.selector, o.order or (), o.run_id))


def aggregate_records(records: pd.DataFrame) -> pd.DataFrame:
    """
    Purpose: Mean and standard deviation of cumulative target reward versus cumulative steps.
    Inputs: records (DataFrame with RECORD_COLUMNS)
    Outputs: DataFrame with AGGREGATE_COLUMNS, one block per selector
    Role: Shared step grid = union of every run's checkpoints; each run is forward-filled onto it
          (zero before its first checkpoint) and the population std (ddof=0) is reported.
    """
    parts = []
    for selector, sel_df in records.groupby("selector", sort=True):
        wide = (
            sel_df.drop_duplicates(["run_id", "cumulative_steps"], keep="last")
            .astype({"cumulative_reward": float})
            .pivot(index="cumulative_steps", columns="run_id", values="cumulative_reward")
            .sort_index()
            .ffill()
            .fillna(0.0)
        )
        parts.append(pd.DataFrame({
            "selector": selector,
            "cumulative_steps": wide.index.to_numpy(),
            "mean_cumulative_reward": wide.mean(axis=1).to_numpy(),
            "std_cumulative_reward": wide.std(axis=1, ddof=0).to_numpy(),
            "n_runs": wide.shape[1],
        }))
    if not parts:
        return pd.DataFrame(columns=AGGREGATE_COLUMNS)
    return pd.concat(parts, ignore_index=True)[AGGREGATE_COLUMNS]


def curriculum_counts(summary: pd.DataFrame) -> pd.DataFrame:
    if summary.empty:
        return pd.DataFrame(columns=CURRICULA_COLUMNS)
    counts = summary.groupby(["selector", "curriculum"], sort=True).size().reset_index(name="count")
    return counts.sort_values(["selector", "count", "curriculum"], ascending=[True, False, True],
                              kind="mergesort").reset_index(drop=True)[CURRICULA_COLUMNS]


def modal_curriculum(summary: pd.DataFrame, selector: str) -> Optional[str]:
    counts = curriculum_counts(summary)
    rows = counts[counts["selector"] == selector]
    return None if rows.empty else str(rows.iloc[0]["curriculum"])


def monte_carlo(config: ExperimentConfig, jobs: int = 1, selectors: Sequence[str] = None, out_dir=None,
                verbose: bool = False) -> MonteCarloResult:
    """
    Purpose: n_runs independent runs of each selector, with per-run and aggregate CSV output.
    Inputs: config (ExperimentConfig), jobs (worker processes), selectors (subset of config.selectors),
            out_dir (folder for CSVs; None skips writing), verbose
    Outputs: MonteCarloResult (summary, aggregate, curricula, failures DataFrames)
    Role: The `run` subcommand.
    """
    selectors = list(selectors) if selectors else list(config.selectors)
    plan = [(sel, run_id, None) for sel in selectors for run_id in range(config.n_runs)]
    log_event(f"[START] Monte Carlo: {config.name} selectors={selectors} runs={config.n_runs} jobs={jobs}", verbose)
    outputs = _execute_all(config, plan, jobs, verbose)
    good = [o for o in outputs if o.ok]
    summary = frame([o.summary for o in good], SUMMARY_COLUMNS)
    records = frame([r for o in good for r in o.records], RECORD_COLUMNS)
    failures = frame(
        [{"selector": o.selector, "run_id": o.run_id, "seed": o.seed, "error": o.error} for o in outputs if not o.ok],
        FAILURE_COLUMNS,
    )
    result = MonteCarloResult(outputs, summary, aggregate_records(records), curriculum_counts(summary), failures)

    if out_dir is not None:
        out_dir = Path(out_dir)
        for sel in selectors:
            write_records(records[records["selector"] == sel].to_dict("records"), out_dir / f"runs_{sel}.csv", verbose)
            first = next((o for o in good if o.selector == sel and o.transfer), None)
            if first is not None:
                write_csv(pd.DataFrame(first.transfer, columns=["from", "to", "value", "provenance"]),
                          out_dir / f"transfer_{sel}.csv", verbose)
        write_summary(summary.to_dict("records"), out_dir / "summary.csv", verbose)
        write_csv(result.curricula, out_dir / "curricula.csv", verbose)
        write_csv(result.aggregate, out_dir / "aggregate.csv", verbose)
        if result.failed:
            write_csv(failures, out_dir / "failures.csv", verbose)
    log_event(f"[INFO] Monte Carlo finished: {len(good)} ok, {len(outputs) - len(good)} failed", verbose)
    return result


def curriculum_permutations(k: int) -> List[Tuple[int, ...]]:
    """All orderings of 0..k-1 in lexicographic order; index i is the i-th permutation."""
    return list(itertools.permutations(range(k)))


def enumerate_curricula(config: ExperimentConfig, jobs: int = 1, out_dir=None, verbose: bool = False) -> pd.DataFrame:
    """
    Purpose: Mean/std steps to target convergence for every full-length curriculum plus the baseline.
    Inputs: config (ExperimentConfig with K <= enumerate_cap), jobs, out_dir, verbose
    Outputs: DataFrame with ENUMERATE_COLUMNS; the baseline row has curriculum_index -1
    Role: The `enumerate` subcommand. Runs that never converge are left out of the mean.
    """
    k = config.k
    if k > config.enumerate_cap:
        raise ValueError(
            f"[ERROR] Refusing to enumerate {math.factorial(k)} curricula for K={k}; "
            f"raise enumerate_cap (currently {config.enumerate_cap}) to allow it"
        )
    perms = curriculum_permutations(k)
    plan = [("fixed", run_id, perm) for perm in perms for run_id in range(config.n_runs)]
    plan += [("baseline", run_id, None) for run_id in range(config.n_runs)]
    log_event(f"[START] Enumerating {len(perms)} curricula x {config.n_runs} runs", verbose)
    outputs = _execute_all(config, plan, jobs, verbose)

    def stats(rows: List[RunOutput]):
        values = pd.Series([o.summary["time_to_threshold"] for o in rows if o.ok], dtype="float64").dropna()
        if values.empty:
            return float("nan"), float("nan")
        return float(values.mean()), float(values.std(ddof=0))

    table = []
    for idx, perm in enumerate(perms):
        mean, std = stats([o for o in outputs if o.selector == "fixed" and o.order == perm])
        table.append({"curriculum_index": idx, "permutation": curriculum_label(perm),
                      "mean_steps_to_convergence": mean, "std": std})
    mean, std = stats([o for o in outputs if o.selector == "baseline"])
    table.append({"curriculum_index": -1, "permutation": "baseline", "mean_steps_to_convergence": mean, "std": std})
    df = frame(table, ENUMERATE_COLUMNS)
    failed = [o for o in outputs if not o.ok]
    if out_dir is not None:
        write_csv(df, Path(out_dir) / "enumerate.csv", verbose)
        if failed:
            write_csv(frame([{"selector": o.selector, "run_id": o.run_id, "seed": o.seed, "error": o.error}
                             for o in failed], FAILURE_COLUMNS), Path(out_dir) / "failures.csv", verbose)
    df.attrs["failed_runs"] = len(failed)
    return df
