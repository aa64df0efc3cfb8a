"""
adapters/results_writer.py | Results CSV Writer
Purpose: Write run records, per-run summaries, curricula counts, aggregates, transfer matrices and
enumeration tables as CSV files with one fixed dialect.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: pandas
Abstract Spec: Comma separator, '.' decimal point, header row, LF line endings and %.10g floats, so that
two runs with the same seed produce byte-identical files.
"""
from pathlib import Path
from typing import Iterable, List, Mapping

import pandas as pd

from core.file_utils import ensure_folder
from core.log_utils import log_event

RECORD_COLUMNS = [
    "run_id", "seed", "selector", "phase", "stage", "cumulative_steps",
    "episode_index", "episode_reward", "cumulative_reward", "converged",
]
SUMMARY_COLUMNS = [
    "selector", "run_id", "seed", "curriculum", "skipped", "preprocess_steps", "selection_steps",
    "training_steps", "g_T", "target_steps", "time_to_threshold", "total_reward",
    "total_reward_episodes", "budget_exhausted",
]
AGGREGATE_COLUMNS = ["selector", "cumulative_steps", "mean_cumulative_reward", "std_cumulative_reward", "n_runs"]
CURRICULA_COLUMNS = ["selector", "curriculum", "count"]
FAILURE_COLUMNS = ["selector", "run_id", "seed", "error"]
ENUMERATE_COLUMNS = ["curriculum_index", "permutation", "mean_steps_to_convergence", "std"]


def write_csv(df: pd.DataFrame, path, verbose: bool = False) -> Path:
    path = Path(path)
    ensure_folder(path.parent)
    df.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    log_event(f"[INFO] Wrote {len(df)} rows to {path}", verbose)
    return path


def frame(rows: Iterable[Mapping], columns: List[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=columns)


def write_records(rows: Iterable[Mapping], path, verbose: bool = False) -> Path:
    df = frame(rows, RECORD_COLUMNS).sort_values(["run_id", "cumulative_steps"], kind="mergesort")
    return write_csv(df, path, verbose)


def write_summary(rows: Iterable[Mapping], path, verbose: bool = False) -> Path:
    df = frame(rows, SUMMARY_COLUMNS)
    df["time_to_threshold"] = df["time_to_threshold"].astype("Int64")
    df = df.sort_values(["selector", "run_id"], kind="mergesort")
    return write_csv(df, path, verbose)


def read_csv(path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"[ERROR] Results file not found: {path}")
    return pd.read_csv(path)
