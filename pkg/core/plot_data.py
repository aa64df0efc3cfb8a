"""
core/plot_data.py | Figure Data Emitter
Purpose: Turn a results folder (runs_*.csv, summary.csv, enumerate.csv) into one CSV per figure style
plus a manifest, for plotting in external tools.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: pandas
Abstract Spec: fig_reward_vs_steps.csv is recomputed from the per-run record files (mean/std of
cumulative target reward on the union step grid). fig_active_vs_nonactive.csv compares each selector
with its active variant on total steps and time to threshold. fig_curriculum_bars.csv mirrors the
enumeration table. Figures whose inputs are missing are omitted and listed as such in manifest.csv.
"""
from pathlib import Path
from typing import Dict

import pandas as pd

from adapters.results_writer import read_csv, write_csv
from core.harness import aggregate_records
from core.log_utils import log_event

ACTIVE_PAIRS = (("rmgs", "active_rmgs"), ("ltms", "active_ltms"))
REWARD_COLUMNS = ["selector", "cumulative_steps", "mean_cumulative_reward", "std_cumulative_reward", "n_runs"]
ACTIVE_COLUMNS = [
    "family", "selector", "active", "n_runs", "mean_total_steps", "std_total_steps",
    "mean_overhead_steps", "mean_time_to_threshold", "converged_runs",
]
BARS_COLUMNS = ["curriculum_index", "permutation", "mean_steps_to_convergence", "std", "is_baseline"]


def _active_comparison(summary: pd.DataFrame) -> pd.DataFrame:
    summary = summary.copy()
    summary["total_steps"] = summary["g_T"] + summary["target_steps"]
    rows = []
    for base, active in ACTIVE_PAIRS:
        present = set(summary["selector"])
        if base not in present or active not in present:
            continue
        for selector in (base, active):
            sel = summary[summary["selector"] == selector]
            rows.append({
                "family": base, "selector": selector, "active": selector == active, "n_runs": len(sel),
                "mean_total_steps": sel["total_steps"].mean(), "std_total_steps": sel["total_steps"].std(ddof=0),
                "mean_overhead_steps": sel["g_T"].mean(),
                "mean_time_to_threshold": sel["time_to_threshold"].mean(),
                "converged_runs": int(sel["time_to_threshold"].notna().sum()),
            })
    return pd.DataFrame(rows, columns=ACTIVE_COLUMNS)


def emit_plot_data(results_dir, verbose: bool = False) -> Dict[str, str]:
    """
    Purpose: Write the per-figure CSVs for a results folder.
    Inputs: results_dir (folder written by `run` and/or `enumerate`), verbose
    Outputs: dict figure name -> 'written' or 'omitted: <reason>'
    Role: The `plot-data` subcommand.
    """
    results_dir = Path(results_dir)
    run_files = sorted(results_dir.glob("runs_*.csv"))
    summary_path = results_dir / "summary.csv"
    enumerate_path = results_dir / "enumerate.csv"
    if not run_files and not enumerate_path.exists():
        raise FileNotFoundError(f"[ERROR] No run records or enumeration table found in {results_dir}")

    status: Dict[str, str] = {}
    manifest = []

    def emit(figure: str, df, reason: str = "") -> None:
        path = results_dir / f"{figure}.csv"
        if df is None or df.empty:
            status[figure] = f"omitted: {reason}"
            manifest.append({"figure": figure, "file": "", "status": "omitted", "rows": 0, "note": reason})
            return
        write_csv(df, path, verbose)
        status[figure] = "written"
        manifest.append({"figure": figure, "file": path.name, "status": "written", "rows": len(df), "note": ""})

    records = pd.concat([read_csv(p) for p in run_files], ignore_index=True) if run_files else pd.DataFrame()
    reward = aggregate_records(records)[REWARD_COLUMNS] if not records.empty else None
    emit("fig_reward_vs_steps", reward, "no run records")

    active = _active_comparison(read_csv(summary_path)) if summary_path.exists() else None
    emit("fig_active_vs_nonactive", active, "needs a selector and its active variant in summary.csv")

    bars = None
    if enumerate_path.exists():
        bars = read_csv(enumerate_path)
        bars["is_baseline"] = bars["curriculum_index"] < 0
        bars = bars[BARS_COLUMNS]
    emit("fig_curriculum_bars", bars, "no enumerate.csv")

    write_csv(pd.DataFrame(manifest, columns=["figure", "file", "status", "rows", "note"]),
              results_dir / "manifest.csv", verbose)
    log_event(f"[INFO] Plot data for {results_dir}: {status}", verbose)
    return status
