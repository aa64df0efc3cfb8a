"""
ports/config_loader.py | Experiment Config Loader
Purpose: Load, validate and serialize experiment configs (user_inputs/experiments/*.json).
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: python-dotenv
Abstract Spec: A config names the domain, the target and source task definitions, the selectors to run,
agent hyperparameters and the probe/measure/budget settings. Missing fields take per-domain defaults
(gamma 0.9, alpha 0.6, convergence window 5, 30 runs). Relative paths resolve against the config
file's folder. Every validation failure raises ConfigError naming the field and the constraint.
Machine-level overrides (CURRICULUM_SEED, CURRICULUM_JOBS, CURRICULUM_OUTPUT_DIR) come from .env.
"""
import argparse
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from agents.q_agent import AgentConfig
from core.errors import ConfigError
from core.file_utils import load_config
from core.selectors import SELECTOR_KINDS

load_dotenv()

DOMAINS = ("maze", "gridworld", "cartpole")
DEFAULT_RUNS = 30
DEFAULT_ENUMERATE_CAP = 6
# "coverage" adds the share of task j's cells that task i also has (maze only)
PAIR_FEATURES = ("domain", "coverage")

DOMAIN_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "maze": {"probe_steps": 200, "measure_steps": 300, "stage_steps": None, "probe_cap": None,
             "budget_steps": None, "episode_budget": None},
    "gridworld": {"probe_steps": 500, "measure_steps": 100, "stage_steps": None, "probe_cap": None,
                  "budget_steps": None, "episode_budget": None},
    "cartpole": {"probe_steps": 200, "measure_steps": 500, "stage_steps": 2000, "probe_cap": 2000,
                 "budget_steps": 120000, "episode_budget": 220},
}


@dataclass
class ExperimentConfig:
    domain: str
    name: str
    target: Dict[str, Any]
    sources: List[Dict[str, Any]]
    selectors: List[str] = field(default_factory=lambda: ["baseline", "rmgs", "ltms", "active_rmgs", "active_ltms"])
    fixed_order: Optional[List[int]] = None
    agent: AgentConfig = field(default_factory=AgentConfig)
    probe_steps: int = 200
    measure_steps: int = 300
    probe_cap: Optional[int] = None
    stage_steps: Optional[int] = None
    convergence_cap: Optional[int] = None
    budget_steps: Optional[int] = None
    episode_budget: Optional[int] = None
    measure_budget: int = 1
    pair_budget: Optional[int] = None
    prune_threshold: Optional[float] = None
    diversity_threshold: Optional[float] = None
    n_runs: int = DEFAULT_RUNS
    seed: int = 0
    output_dir: str = "results"
    enumerate_cap: int = DEFAULT_ENUMERATE_CAP
    cartpole_bins: List[int] = field(default_factory=lambda: [6, 6, 12, 6])
    pair_features: str = "domain"
    source_path: Optional[str] = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return len(self.sources)


def _positive(raw: Dict[str, Any], key: str, allow_none: bool = False, allow_zero: bool = False) -> None:
    value = raw.get(key)
    if value is None:
        if not allow_none:
            raise ConfigError(key, "is required")
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"must be an integer, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(key, f"must be {'>= 0' if allow_zero else '>= 1'}, got {value}")


def _resolve_paths(task: Dict[str, Any], base: Path, label: str) -> Dict[str, Any]:
    task = dict(task)
    if "layout" in task:
        path = Path(task["layout"])
        if not path.is_absolute():
            path = (base / path).resolve()
        if not path.exists():
            raise ConfigError(f"{label}.layout", f"file not found: {path}")
        task["layout"] = str(path)
    return task


def _validate_task(domain: str, task: Dict[str, Any], label: str, is_target: bool) -> None:
    if not isinstance(task, dict):
        raise ConfigError(label, "must be an object")
    if domain == "cartpole":
        for key in ("x_bound", "angle_deg"):
            value = task.get(key)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError(f"{label}.{key}", f"must be a positive number, got {value!r}")
        return
    if is_target and "layout" not in task:
        raise ConfigError(f"{label}.layout", "target needs a layout file")
    if not is_target:
        options = ("layout", "keep") if domain == "maze" else ("layout", "start")
        if not any(key in task for key in options):
            raise ConfigError(label, f"needs one of {', '.join(options)}")
        spec = task.get("keep") if domain == "maze" else task.get("start")
        if spec is not None and (not isinstance(spec, list) or len(spec) != (4 if domain == "maze" else 2)):
            raise ConfigError(f"{label}.{'keep' if domain == 'maze' else 'start'}",
                              "must be [r0, c0, r1, c1]" if domain == "maze" else "must be [row, col]")


def config_from_dict(raw: Dict[str, Any], base_dir: Path = Path("."), source_path: str = None) -> ExperimentConfig:
    """
    Purpose: Validate a raw config mapping and fill defaults.
    Inputs: raw (dict), base_dir (folder relative paths resolve against), source_path (for messages)
    Outputs: ExperimentConfig
    Role: Shared by parse_config and the tests.
    """
    domain = raw.get("domain")
    if domain not in DOMAINS:
        raise ConfigError("domain", f"must be one of {', '.join(DOMAINS)}, got {domain!r}")
    known = {f.name for f in fields(ExperimentConfig)} - {"source_path"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    merged = {**DOMAIN_DEFAULTS[domain], **raw}
    merged.setdefault("name", domain)
    merged.setdefault("output_dir", str(Path("results") / merged["name"]))
    merged.setdefault("n_runs", DEFAULT_RUNS)

    _validate_task(domain, merged.get("target"), "target", True)
    sources = merged.get("sources", [])
    if not isinstance(sources, list):
        raise ConfigError("sources", "must be a list")
    for idx, src in enumerate(sources):
        _validate_task(domain, src, f"sources[{idx}]", False)
    merged["target"] = _resolve_paths(merged["target"], base_dir, "target")
    merged["sources"] = [_resolve_paths(s, base_dir, f"sources[{i}]") for i, s in enumerate(sources)]

    _positive(merged, "n_runs")
    for key in ("probe_steps", "measure_steps", "measure_budget"):
        if key in merged:
            _positive(merged, key)
    for key in ("probe_cap", "stage_steps", "convergence_cap", "budget_steps", "pair_budget"):
        _positive(merged, key, allow_none=True)
    _positive(merged, "episode_budget", allow_none=True, allow_zero=True)
    if "enumerate_cap" in merged:
        _positive(merged, "enumerate_cap")
    seed = merged.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", f"must be a non-negative integer, got {seed!r}")
    for key in ("prune_threshold", "diversity_threshold"):
        value = merged.get(key)
        if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
            raise ConfigError(key, f"must be a number or null, got {value!r}")
    pair_features = merged.get("pair_features", "domain")
    if pair_features not in PAIR_FEATURES:
        raise ConfigError("pair_features", f"must be one of {', '.join(PAIR_FEATURES)}, got {pair_features!r}")
    if pair_features == "coverage" and domain != "maze":
        raise ConfigError("pair_features", "'coverage' is only defined for the maze domain")

    selectors = merged.get("selectors", ExperimentConfig.__dataclass_fields__["selectors"].default_factory())
    if not isinstance(selectors, list) or not selectors:
        raise ConfigError("selectors", "must be a non-empty list")
    for kind in selectors:
        if kind not in SELECTOR_KINDS:
            raise ConfigError("selectors", f"unknown selector {kind!r}; choose from {', '.join(SELECTOR_KINDS)}")
    merged["selectors"] = list(selectors)
    if "fixed" in selectors:
        order = merged.get("fixed_order")
        if not isinstance(order, list) or sorted(order) != list(range(len(sources))):
            raise ConfigError("fixed_order", f"must be a permutation of 0..{len(sources) - 1} when 'fixed' is selected")

    agent_raw = merged.get("agent", {})
    if isinstance(agent_raw, AgentConfig):
        agent_raw = asdict(agent_raw)
    if not isinstance(agent_raw, dict):
        raise ConfigError("agent", "must be an object")
    agent_fields = {f.name for f in fields(AgentConfig)}
    for key in agent_raw:
        if key not in agent_fields:
            raise ConfigError(f"agent.{key}", "unknown agent parameter")
    try:
        merged["agent"] = AgentConfig(**agent_raw)
    except ValueError as e:
        raise ConfigError("agent", str(e).replace("[ERROR] ", ""))

    bins = merged.get("cartpole_bins", [6, 6, 12, 6])
    if not isinstance(bins, list) or len(bins) != 4 or any(not isinstance(b, int) or b < 1 for b in bins):
        raise ConfigError("cartpole_bins", "must be four positive integers")
    merged["cartpole_bins"] = list(bins)
    return ExperimentConfig(source_path=source_path, **merged)


def parse_config(path) -> ExperimentConfig:
    """
    Purpose: Load and validate an experiment config file.
    Inputs: path (str or Path) - JSON config
    Outputs: ExperimentConfig with defaults filled
    Role: Entry point for simulate.py run/enumerate.
    """
    path = Path(path)
    raw = load_config(path, required_keys=["domain", "target"])
    if "seed" not in raw and env_default("CURRICULUM_SEED", int) is not None:
        raw["seed"] = env_default("CURRICULUM_SEED", int)
    if "output_dir" not in raw and env_default("CURRICULUM_OUTPUT_DIR"):
        raw["output_dir"] = str(Path(env_default("CURRICULUM_OUTPUT_DIR")) / raw.get("name", raw["domain"]))
    return config_from_dict(raw, path.parent, str(path))


def serialize_config(config: ExperimentConfig) -> Dict[str, Any]:
    data = asdict(config)
    data.pop("source_path", None)
    return data


def save_config(config: ExperimentConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(serialize_config(config), indent=2) + "\n", encoding="utf-8")
    return path


def env_default(name: str, cast=str, fallback=None):
    value = os.environ.get(name)
    if value in (None, ""):
        return fallback
    try:
        return cast(value)
    except ValueError:
        raise ConfigError(name, f"environment value {value!r} is not a valid {cast.__name__}")


def add_config_arg(parser: argparse.ArgumentParser) -> None:
    """
    Purpose: Add the experiment config path argument to an ArgumentParser.
    Inputs: parser (argparse.ArgumentParser)
    Outputs: None (modifies parser in-place)
    Role: Standardizes how configs are passed to the run and enumerate subcommands.
    """
    parser.add_argument("config", type=str, help="Experiment config JSON (see user_inputs/experiments/)")
