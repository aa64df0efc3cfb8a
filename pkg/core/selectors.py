"""
core/selectors.py | Curriculum Task Selectors
Purpose: The SelectNextTaskToLearn strategies: reward maximizing greedy (RMGS), local transfer
maximizing (LTMS), their active-learning variants, a fixed-order selector and the no-op baseline.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy, pandas
Abstract Spec: RMGS probes a fresh clone of the agent on every remaining task and picks the highest
reward. LTMS measures a K x (K+1) transferability matrix once, then serves the chain built by backward
greedy search from the target. Active-RMGS measures only b sequence-task pairs per step and predicts
the rest with an OLS model chosen by A-optimal design; Active-LTMS does the same for the matrix with
p measured pairs. Every argmax tie goes to the lowest TaskId. Probes use distinct child generators
spawned per candidate so results do not depend on probe order.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from agents.q_agent import Agent, clone_agent, evaluate_task, transfer_measure
from core.active_regression import DesignState, predict
from core.errors import BudgetError
from core.log_utils import log_event
from core.mdp import Environment, Rng
from core.task_features import FeatureModel, diversity_prune

SELECTOR_KINDS = ("baseline", "rmgs", "ltms", "active_rmgs", "active_ltms", "fixed")
SKIP = None
MEASURED = "measured"
PREDICTED = "predicted"


@dataclass
class TaskSpec:
    task_id: int
    name: str
    env: Environment
    layout: object = None


@dataclass(frozen=True)
class SelectorSettings:
    probe_steps: int = 200
    measure_steps: int = 300
    probe_cap: Optional[int] = None
    measure_budget: int = 1
    pair_budget: Optional[int] = None
    prune_threshold: float = -math.inf
    diversity_threshold: Optional[float] = None


class TransferMatrix:
    """F[i][j] for i in [0, K), j in [0, K]; column K is the target. Unmeasured entries are NaN."""

    def __init__(self, k: int):
        self.k = k
        self.values = np.full((k, k + 1), np.nan)
        self.provenance = np.full((k, k + 1), "", dtype=object)

    def set(self, i: int, j: int, value: float, provenance: str = MEASURED) -> None:
        self.values[i, j] = float(value)
        self.provenance[i, j] = provenance

    def __getitem__(self, ij) -> float:
        return float(self.values[ij])

    def is_complete(self, rows: Sequence[int], target: int) -> bool:
        cols = list(rows) + [target]
        return all(np.isfinite(self.values[i, j]) for i in rows for j in cols if i != j)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for i in range(self.k):
            for j in range(self.k + 1):
                if self.provenance[i, j]:
                    records.append({"from": i, "to": j, "value": self.values[i, j], "provenance": self.provenance[i, j]})
        return pd.DataFrame(records, columns=["from", "to", "value", "provenance"])


@dataclass
class Selection:
    task: Optional[int]
    tau: int
    skipped: List[int] = field(default_factory=list)
    values: Dict[int, float] = field(default_factory=dict)


@dataclass
class SelectorState:
    kind: str
    tasks: Dict[int, TaskSpec]
    target: TaskSpec
    settings: SelectorSettings = field(default_factory=SelectorSettings)
    features: Optional[FeatureModel] = None
    order: Optional[List[int]] = None
    remaining: List[int] = field(default_factory=list)
    curriculum: List[int] = field(default_factory=list)
    pruned: List[int] = field(default_factory=list)
    matrix: Optional[TransferMatrix] = None
    plan: Optional[List[int]] = None
    plan_cursor: int = 0
    design: Optional[DesignState] = None
    verbose: bool = False


def make_selector_state(kind: str, tasks: Sequence[TaskSpec], target: TaskSpec, settings: SelectorSettings = None,
                        features: FeatureModel = None, order: Sequence[int] = None, verbose: bool = False) -> SelectorState:
    if kind not in SELECTOR_KINDS:
        raise ValueError(f"[ERROR] Unknown selector '{kind}'. Choose one of {', '.join(SELECTOR_KINDS)}")
    if kind in ("active_rmgs", "active_ltms") and features is None:
        raise ValueError(f"[ERROR] Selector '{kind}' needs task features")
    task_map = {t.task_id: t for t in tasks}
    if sorted(task_map) != list(range(len(task_map))):
        raise ValueError("[ERROR] Task ids must be 0..K-1")
    if kind != "baseline" and target.task_id != len(task_map):
        raise ValueError(f"[ERROR] Target must use the reserved id K={len(task_map)}, got {target.task_id}")
    if kind == "fixed":
        if order is None or sorted(order) != sorted(task_map):
            raise ValueError(f"[ERROR] Fixed selector needs a permutation of {sorted(task_map)}, got {order}")
    remaining = [] if kind == "baseline" else sorted(task_map)
    return SelectorState(kind, task_map, target, settings or SelectorSettings(), features,
                         list(order) if order is not None else None, remaining, verbose=verbose)


def _argmax_lowest(values: Dict[int, float]) -> int:
    best = None
    for task_id in sorted(values):
        if best is None or values[task_id] > values[best]:
            best = task_id
    return best


def rmgs_select(state: SelectorState, agent: Agent, rng: Rng, evaluate: Callable = evaluate_task):
    """
    Purpose: Reward maximizing greedy choice of the next task.
    Inputs: state (SelectorState with remaining tasks), agent (master Agent, not modified), rng
    Outputs: (TaskId, tau) - best task and the total probe steps spent
    Role: Each remaining task gets its own clone and child generator; argmax reward wins.
    """
    if not state.remaining:
        raise ValueError("[ERROR] rmgs_select: no remaining tasks")
    rngs = rng.spawn(len(state.remaining))
    rewards = {}
    tau = 0
    for task_id, probe_rng in zip(state.remaining, rngs):
        result = evaluate(clone_agent(agent), state.tasks[task_id].env, state.settings.probe_steps, probe_rng)
        rewards[task_id] = result.reward
        tau += result.steps
    best = _argmax_lowest(rewards)
    log_event(f"[STEP] RMGS probe rewards {rewards} -> task {best} (tau={tau})", state.verbose)
    return best, tau


def ltms_preprocess(agent: Agent, tasks: Sequence[TaskSpec], target: TaskSpec, rng: Rng, measure_steps: int = 300,
                    probe_cap: Optional[int] = None, measure: Callable = transfer_measure):
    """
    Purpose: Measure the full transferability matrix with fresh clones of the current agent.
    Inputs: agent, tasks (K TaskSpecs), target (TaskSpec, id K), rng, measure_steps, probe_cap
    Outputs: (TransferMatrix, tau)
    Role: Diagonal (i == j) entries are skipped; K*(K-1) + K probes in row-major order.
    """
    k = len(tasks)
    if k < 1:
        raise ValueError("[ERROR] ltms_preprocess: needs at least one training task")
    by_id = {t.task_id: t for t in tasks}
    pairs = _all_pairs(sorted(by_id), target.task_id)
    rngs = rng.spawn(len(pairs))
    matrix = TransferMatrix(k)
    tau = 0
    for (i, j), probe_rng in zip(pairs, rngs):
        env_j = target.env if j == target.task_id else by_id[j].env
        result = measure(clone_agent(agent), by_id[i].env, env_j, measure_steps, probe_rng, probe_cap)
        matrix.set(i, j, result.reward, MEASURED)
        tau += result.steps
    return matrix, tau


def _all_pairs(task_ids: Sequence[int], target_id: int):
    return [(i, j) for i in task_ids for j in list(task_ids) + [target_id] if i != j]


def ltms_chain(F, task_ids: Sequence[int], target_id: int) -> List[int]:
    """
    Purpose: Build the curriculum by backward greedy search from the target.
    Inputs: F (TransferMatrix or 2-D array), task_ids (tasks still to place), target_id
    Outputs: forward-ordered list of TaskIds
    Role: Last slot = argmax_i F[i][target]; each earlier slot = argmax over unchosen i of
          F[i][previously chosen]; ties go to the lowest TaskId.
    """
    values = F.values if isinstance(F, TransferMatrix) else np.asarray(F, dtype=float)
    remaining = sorted(task_ids)
    chosen = []
    nxt = target_id
    while remaining:
        best = _argmax_lowest({i: values[i, nxt] for i in remaining})
        chosen.append(best)
        remaining.remove(best)
        nxt = best
    return list(reversed(chosen))


def ltms_select(state: SelectorState):
    """Serve the cached chain one task at a time; all cost was paid in preprocessing."""
    if state.plan is None:
        if state.matrix is None or not state.matrix.is_complete(state.remaining, state.target.task_id):
            raise ValueError("[ERROR] ltms_select: transferability matrix is missing entries")
        state.plan = ltms_chain(state.matrix, state.remaining, state.target.task_id)
        state.plan_cursor = 0
        log_event(f"[INFO] LTMS chain: {state.plan}", state.verbose)
    if state.plan_cursor >= len(state.plan):
        raise ValueError("[ERROR] ltms_select: curriculum plan is exhausted")
    task_id = state.plan[state.plan_cursor]
    state.plan_cursor += 1
    return task_id, 0


def _diversity_filter(state: SelectorState, candidates: Sequence[int]):
    threshold = state.settings.diversity_threshold
    if threshold is None or state.features is None:
        return list(candidates), []
    members = [state.features.raw[m] for m in state.curriculum]
    keep, drop = [], []
    for task_id in candidates:
        (keep if diversity_prune(state.features.raw[task_id], members, threshold) else drop).append(task_id)
    return keep, drop


def active_rmgs_select(state: SelectorState, agent: Agent, rng: Rng, evaluate: Callable = evaluate_task) -> Selection:
    """
    Purpose: RMGS with a regression model over sequence-task features replacing most probes.
    Inputs: state (SelectorState with features), agent (master Agent), rng
    Outputs: Selection(task or SKIP, tau, skipped tasks, measured/predicted values)
    Role: First step is plain RMGS. Later steps measure b candidates chosen by A-optimal design,
          refit OLS on every measurement so far, predict the rest and take the argmax. Tasks whose
          value falls below the prune threshold are skipped for good.
    """
    if not state.remaining:
        raise ValueError("[ERROR] active_rmgs_select: no remaining tasks")
    if not state.curriculum:
        best, tau = rmgs_select(state, agent, rng, evaluate)
        return Selection(best, tau)
    candidates, pruned = _diversity_filter(state, state.remaining)
    if not candidates:
        return Selection(SKIP, 0, skipped=pruned)
    rngs = dict(zip(state.remaining, rng.spawn(len(state.remaining))))
    vectors = {j: state.features.sequence_task(state.curriculum, j) for j in candidates}
    if state.design is None:
        state.design = DesignState(dim=len(next(iter(vectors.values()))))
    measured = {}
    tau = 0
    unmeasured = list(candidates)
    for _ in range(min(state.settings.measure_budget, len(candidates))):
        pick = unmeasured[state.design.next_index([vectors[j] for j in unmeasured])]
        result = evaluate(clone_agent(agent), state.tasks[pick].env, state.settings.probe_steps, rngs[pick])
        measured[pick] = result.reward
        tau += result.steps
        state.design.add(vectors[pick], result.reward)
        unmeasured.remove(pick)
    values = dict(measured)
    if unmeasured:
        theta = state.design.fit()
        for j in unmeasured:
            values[j] = predict(theta, vectors[j])
    skipped = pruned + [j for j in candidates if values[j] < state.settings.prune_threshold]
    kept = {j: v for j, v in values.items() if v >= state.settings.prune_threshold}
    best = _argmax_lowest(kept) if kept else SKIP
    log_event(
        f"[STEP] Active-RMGS measured={measured} predicted={ {j: values[j] for j in unmeasured} } "
        f"ridge={state.design.ridge} -> {best} skipped={skipped}",
        state.verbose,
    )
    return Selection(best, tau, skipped=sorted(skipped), values=values)


def active_ltms_estimate(agent: Agent, tasks: Sequence[TaskSpec], target: TaskSpec, p: int, features: FeatureModel,
                         rng: Rng, measure_steps: int = 300, probe_cap: Optional[int] = None,
                         measure: Callable = transfer_measure, verbose: bool = False):
    """
    Purpose: Estimate the transferability matrix from p measured pairs plus OLS predictions.
    Inputs: agent, tasks, target, p (pair budget), features (FeatureModel), rng, measure_steps, probe_cap
    Outputs: (TransferMatrix with measured/predicted provenance, tau of the measured probes)
    Role: Pairs are chosen one at a time by A-optimal design over pair feature vectors.
    """
    by_id = {t.task_id: t for t in tasks}
    pairs = _all_pairs(sorted(by_id), target.task_id)
    vectors = {pair: features.pair(*pair) for pair in pairs}
    dim = len(vectors[pairs[0]])
    if p < dim:
        raise BudgetError(f"[ERROR] active_ltms_estimate: pair budget {p} is below the feature dimension {dim}")
    p = min(p, len(pairs))
    rngs = dict(zip(pairs, rng.spawn(len(pairs))))
    design = DesignState(dim=dim)
    matrix = TransferMatrix(len(by_id))
    unmeasured = list(pairs)
    tau = 0
    for _ in range(p):
        i, j = unmeasured[design.next_index([vectors[pair] for pair in unmeasured])]
        env_j = target.env if j == target.task_id else by_id[j].env
        result = measure(clone_agent(agent), by_id[i].env, env_j, measure_steps, rngs[(i, j)], probe_cap)
        matrix.set(i, j, result.reward, MEASURED)
        design.add(vectors[(i, j)], result.reward)
        tau += result.steps
        unmeasured.remove((i, j))
    if unmeasured:
        theta = design.fit()
        for pair in unmeasured:
            matrix.set(pair[0], pair[1], predict(theta, vectors[pair]), PREDICTED)
    log_event(f"[INFO] Active-LTMS measured {p} of {len(pairs)} pairs (tau={tau}, ridge={design.ridge})", verbose)
    return matrix, tau


def preprocess(state: SelectorState, agent: Agent, rng: Rng, measure: Callable = transfer_measure) -> int:
    """
    Purpose: Run the selector's PreProcess step.
    Inputs: state, agent, rng
    Outputs: tau (steps spent)
    Role: No-op for baseline, fixed, RMGS and Active-RMGS; matrix build for LTMS and Active-LTMS.
    """
    if not state.remaining or state.kind not in ("ltms", "active_ltms"):
        return 0
    tasks = [state.tasks[i] for i in state.remaining]
    s = state.settings
    if state.kind == "ltms":
        state.matrix, tau = ltms_preprocess(agent, tasks, state.target, rng, s.measure_steps, s.probe_cap, measure)
    else:
        budget = s.pair_budget if s.pair_budget is not None else len(_all_pairs(state.remaining, state.target.task_id))
        state.matrix, tau = active_ltms_estimate(agent, tasks, state.target, budget, state.features, rng,
                                                 s.measure_steps, s.probe_cap, measure, state.verbose)
    log_event(f"[INFO] {state.kind} preprocessing spent {tau} steps", state.verbose)
    return tau


def select_next(state: SelectorState, agent: Agent, rng: Rng) -> Selection:
    """Dispatch SelectNextTaskToLearn for the state's selector kind."""
    if state.kind == "rmgs":
        task_id, tau = rmgs_select(state, agent, rng)
        return Selection(task_id, tau)
    if state.kind == "ltms":
        task_id, tau = ltms_select(state)
        return Selection(task_id, tau)
    if state.kind == "active_rmgs":
        return active_rmgs_select(state, agent, rng)
    if state.kind == "active_ltms":
        skipped = []
        while state.plan is None or state.plan_cursor < len(state.plan):
            task_id, _ = ltms_select(state)
            keep, drop = _diversity_filter(state, [task_id])
            if keep:
                return Selection(task_id, 0, skipped=skipped)
            skipped.extend(drop)
        return Selection(SKIP, 0, skipped=skipped)
    if state.kind == "fixed":
        for task_id in state.order:
            if task_id in state.remaining:
                return Selection(task_id, 0)
    raise ValueError(f"[ERROR] Selector '{state.kind}' has nothing to select")
