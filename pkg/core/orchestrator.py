"""
core/orchestrator.py | Active Simulators Driver
Purpose: Run one curriculum experiment end to end: preprocess, select-and-train loop, target training
within the remaining budget, and the time-to-threshold / total-reward evaluation criteria.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy
Abstract Spec: Every environment step of a run lands in exactly one ledger bucket (preprocess, per-stage
selection, per-stage training, target). With a finite budget T the target phase receives T - g(T);
with an unbounded budget the target is trained until convergence. Probe batches are atomic and may
overshoot the budget (flagged); curriculum stages are clipped so they never do.
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

from agents.q_agent import (
    Agent,
    TrainOutcome,
    fixed_steps,
    step_budget_remaining,
    tlearn,
    until_convergence,
)
from core.errors import BudgetError
from core.log_utils import log_event
from core.mdp import Rng
from core.selectors import (
    SelectorSettings,
    SelectorState,
    TaskSpec,
    make_selector_state,
    preprocess,
    select_next,
)
from core.task_features import FeatureModel

PHASE_PREPROCESS = "preprocess"
PHASE_PROBE = "probe"
PHASE_CURRICULUM = "curriculum"
PHASE_TARGET = "target"


@dataclass
class BudgetLedger:
    total: Optional[int] = None
    preprocess: int = 0
    selection: List[int] = field(default_factory=list)
    training: List[int] = field(default_factory=list)
    target: int = 0

    @property
    def g_T(self) -> int:
        return self.preprocess + sum(self.selection) + sum(self.training)

    @property
    def grand_total(self) -> int:
        return self.g_T + self.target

    def remaining(self) -> Optional[int]:
        if self.total is None:
            return None
        return self.total - self.g_T


@dataclass(frozen=True)
class RunSettings:
    """Stage training is until_convergence (capped) unless stage_steps is set, which gives fixed-length stages."""

    stage_steps: Optional[int] = None
    convergence_cap: Optional[int] = None
    selector: SelectorSettings = field(default_factory=SelectorSettings)


@dataclass
class StageLog:
    stage: int
    task: Optional[int]
    selection_steps: int
    training_steps: int
    training_reward: float
    converged: bool


@dataclass
class EpisodeRecord:
    phase: str
    stage: int
    cumulative_steps: int
    episode_index: int
    episode_reward: float
    cumulative_reward: float
    converged: bool


@dataclass
class RunResult:
    agent: Agent
    selector: str
    curriculum: List[int] = field(default_factory=list)
    stages: List[StageLog] = field(default_factory=list)
    ledger: BudgetLedger = field(default_factory=BudgetLedger)
    records: List[EpisodeRecord] = field(default_factory=list)
    target_rewards: List[float] = field(default_factory=list)
    target_steps: List[int] = field(default_factory=list)
    converged_at: Optional[int] = None
    budget_exhausted: bool = False
    skipped: List[int] = field(default_factory=list)
    selector_state: Optional[SelectorState] = None


class RewardTotal(NamedTuple):
    total: float
    episodes_used: int
    truncated: bool


def _boundary(result: RunResult, phase: str, stage: int) -> None:
    result.records.append(EpisodeRecord(phase, stage, result.ledger.grand_total, -1, 0.0, 0.0, False))


def _record_training(result: RunResult, phase: str, stage: int, start: int, outcome: TrainOutcome) -> None:
    cumulative = 0.0
    for idx, ep in enumerate(outcome.episodes):
        if phase == PHASE_TARGET:
            cumulative += ep.reward
            result.target_rewards.append(ep.reward)
            result.target_steps.append(start + ep.steps_at_end)
        last = idx == len(outcome.episodes) - 1
        result.records.append(EpisodeRecord(
            phase, stage, start + ep.steps_at_end, idx, ep.reward, cumulative, bool(outcome.converged and last),
        ))


def _stage_rule(settings: RunSettings, remaining: Optional[int]):
    if settings.stage_steps is not None:
        n = settings.stage_steps if remaining is None else min(settings.stage_steps, remaining)
        return fixed_steps(n)
    cap = settings.convergence_cap
    if remaining is not None:
        cap = remaining if cap is None else min(cap, remaining)
    return until_convergence(cap)


def run_active_simulators(agent: Agent, tasks: Sequence[TaskSpec], target: TaskSpec, total_budget: Optional[int],
                          selector_kind: str, settings: RunSettings, rng: Rng, features: FeatureModel = None,
                          fixed_order: Sequence[int] = None, verbose: bool = False) -> RunResult:
    """
    Purpose: The Active Simulators loop for one run.
    Inputs:
        agent (Agent): trained in place and returned in the result
        tasks (list of TaskSpec): training tasks with ids 0..K-1, possibly empty
        target (TaskSpec): target task with id K
        total_budget (int or None): step budget T; None trains the target until convergence
        selector_kind (str): baseline | rmgs | ltms | active_rmgs | active_ltms | fixed
        settings (RunSettings), rng (Generator), features (FeatureModel for Active selectors)
        fixed_order (list of TaskId for the fixed selector)
    Outputs: RunResult with curriculum, ledger, stage log and episode records
    Role: Training draws from one child stream and all probes from another, so a baseline run
          reproduces plain Q-learning on the target under the same seed.
    """
    if total_budget is not None and total_budget <= 0:
        raise BudgetError(f"[ERROR] Total budget must be > 0 or unbounded, got {total_budget}")
    kind = "baseline" if not tasks else selector_kind
    train_rng, probe_rng = rng.spawn(2)
    state = make_selector_state(kind, tasks, target, settings.selector, features, fixed_order, verbose)
    result = RunResult(agent=agent, selector=selector_kind, ledger=BudgetLedger(total=total_budget), selector_state=state)
    ledger = result.ledger
    log_event(f"[START] Run selector={selector_kind} K={len(tasks)} T={total_budget}", verbose)

    ledger.preprocess = preprocess(state, agent, probe_rng)
    if ledger.preprocess:
        _boundary(result, PHASE_PREPROCESS, -1)

    def out_of_budget() -> bool:
        rem = ledger.remaining()
        return rem is not None and rem <= 0

    if out_of_budget():
        result.budget_exhausted = True
    stage = 0
    while state.remaining and not result.budget_exhausted:
        sel = select_next(state, agent, probe_rng)
        for task_id in sel.skipped:
            if task_id in state.remaining:
                state.remaining.remove(task_id)
                state.pruned.append(task_id)
                result.skipped.append(task_id)
        ledger.selection.append(sel.tau)
        if sel.tau:
            _boundary(result, PHASE_PROBE, stage)
        if sel.task is None:
            ledger.training.append(0)
            result.stages.append(StageLog(stage, None, sel.tau, 0, 0.0, False))
            stage += 1
            result.budget_exhausted = out_of_budget()
            continue
        if out_of_budget():
            ledger.training.append(0)
            result.budget_exhausted = True
            log_event(f"[INFO] Budget exhausted by probes at stage {stage} (g_T={ledger.g_T})", verbose)
            break
        start = ledger.grand_total
        outcome = tlearn(agent, state.tasks[sel.task].env, _stage_rule(settings, ledger.remaining()), train_rng, verbose)
        ledger.training.append(outcome.steps)
        _record_training(result, PHASE_CURRICULUM, stage, start, outcome)
        state.remaining.remove(sel.task)
        state.curriculum.append(sel.task)
        result.curriculum.append(sel.task)
        result.stages.append(StageLog(stage, sel.task, sel.tau, outcome.steps, outcome.reward, outcome.converged))
        stage += 1
        if out_of_budget():
            result.budget_exhausted = True

    if result.budget_exhausted:
        log_event(f"[INFO] Target phase skipped: budget exhausted with curriculum {result.curriculum}", verbose)
        return result

    if total_budget is None:
        rule = until_convergence(settings.convergence_cap)
    else:
        rule = step_budget_remaining(ledger.remaining())
    start = ledger.grand_total
    outcome = tlearn(agent, target.env, rule, train_rng, verbose)
    ledger.target = outcome.steps
    _record_training(result, PHASE_TARGET, stage, start, outcome)
    if outcome.converged:
        result.converged_at = outcome.converged_at
    log_event(
        f"[INFO] Run done: curriculum={result.curriculum} g_T={ledger.g_T} target_steps={ledger.target} "
        f"converged_at={result.converged_at}",
        verbose,
    )
    return result


def time_to_threshold(result: RunResult) -> Optional[int]:
    """Steps until target convergence including curriculum overhead; None when the target never converged."""
    if result.converged_at is None:
        return None
    return result.ledger.g_T + result.converged_at


def total_reward(result: RunResult, episode_budget: int) -> RewardTotal:
    """Target-task reward over the first episode_budget target episodes; flagged when fewer exist."""
    if episode_budget < 0:
        raise ValueError(f"[ERROR] episode_budget must be >= 0, got {episode_budget}")
    used = result.target_rewards[:episode_budget]
    return RewardTotal(float(sum(used)), len(used), len(used) < episode_budget)
