"""
agents/q_agent.py | Tabular Q-Learning Agent
Purpose: Q-learning learner with epsilon-greedy exploration, cloning, Q-function transfer, convergence
detection and the three training/probing oracles (tlearn, evaluate_task, transfer_measure).
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy, pandas
Abstract Spec: The agent owns a dense Q table, its exploration rate and a convergence monitor. Training
on a task other than the last one first transfers the Q table over shared canonical state labels;
the exploration rate carries over unless the config asks for a restart. Convergence means: the last
`window` completed, rewarded episodes each changed no Q entry by more than the tolerance. Fixed step
budgets cut episodes mid-way.
"""
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd

from core.errors import ContractViolation
from core.log_utils import log_event
from core.mdp import Environment, Rng, Transition

TIE_BREAKS = ("lowest", "random")


class QTable:
    """Dense value[state][action] table."""

    def __init__(self, state_count: int, action_count: int, init_value: float = 0.0):
        self.values = np.full((int(state_count), int(action_count)), float(init_value))
        self.init_value = float(init_value)

    @property
    def state_count(self) -> int:
        return self.values.shape[0]

    @property
    def action_count(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "QTable":
        other = QTable.__new__(QTable)
        other.values = self.values.copy()
        other.init_value = self.init_value
        return other

    def to_frame(self) -> pd.DataFrame:
        states, actions = np.meshgrid(np.arange(self.state_count), np.arange(self.action_count), indexing="ij")
        return pd.DataFrame({
            "state": states.ravel(),
            "action": actions.ravel(),
            "value": self.values.ravel(),
        })

    def save_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
        return path

    @classmethod
    def load_csv(cls, path, init_value: float = 0.0) -> "QTable":
        df = pd.read_csv(path)
        missing = [c for c in ("state", "action", "value") if c not in df.columns]
        if missing:
            raise KeyError(f"[ERROR] Q table CSV {path} is missing columns {missing}")
        table = cls(int(df["state"].max()) + 1, int(df["action"].max()) + 1, init_value)
        table.values[df["state"].to_numpy(), df["action"].to_numpy()] = df["value"].to_numpy(dtype=float)
        return table


@dataclass(frozen=True)
class AgentConfig:
    learning_rate: float = 0.6
    discount: float = 0.9
    epsilon: float = 1.0
    epsilon_decay: float = 0.99
    epsilon_floor: float = 0.01
    convergence_window: int = 5
    convergence_tolerance: float = 1e-4
    convergence_cap: int = 200000
    probe_cap: int = 20000
    reset_epsilon_on_switch: bool = False
    q_init: float = 0.0
    # "lowest" | "random" among the maximal actions
    tie_break: str = "lowest"

    def __post_init__(self):
        checks = [
            ("learning_rate", 0 < self.learning_rate <= 1, "must be in (0, 1]"),
            ("discount", 0 < self.discount < 1, "must be in (0, 1)"),
            ("epsilon", 0 <= self.epsilon <= 1, "must be in [0, 1]"),
            ("epsilon_decay", 0 < self.epsilon_decay <= 1, "must be in (0, 1]"),
            ("epsilon_floor", 0 <= self.epsilon_floor <= 1, "must be in [0, 1]"),
            ("convergence_window", self.convergence_window >= 1, "must be >= 1"),
            ("convergence_tolerance", self.convergence_tolerance > 0, "must be > 0"),
            ("convergence_cap", self.convergence_cap >= 1, "must be >= 1"),
            ("probe_cap", self.probe_cap >= 1, "must be >= 1"),
            ("tie_break", self.tie_break in TIE_BREAKS, f"must be one of {', '.join(TIE_BREAKS)}"),
        ]
        for name, ok, rule in checks:
            if not ok:
                raise ValueError(f"[ERROR] AgentConfig.{name} {rule}, got {getattr(self, name)}")


class ConvergenceMonitor:
    """Fires once `window` consecutive rewarded episodes each had max |dQ| below tolerance."""

    def __init__(self, window: int = 5, tolerance: float = 1e-4):
        self.window = window
        self.tolerance = tolerance
        self.history = deque(maxlen=window)

    def reset(self) -> None:
        self.history.clear()

    def observe(self, max_delta: float, episode_reward: float) -> bool:
        self.history.append(max_delta < self.tolerance and episode_reward > 0)
        return self.converged

    @property
    def converged(self) -> bool:
        return len(self.history) == self.window and all(self.history)

    def copy(self) -> "ConvergenceMonitor":
        other = ConvergenceMonitor(self.window, self.tolerance)
        other.history.extend(self.history)
        return other


class Agent:
    def __init__(self, state_count: int, action_count: int, config: AgentConfig = None):
        self.config = config or AgentConfig()
        self.qtable = QTable(state_count, action_count, self.config.q_init)
        self.monitor = ConvergenceMonitor(self.config.convergence_window, self.config.convergence_tolerance)
        self.epsilon = self.config.epsilon
        self.total_steps = 0
        self.episodes = 0
        # environment last trained on; shared by reference, never copied
        self.task: Optional[Environment] = None

    def decay_epsilon(self, floor: float) -> None:
        self.epsilon = max(self.epsilon * self.config.epsilon_decay, floor)


def select_action(agent: Agent, s: int, rng: Rng) -> int:
    """Epsilon-greedy; greedy ties go to the lowest action index, or a uniform pick with tie_break="random"."""
    if rng.random() < agent.epsilon:
        return int(rng.integers(agent.qtable.action_count))
    row = agent.qtable.values[s]
    if agent.config.tie_break == "random":
        best = np.flatnonzero(row == row.max())
        if len(best) > 1:
            return int(best[rng.integers(len(best))])
        return int(best[0])
    return int(np.argmax(row))


def q_update(agent: Agent, t: Transition) -> float:
    """
    Purpose: Apply one Q-learning backup for transition t.
    Inputs: agent (Agent), t (Transition)
    Outputs: |change| of Q(s, a)
    Role: Bootstraps from max_a' Q(s', a') unless the task ended the episode.
    """
    q = agent.qtable.values
    target = t.reward
    if not t.terminal or t.truncated:
        target += agent.config.discount * float(q[t.next_state].max())
    delta = agent.config.learning_rate * (target - q[t.state, t.action])
    q[t.state, t.action] += delta
    return abs(float(delta))


def clone_agent(agent: Agent) -> Agent:
    other = Agent.__new__(Agent)
    other.config = agent.config
    other.qtable = agent.qtable.copy()
    other.monitor = agent.monitor.copy()
    other.epsilon = agent.epsilon
    other.total_steps = agent.total_steps
    other.episodes = agent.episodes
    other.task = agent.task
    return other


def transfer_q(source: QTable, source_env: Environment, target_env: Environment) -> QTable:
    """
    Purpose: Initialize a target-task Q table from a source-task one.
    Inputs: source (QTable), source_env, target_env (Environment) - both expose canonical_labels()
    Outputs: QTable sized for target_env
    Role: Copies rows whose canonical state label exists in both tasks; every other entry keeps
          the init value.
    """
    if source_env.action_count != target_env.action_count:
        raise ContractViolation(
            f"[ERROR] transfer_q: action counts differ ({source_env.action_count} vs {target_env.action_count})"
        )
    result = QTable(target_env.state_count, target_env.action_count, source.init_value)
    by_label = {label: s for s, label in source_env.canonical_labels().items()}
    for t_state, label in target_env.canonical_labels().items():
        s_state = by_label.get(label)
        if s_state is not None:
            result.values[t_state] = source.values[s_state]
    return result


@dataclass(frozen=True)
class StopRule:
    kind: str
    n: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("until_convergence", "fixed_steps", "step_budget_remaining"):
            raise ValueError(f"[ERROR] Unknown stop rule '{self.kind}'")
        if self.n is not None and self.n < 0:
            raise ValueError(f"[ERROR] Stop rule budget must be >= 0, got {self.n}")
        if self.kind != "until_convergence" and self.n is None:
            raise ValueError(f"[ERROR] Stop rule '{self.kind}' needs a step count")

    @property
    def measures_convergence(self) -> bool:
        return self.kind != "fixed_steps"


def until_convergence(cap: Optional[int] = None) -> StopRule:
    return StopRule("until_convergence", cap)


def fixed_steps(n: int) -> StopRule:
    return StopRule("fixed_steps", int(n))


def step_budget_remaining(n: int) -> StopRule:
    return StopRule("step_budget_remaining", int(n))


class EpisodeLog(NamedTuple):
    reward: float
    steps_at_end: int
    complete: bool


@dataclass
class TrainOutcome:
    reward: float = 0.0
    steps: int = 0
    converged: bool = False
    converged_at: Optional[int] = None
    episodes: List[EpisodeLog] = field(default_factory=list)


class ProbeResult(NamedTuple):
    reward: float
    steps: int


def _enter_task(agent: Agent, env: Environment) -> None:
    if agent.task is env:
        return
    if agent.task is not None:
        agent.qtable = transfer_q(agent.qtable, agent.task, env)
    elif agent.qtable.state_count != env.state_count or agent.qtable.action_count != env.action_count:
        agent.qtable = QTable(env.state_count, env.action_count, agent.config.q_init)
    if agent.config.reset_epsilon_on_switch:
        agent.epsilon = agent.config.epsilon
    agent.task = env


def tlearn(agent: Agent, env: Environment, stop: StopRule, rng: Rng, verbose: bool = False) -> TrainOutcome:
    """
    Purpose: Train the agent in place on env until the stop rule fires.
    Inputs:
        agent (Agent), env (Environment)
        stop (StopRule): until_convergence(cap) | fixed_steps(n) | step_budget_remaining(n)
        rng (Generator)
    Outputs: TrainOutcome with accumulated reward, steps used, convergence info and episode log
    Role: The TLearn oracle. Fixed budgets are exact (mid-episode cutoff); convergence rules
          stop at the first converged episode and run with epsilon floor 0.
    """
    if stop.kind == "until_convergence":
        limit = stop.n if stop.n is not None else agent.config.convergence_cap
    else:
        limit = stop.n
    outcome = TrainOutcome()
    if limit == 0:
        return outcome
    _enter_task(agent, env)
    floor = 0.0 if stop.measures_convergence else agent.config.epsilon_floor
    if stop.measures_convergence:
        agent.monitor.reset()
    steps = 0
    while steps < limit:
        s = env.reset(rng)
        ep_reward = 0.0
        ep_delta = 0.0
        done = False
        while steps < limit:
            a = select_action(agent, s, rng)
            t = env.step(s, a, rng)
            ep_delta = max(ep_delta, q_update(agent, t))
            ep_reward += t.reward
            steps += 1
            if t.terminal:
                done = True
                break
            s = t.next_state
        outcome.reward += ep_reward
        outcome.episodes.append(EpisodeLog(ep_reward, steps, done))
        if not done:
            break
        agent.episodes += 1
        agent.decay_epsilon(floor)
        if stop.measures_convergence and agent.monitor.observe(ep_delta, ep_reward):
            outcome.converged = True
            outcome.converged_at = steps
            break
    outcome.steps = steps
    agent.total_steps += steps
    log_event(
        f"[STEP] tlearn on {env.name}: {stop.kind}({stop.n}) -> steps={steps} reward={outcome.reward:g} converged={outcome.converged}",
        verbose,
    )
    return outcome


def evaluate_task(clone: Agent, env: Environment, eval_steps: int, rng: Rng) -> ProbeResult:
    """Reward a clone accumulates while training on env for exactly eval_steps steps."""
    out = tlearn(clone, env, fixed_steps(eval_steps), rng)
    return ProbeResult(out.reward, out.steps)


def transfer_measure(clone: Agent, task_i: Environment, task_j: Environment, measure_steps: int, rng: Rng,
                     probe_cap: Optional[int] = None) -> ProbeResult:
    """
    Purpose: Measure how well knowledge from task_i transfers to task_j.
    Inputs: clone (Agent copy), task_i, task_j (Environment), measure_steps (int), rng, probe_cap (int)
    Outputs: ProbeResult(reward accumulated on task_j, total steps of the whole probe)
    Role: The clone learns task_i until convergence (capped), transfers, then trains on task_j for
          measure_steps steps.
    """
    cap = probe_cap if probe_cap is not None else clone.config.probe_cap
    first = tlearn(clone, task_i, until_convergence(cap), rng)
    second = tlearn(clone, task_j, fixed_steps(measure_steps), rng)
    return ProbeResult(second.reward, first.steps + second.steps)
