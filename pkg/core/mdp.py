"""
core/mdp.py | Episodic MDP Core
Purpose: Episodic-MDP abstraction, episode execution and seeded pseudo-randomness shared by every
environment and agent.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy
Abstract Spec: Environments expose reset/step over integer state and action ids with a per-episode
step cap. All randomness flows through an explicitly passed numpy Generator; there is no global
generator, so clones and Monte Carlo runs are reproducible.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Tuple

import numpy as np

from core.errors import ContractViolation

Rng = np.random.Generator
Policy = Callable[[int, Rng], int]


def make_rng(seed: int) -> Rng:
    """Generator for a 64-bit seed; identical seed gives an identical stream."""
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def child_seed(master_seed: int, run_index: int) -> int:
    """
    Purpose: Derive the seed of Monte Carlo run `run_index` from the master seed.
    Inputs: master_seed (int), run_index (int)
    Outputs: 64-bit unsigned seed (int)
    Role: Runs are independent of each other and of the order they execute in.
    """
    state = np.random.SeedSequence([int(master_seed), int(run_index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class Transition:
    state: int
    action: int
    reward: float
    next_state: int
    terminal: bool
    # set when the step cap, not the task, ended the episode
    truncated: bool = False


@dataclass
class EpisodeTrace:
    transitions: List[Transition] = field(default_factory=list)
    total_reward: float = 0.0
    steps: int = 0

    def append(self, t: Transition) -> None:
        self.transitions.append(t)
        self.total_reward += t.reward
        self.steps += 1


class Environment(ABC):
    """
    Base class for every task. Subclasses implement _start and _advance; this class owns
    validation, the episode step counter, the cap rule and the lifetime step counter.
    """

    def __init__(self, name: str, state_count: int, action_count: int, step_cap: int):
        if action_count < 1:
            raise ContractViolation(f"[ERROR] {name}: action count must be >= 1, got {action_count}")
        if state_count < 1:
            raise ContractViolation(f"[ERROR] {name}: state count must be >= 1, got {state_count}")
        if step_cap < 1:
            raise ContractViolation(f"[ERROR] {name}: step cap must be >= 1, got {step_cap}")
        self.name = name
        self.state_count = int(state_count)
        self.action_count = int(action_count)
        self.step_cap = int(step_cap)
        self.episode_steps = 0
        self.total_steps = 0
        self.current_state = None
        self._done = True

    @abstractmethod
    def _start(self, rng: Rng) -> int:
        ...

    @abstractmethod
    def _advance(self, s: int, a: int, rng: Rng) -> Tuple[int, float, bool]:
        """Return (next_state, reward, ended_by_task)."""

    @abstractmethod
    def canonical_labels(self) -> Dict[int, Hashable]:
        """StateId -> label shared across tasks of one family (used for Q transfer)."""

    def _check_state(self, s: int) -> None:
        if not 0 <= s < self.state_count:
            raise ContractViolation(f"[ERROR] {self.name}: state {s} outside [0, {self.state_count})")

    def reset(self, rng: Rng) -> int:
        s = self._start(rng)
        self.episode_steps = 0
        self.current_state = s
        self._done = False
        return s

    def step(self, s: int, a: int, rng: Rng) -> Transition:
        if self._done:
            raise ContractViolation(f"[ERROR] {self.name}: step called on a finished episode; call env_reset first")
        self._check_state(s)
        if not 0 <= a < self.action_count:
            raise ContractViolation(f"[ERROR] {self.name}: action {a} outside [0, {self.action_count})")
        next_state, reward, ended = self._advance(s, a, rng)
        self.episode_steps += 1
        self.total_steps += 1
        capped = not ended and self.episode_steps >= self.step_cap
        self._done = ended or capped
        self.current_state = next_state
        return Transition(s, a, float(reward), next_state, ended or capped, capped)


def env_reset(env: Environment, rng: Rng) -> int:
    return env.reset(rng)


def env_step(env: Environment, s: int, a: int, rng: Rng) -> Transition:
    return env.step(s, a, rng)


def run_episode(env: Environment, policy: Policy, rng: Rng) -> EpisodeTrace:
    """
    Purpose: Run one full episode from env_reset until a terminal transition.
    Inputs: env (Environment), policy (callable(state, rng) -> action), rng (Generator)
    Outputs: EpisodeTrace with every transition, its total reward and step count
    Role: Plain episode execution for tests, oracles and policy evaluation.
    """
    trace = EpisodeTrace()
    s = env_reset(env, rng)
    while True:
        t = env_step(env, s, policy(s, rng), rng)
        trace.append(t)
        if t.terminal:
            return trace
        s = t.next_state
