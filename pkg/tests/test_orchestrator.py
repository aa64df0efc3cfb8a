import numpy as np
import pytest

from agents.q_agent import Agent, tlearn, until_convergence
from core.errors import BudgetError
from core.mdp import make_rng
from core.orchestrator import (
    PHASE_TARGET,
    BudgetLedger,
    RunResult,
    RunSettings,
    run_active_simulators,
    time_to_threshold,
    total_reward,
)
from core.selectors import SelectorSettings, TaskSpec
from core.task_features import FeatureModel
from tests.conftest import ChainEnv, ConstantRewardEnv


def chain_tasks(sizes, target_size=6):
    tasks = [TaskSpec(i, f"chain{n}", ChainEnv(n, step_cap=50, name=f"chain{n}")) for i, n in enumerate(sizes)]
    target = TaskSpec(len(sizes), "target", ChainEnv(target_size, step_cap=50, name="target"))
    return tasks, target


def all_envs(tasks, target):
    return [t.env for t in tasks] + [target.env]


def test_baseline_reproduces_plain_q_learning():
    _, target = chain_tasks([], target_size=5)
    agent = Agent(5, 2)
    result = run_active_simulators(agent, [], target, None, "baseline", RunSettings(convergence_cap=20000), make_rng(5))

    plain = Agent(5, 2)
    outcome = tlearn(plain, ChainEnv(5, step_cap=50, name="target"), until_convergence(20000), make_rng(5).spawn(2)[0])
    assert np.array_equal(agent.qtable.values, plain.qtable.values)
    assert result.ledger.g_T == 0
    assert result.ledger.target == outcome.steps
    assert result.converged_at == outcome.converged_at


def test_baseline_ignores_the_source_set():
    tasks, target = chain_tasks([3, 4])
    result = run_active_simulators(Agent(6, 2), tasks, target, None, "baseline", RunSettings(convergence_cap=3000),
                                   make_rng(4))
    assert result.curriculum == []
    assert result.ledger.g_T == 0
    assert all(t.env.total_steps == 0 for t in tasks)
    assert result.ledger.target == target.env.total_steps


def test_empty_task_set_runs_as_baseline():
    _, target = chain_tasks([], target_size=4)
    result = run_active_simulators(Agent(4, 2), [], target, None, "rmgs", RunSettings(convergence_cap=500), make_rng(1))
    assert result.curriculum == []
    assert result.ledger.selection == []


def test_every_step_lands_in_the_ledger():
    tasks, target = chain_tasks([3, 4, 5])
    settings = RunSettings(convergence_cap=3000, selector=SelectorSettings(probe_steps=40))
    result = run_active_simulators(Agent(3, 2), tasks, target, None, "rmgs", settings, make_rng(2))
    assert sorted(result.curriculum) == [0, 1, 2]
    assert len(result.ledger.selection) == len(result.ledger.training) == 3
    assert result.ledger.grand_total == sum(env.total_steps for env in all_envs(tasks, target))
    assert result.ledger.selection[0] == 120


def test_ltms_preprocessing_is_counted():
    tasks, target = chain_tasks([3, 4])
    settings = RunSettings(convergence_cap=2000, selector=SelectorSettings(measure_steps=30, probe_cap=300))
    result = run_active_simulators(Agent(3, 2), tasks, target, None, "ltms", settings, make_rng(4))
    assert result.ledger.preprocess > 0
    assert result.ledger.selection == [0, 0]
    assert result.ledger.grand_total == sum(env.total_steps for env in all_envs(tasks, target))


def test_fixed_stages_fill_the_budget_exactly():
    tasks = [TaskSpec(i, f"t{i}", ConstantRewardEnv(1.0, name=f"t{i}")) for i in range(2)]
    target = TaskSpec(2, "target", ConstantRewardEnv(0.0, name="target"))
    settings = RunSettings(stage_steps=100)
    result = run_active_simulators(Agent(1, 2), tasks, target, 1000, "fixed", settings, make_rng(0), fixed_order=[1, 0])
    assert result.curriculum == [1, 0]
    assert result.ledger.training == [100, 100]
    assert result.ledger.selection == [0, 0]
    assert result.ledger.target == 800
    assert result.ledger.grand_total == 1000
    assert target.env.total_steps == 800
    assert not result.budget_exhausted


def test_stage_is_clipped_to_remaining_budget():
    tasks = [TaskSpec(i, f"t{i}", ConstantRewardEnv(1.0, name=f"t{i}")) for i in range(2)]
    target = TaskSpec(2, "target", ConstantRewardEnv(0.0, name="target"))
    result = run_active_simulators(Agent(1, 2), tasks, target, 150, "fixed", RunSettings(stage_steps=100),
                                   make_rng(0), fixed_order=[0, 1])
    assert result.ledger.training == [100, 50]
    assert result.budget_exhausted
    assert result.ledger.target == 0
    assert result.ledger.grand_total == 150


def test_probes_can_exhaust_the_budget():
    tasks = [TaskSpec(i, f"t{i}", ConstantRewardEnv(float(i), name=f"t{i}")) for i in range(3)]
    target = TaskSpec(3, "target", ConstantRewardEnv(0.0, name="target"))
    settings = RunSettings(stage_steps=10, selector=SelectorSettings(probe_steps=300))
    result = run_active_simulators(Agent(1, 2), tasks, target, 500, "rmgs", settings, make_rng(0))
    assert result.budget_exhausted
    assert result.curriculum == []
    assert result.ledger.selection == [900]
    assert result.ledger.training == [0]
    assert target.env.total_steps == 0
    assert result.converged_at is None
    assert time_to_threshold(result) is None


def test_skipped_stage_records_zero_training():
    tasks = [TaskSpec(i, f"t{i}", ConstantRewardEnv(float(i + 1), name=f"t{i}")) for i in range(3)]
    target = TaskSpec(3, "target", ConstantRewardEnv(0.0, name="target"))
    features = FeatureModel.from_raw({0: [1.0], 1: [2.0], 2: [3.0], 3: [4.0]})
    settings = RunSettings(stage_steps=50, convergence_cap=200,
                           selector=SelectorSettings(probe_steps=10, prune_threshold=1e9))
    result = run_active_simulators(Agent(1, 2), tasks, target, None, "active_rmgs", settings, make_rng(0),
                                   features=features)
    assert result.curriculum == [2]
    assert sorted(result.skipped) == [0, 1]
    assert result.ledger.training == [50, 0]
    assert result.stages[-1].task is None
    assert result.ledger.target == 200


def test_target_records_accumulate_reward():
    tasks, target = chain_tasks([3])
    result = run_active_simulators(Agent(3, 2), tasks, target, 3000, "rmgs", RunSettings(convergence_cap=1000),
                                   make_rng(8))
    steps = [r.cumulative_steps for r in result.records]
    assert steps == sorted(steps)
    target_records = [r for r in result.records if r.phase == PHASE_TARGET]
    assert [r.episode_reward for r in target_records] == result.target_rewards
    assert target_records[-1].cumulative_reward == pytest.approx(sum(result.target_rewards))
    assert result.ledger.grand_total <= 3000


def test_nonpositive_budget_is_rejected():
    tasks, target = chain_tasks([3])
    with pytest.raises(BudgetError):
        run_active_simulators(Agent(3, 2), tasks, target, 0, "rmgs", RunSettings(), make_rng(0))


def test_time_to_threshold_adds_overhead():
    result = RunResult(agent=None, selector="rmgs", ledger=BudgetLedger(preprocess=10, selection=[5], training=[20]))
    result.converged_at = 7
    assert time_to_threshold(result) == 42


def test_total_reward_window():
    result = RunResult(agent=None, selector="baseline", target_rewards=[1.0, 0.0, 2.0])
    assert total_reward(result, 2) == (1.0, 2, False)
    assert total_reward(result, 5) == (3.0, 3, True)
    assert total_reward(result, 0) == (0.0, 0, False)
    with pytest.raises(ValueError):
        total_reward(result, -1)
