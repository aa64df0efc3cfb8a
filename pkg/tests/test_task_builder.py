from pathlib import Path

import numpy as np
import pytest

from core.task_builder import build_agent, build_tasks
from ports.config_loader import config_from_dict, parse_config
from tests.conftest import write_tiny_maze_config

EXPERIMENTS = Path(__file__).resolve().parent.parent / "user_inputs" / "experiments"


def test_maze_sources_are_shrunk_targets(tmp_path):
    config = parse_config(write_tiny_maze_config(tmp_path))
    task_set = build_tasks(config)
    assert [t.task_id for t in task_set.tasks] == [0, 1]
    assert task_set.target.task_id == 2
    assert [t.name for t in task_set.tasks] == ["east", "wide_east"]
    target_cells = task_set.target.layout.feasible_cells()
    for task in task_set.tasks:
        assert task.layout.feasible_cells() <= target_cells
        assert task.layout.goal == task_set.target.layout.goal
    # each source keeps all of its own cells, so the overlap feature is 1
    assert task_set.features.pair(0, 2)[1] == 1.0
    agent = build_agent(config, task_set)
    assert agent.qtable.values.shape == (12, 4)


def test_builds_are_independent(tmp_path):
    config = parse_config(write_tiny_maze_config(tmp_path))
    a, b = build_tasks(config), build_tasks(config)
    assert a.target.env is not b.target.env


def test_gridworld_example_config():
    task_set = build_tasks(parse_config(EXPERIMENTS / "gridworld.json"))
    raw = {k: float(v[0]) for k, v in task_set.features.raw.items()}
    assert raw[len(task_set.tasks)] == 18.0
    assert sorted(raw[t.task_id] for t in task_set.tasks) == [1.0, 4.0, 9.0, 12.0]


def test_cartpole_tasks_share_the_target_discretizer():
    config = config_from_dict({
        "domain": "cartpole",
        "target": {"x_bound": 2.4, "angle_deg": 30},
        "sources": [{"x_bound": 4.0, "angle_deg": 60}, {"x_bound": 3.2, "angle_deg": 45}],
    })
    task_set = build_tasks(config)
    counts = {t.env.state_count for t in task_set.tasks} | {task_set.target.env.state_count}
    assert counts == {6 * 6 * 12 * 6}
    assert np.allclose(task_set.features.raw[0], [4.0, 60.0])
    assert np.allclose(task_set.features.raw[2], [2.4, 30.0])


def test_maze_example_config_nests_its_sources():
    task_set = build_tasks(parse_config(EXPERIMENTS / "maze.json"))
    sizes = [len(t.layout.feasible_cells()) for t in task_set.tasks] + [len(task_set.target.layout.feasible_cells())]
    assert sizes == [14, 28, 47, 69, 97]
    target = task_set.target.task_id
    # coverage pairs: [bias, share of i kept in j, share of j known from i]
    assert task_set.features.pair(3, target) == pytest.approx([1.0, 1.0, 69 / 97])
    assert task_set.features.pair(3, 0) == pytest.approx([1.0, 14 / 69, 1.0])
