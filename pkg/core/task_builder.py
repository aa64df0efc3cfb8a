"""
core/task_builder.py | Task Construction
Purpose: Turn an ExperimentConfig into fresh environments (training tasks 0..K-1, target K), the task
feature model used by the Active selectors, and a correctly sized agent.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy
Abstract Spec: Maze sources are shrunk copies of the target maze (or their own layout files); grid-world
sources move the start cell; cart-pole sources loosen the failure bounds. Every cart-pole task of one
experiment shares the discretizer built from the target's bounds.
"""
from typing import List, NamedTuple

from agents.q_agent import Agent
from core.environments import (
    CartPoleParams,
    DiscretizerSpec,
    make_cartpole_env,
    make_gridworld_env,
    make_maze_env,
    move_start,
    shrink_maze,
)
from core.selectors import TaskSpec
from core.task_features import FeatureModel
from ports.config_loader import ExperimentConfig
from ports.layout_io import load_layout


class TaskSet(NamedTuple):
    tasks: List[TaskSpec]
    target: TaskSpec
    features: FeatureModel


def _grid_tasks(config: ExperimentConfig) -> TaskSet:
    base = load_layout(config.target["layout"])
    make_env = make_maze_env if config.domain == "maze" else make_gridworld_env
    layouts = {}
    tasks = []
    for idx, src in enumerate(config.sources):
        if "layout" in src:
            layout = load_layout(src["layout"])
        elif config.domain == "maze":
            layout = shrink_maze(base, tuple(src["keep"]))
        else:
            layout = move_start(base, tuple(src["start"]))
        name = src.get("name", f"source_{idx}")
        layouts[idx] = layout
        tasks.append(TaskSpec(idx, name, make_env(layout, name=name), layout))
    k = len(tasks)
    layouts[k] = base
    target = TaskSpec(k, config.target.get("name", "target"), make_env(base, name="target"), base)
    if config.domain == "maze":
        features = FeatureModel.for_maze(layouts, coverage=config.pair_features == "coverage")
    else:
        features = FeatureModel.for_gridworld(layouts)
    return TaskSet(tasks, target, features)


def _cartpole_tasks(config: ExperimentConfig) -> TaskSet:
    target_params = CartPoleParams.from_degrees(config.target["x_bound"], config.target["angle_deg"])
    disc = DiscretizerSpec.for_params(target_params, config.cartpole_bins)
    raw = {}
    tasks = []
    for idx, src in enumerate(config.sources):
        name = src.get("name", f"source_{idx}")
        params = CartPoleParams.from_degrees(src["x_bound"], src["angle_deg"])
        raw[idx] = [float(src["x_bound"]), float(src["angle_deg"])]
        tasks.append(TaskSpec(idx, name, make_cartpole_env(params, disc, name=name), params))
    k = len(tasks)
    raw[k] = [float(config.target["x_bound"]), float(config.target["angle_deg"])]
    target = TaskSpec(k, config.target.get("name", "target"), make_cartpole_env(target_params, disc, name="target"),
                      target_params)
    return TaskSet(tasks, target, FeatureModel.from_raw(raw))


def build_tasks(config: ExperimentConfig) -> TaskSet:
    """
    Purpose: Build the training tasks, the target and the feature model for one run.
    Inputs: config (ExperimentConfig)
    Outputs: TaskSet(tasks, target, features)
    Role: Called once per Monte Carlo run so each run owns its environments.
    """
    if config.domain == "cartpole":
        return _cartpole_tasks(config)
    return _grid_tasks(config)


def build_agent(config: ExperimentConfig, task_set: TaskSet) -> Agent:
    env = task_set.target.env
    return Agent(env.state_count, env.action_count, config.agent)
