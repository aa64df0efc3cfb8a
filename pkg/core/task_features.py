"""
core/task_features.py | Task Feature Constructions
Purpose: Per-task raw features, pair and sequence-task feature vectors, domain features for maze and
grid world, and the diversity score used to prune redundant tasks.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy
Abstract Spec: Pair vectors are f^{ij}_k = (f_ik - f_jk) / max(f_ik, eps) with a leading bias 1. Sequence
features are the mean of the member tasks' raw features. Maze pairs use the share of task i's feasible
cells that task j also has (plus the reverse share under the coverage option); grid world pairs use the
difference of start-to-goal distances.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from core.environments import GridLayout, bfs_distance

DEFAULT_EPSILON = 1e-6


def _bias(vec) -> np.ndarray:
    return np.concatenate(([1.0], np.asarray(vec, dtype=float).ravel()))


def pair_feature(f_i, f_j, eps: float = DEFAULT_EPSILON) -> np.ndarray:
    if eps <= 0:
        raise ValueError(f"[ERROR] pair_feature: eps must be > 0, got {eps}")
    f_i = np.asarray(f_i, dtype=float).ravel()
    f_j = np.asarray(f_j, dtype=float).ravel()
    if f_i.shape != f_j.shape:
        raise ValueError(f"[ERROR] pair_feature: dimension mismatch {f_i.shape} vs {f_j.shape}")
    return _bias((f_i - f_j) / np.maximum(f_i, eps))


def sequence_feature(member_features: Sequence) -> np.ndarray:
    """Componentwise mean of the raw features of the tasks already in the curriculum."""
    if len(member_features) == 0:
        raise ValueError("[ERROR] sequence_feature: curriculum sequence is empty")
    return np.mean(np.array([np.asarray(f, dtype=float).ravel() for f in member_features]), axis=0)


def sequence_task_feature(f_seq, f_j, eps: float = DEFAULT_EPSILON) -> np.ndarray:
    return pair_feature(f_seq, f_j, eps)


def maze_task_feature(layout_i: GridLayout, layout_j: GridLayout) -> float:
    cells_i = layout_i.feasible_cells()
    return len(cells_i & layout_j.feasible_cells()) / len(cells_i)


def start_distance(layout: GridLayout) -> int:
    if layout.start is None:
        raise ValueError("[ERROR] start_distance: layout has no start cell")
    d = bfs_distance(layout, layout.start, layout.goal)
    if d is None:
        raise ValueError(f"[ERROR] Goal {layout.goal} is unreachable from start {layout.start}")
    return d


def gridworld_task_feature(layout_i: GridLayout, layout_j: GridLayout) -> float:
    return float(start_distance(layout_i) - start_distance(layout_j))


def diversity_prune(f_task, member_features: Sequence, threshold: float) -> bool:
    """
    Purpose: Decide whether a task adds diversity to the curriculum built so far.
    Inputs: f_task (raw features), member_features (raw features of curriculum tasks), threshold
    Outputs: True to keep, False to drop
    Role: Score = min Euclidean distance to any member; keep iff score > threshold.
    """
    if len(member_features) == 0:
        return True
    f_task = np.asarray(f_task, dtype=float).ravel()
    score = min(float(np.linalg.norm(f_task - np.asarray(f, dtype=float).ravel())) for f in member_features)
    return score > threshold


@dataclass
class FeatureModel:
    """
    Raw features per TaskId (target included) and the domain pair-feature function.
    pair(i, j) returns the bias-augmented regression vector for transfer i -> j.
    """

    raw: Dict[int, np.ndarray]
    pair_fn: Callable[[int, int], np.ndarray]
    eps: float = DEFAULT_EPSILON

    def pair(self, i: int, j: int) -> np.ndarray:
        return np.asarray(self.pair_fn(i, j), dtype=float)

    def sequence_task(self, members: Sequence[int], j: int) -> np.ndarray:
        f_seq = sequence_feature([self.raw[m] for m in members])
        return sequence_task_feature(f_seq, self.raw[j], self.eps)

    @classmethod
    def for_maze(cls, layouts: Dict[int, GridLayout], eps: float = DEFAULT_EPSILON,
                 coverage: bool = False) -> "FeatureModel":
        """With coverage=True the pair vector also carries the share of task j's cells that task i has."""
        raw = {k: np.array([float(len(l.feasible_cells()))]) for k, l in layouts.items()}
        if coverage:
            return cls(raw, lambda i, j: _bias([maze_task_feature(layouts[i], layouts[j]),
                                               maze_task_feature(layouts[j], layouts[i])]), eps)
        return cls(raw, lambda i, j: _bias([maze_task_feature(layouts[i], layouts[j])]), eps)

    @classmethod
    def for_gridworld(cls, layouts: Dict[int, GridLayout], eps: float = DEFAULT_EPSILON) -> "FeatureModel":
        raw = {k: np.array([float(start_distance(l))]) for k, l in layouts.items()}
        return cls(raw, lambda i, j: _bias([gridworld_task_feature(layouts[i], layouts[j])]), eps)

    @classmethod
    def from_raw(cls, raw: Dict[int, Sequence[float]], eps: float = DEFAULT_EPSILON) -> "FeatureModel":
        raw = {k: np.asarray(v, dtype=float).ravel() for k, v in raw.items()}
        return cls(raw, lambda i, j: pair_feature(raw[i], raw[j], eps), eps)
