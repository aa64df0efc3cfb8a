import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.environments import make_gridworld_env, parse_grid_layout  # noqa: E402
from core.mdp import Environment  # noqa: E402

TINY_MAZE = "\n".join([
    "....",
    ".#G.",
    "....",
])

TINY_GRID = "\n".join([
    "S...",
    ".##.",
    "...G",
])


class ChainEnv(Environment):
    """States 0..n-1 in a row; action 0 moves left, 1 moves right; `reward` on reaching n-1."""

    def __init__(self, n: int = 4, step_cap: int = 100, name: str = "chain", reward: float = 1.0):
        super().__init__(name, n, 2, step_cap)
        self.n = n
        self.reward = reward

    def _start(self, rng):
        return 0

    def _advance(self, s, a, rng):
        nxt = max(s - 1, 0) if a == 0 else min(s + 1, self.n - 1)
        if nxt == self.n - 1:
            return nxt, self.reward, True
        return nxt, 0.0, False

    def canonical_labels(self):
        return {s: s for s in range(self.n)}


class ConstantRewardEnv(Environment):
    """One state, two actions, a fixed reward every step, episodes end only at the cap."""

    def __init__(self, reward: float, step_cap: int = 50, name: str = "const"):
        super().__init__(name, 1, 2, step_cap)
        self.reward = reward

    def _start(self, rng):
        return 0

    def _advance(self, s, a, rng):
        return 0, self.reward, False

    def canonical_labels(self):
        return {0: "only"}


@pytest.fixture
def tiny_grid_env():
    return make_gridworld_env(parse_grid_layout(TINY_GRID), name="tiny_grid")


def write_tiny_maze_config(tmp_path, **overrides):
    import json
    layout = tmp_path / "maze.txt"
    layout.write_text(TINY_MAZE + "\n", encoding="utf-8")
    raw = {
        "domain": "maze",
        "name": "tiny",
        "target": {"layout": "maze.txt"},
        "sources": [{"name": "east", "keep": [0, 2, 2, 3]}, {"name": "wide_east", "keep": [0, 1, 2, 3]}],
        "selectors": ["baseline", "rmgs"],
        "probe_steps": 30,
        "measure_steps": 30,
        "probe_cap": 3000,
        "convergence_cap": 20000,
        "n_runs": 2,
        "seed": 3,
    }
    raw.update(overrides)
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path
