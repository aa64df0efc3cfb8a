import heapq
import math
from pathlib import Path

import numpy as np
import pytest

from core.environments import (
    CartPoleParams,
    DiscretizerSpec,
    bfs_distance,
    make_cartpole_env,
    make_gridworld_env,
    make_maze_env,
    move_start,
    parse_grid_layout,
    serialize_grid_layout,
    shrink_maze,
)
from core.errors import LayoutParseError
from core.mdp import make_rng, run_episode
from ports.layout_io import load_layout

LAYOUTS = Path(__file__).resolve().parent.parent / "user_inputs" / "layouts"


def test_shipped_maze_layout_round_trips():
    text = (LAYOUTS / "maze_target.txt").read_text(encoding="utf-8")
    layout = parse_grid_layout(text)
    assert (layout.height, layout.width, layout.goal, layout.start) == (12, 12, (10, 10), None)
    assert serialize_grid_layout(layout) == text


@pytest.mark.parametrize("text, row", [
    ("...\n..\n..G", 1),
    ("..G\n.x.", 1),
    ("G.G", 0),
])
def test_parse_errors_carry_position(text, row):
    with pytest.raises(LayoutParseError) as err:
        parse_grid_layout(text)
    assert err.value.row == row


def test_parse_requires_goal():
    with pytest.raises(LayoutParseError):
        parse_grid_layout("...\n.S.")


def test_gridworld_distances_match_shipped_sources():
    layout = load_layout(LAYOUTS / "gridworld_target.txt")
    assert bfs_distance(layout, layout.start, layout.goal) == 18
    for start, expected in [((8, 9), 1), ((6, 8), 4), ((4, 5), 9), ((0, 6), 12)]:
        assert bfs_distance(move_start(layout, start), start, layout.goal) == expected


def test_bfs_unreachable_returns_none():
    layout = parse_grid_layout(".#G\n.#.")
    assert bfs_distance(layout, (0, 0), (0, 2)) is None


def test_shrink_maze_keeps_goal_and_subset():
    layout = load_layout(LAYOUTS / "maze_target.txt")
    small = shrink_maze(layout, (8, 8, 11, 11))
    assert small.goal == layout.goal
    assert small.feasible_cells() < layout.feasible_cells()
    with pytest.raises(ValueError):
        shrink_maze(layout, (0, 0, 1, 1))


def test_shipped_maze_sources_are_nested_and_connected():
    layout = load_layout(LAYOUTS / "maze_target.txt")
    regions = [(8, 8, 11, 11), (6, 6, 11, 11), (4, 4, 11, 11), (2, 2, 11, 11)]
    cells = [shrink_maze(layout, keep).feasible_cells() for keep in regions] + [layout.feasible_cells()]
    assert [len(c) for c in cells] == [14, 28, 47, 69, 97]
    for smaller, larger in zip(cells, cells[1:]):
        assert smaller < larger
    for keep in regions:
        small = shrink_maze(layout, keep)
        assert all(bfs_distance(small, cell, small.goal) is not None for cell in small.feasible_cells())


def test_maze_starts_are_uniform_over_non_goal_cells():
    layout = load_layout(LAYOUTS / "maze_target.txt")
    env = make_maze_env(layout)
    rng = make_rng(21)
    cells = sorted(layout.feasible_cells() - {layout.goal})
    index = {cell: i for i, cell in enumerate(cells)}
    n = 10000
    counts = np.bincount([index[layout.cell_of(env.reset(rng))] for _ in range(n)], minlength=len(cells))
    expected = n / len(cells)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # Wilson-Hilferty 99.9% quantile of chi-square with len(cells) - 1 degrees of freedom
    df = len(cells) - 1
    critical = df * (1 - 2 / (9 * df) + 3.09 * math.sqrt(2 / (9 * df))) ** 3
    assert chi2 < critical
    sigma = math.sqrt(n * (1 / len(cells)) * (1 - 1 / len(cells)))
    assert np.all(np.abs(counts - expected) < 4.5 * sigma)


def unit_dijkstra(layout, start, goal):
    dist = {start: 0}
    heap = [(0, start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if cell == goal:
            return d
        if d > dist[cell]:
            continue
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nxt = (cell[0] + dr, cell[1] + dc)
            if layout.is_feasible(nxt) and d + 1 < dist.get(nxt, math.inf):
                dist[nxt] = d + 1
                heapq.heappush(heap, (d + 1, nxt))
    return None


def test_bfs_matches_dijkstra_on_random_layouts():
    rng = make_rng(17)
    for _ in range(25):
        walls = rng.random((8, 8)) < 0.3
        rows = ["".join("#" if w else "." for w in row) for row in walls]
        free = [(r, c) for r in range(8) for c in range(8) if not walls[r, c]]
        goal = free[int(rng.integers(len(free)))]
        rows[goal[0]] = rows[goal[0]][:goal[1]] + "G" + rows[goal[0]][goal[1] + 1:]
        layout = parse_grid_layout("\n".join(rows))
        for cell in layout.feasible_cells():
            assert bfs_distance(layout, cell, goal) == unit_dijkstra(layout, cell, goal)


def test_maze_random_start_is_feasible_non_goal():
    layout = load_layout(LAYOUTS / "maze_target.txt")
    env = make_maze_env(layout)
    rng = make_rng(5)
    starts = {layout.cell_of(env.reset(rng)) for _ in range(300)}
    assert layout.goal not in starts
    assert starts <= layout.feasible_cells()
    assert len(starts) > 10


def test_wall_move_is_noop_and_goal_rewards():
    env = make_gridworld_env(parse_grid_layout("S#\n.G"))
    rng = make_rng(0)
    s = env.reset(rng)
    t = env.step(s, 3, rng)  # right into the wall
    assert t.next_state == s and t.reward == 0.0 and not t.terminal
    t = env.step(s, 0, rng)  # up, off grid
    assert t.next_state == s
    t = env.step(s, 1, rng)
    t = env.step(t.next_state, 3, rng)
    assert t.reward == 1.0 and t.terminal and not t.truncated


def test_corridor_random_walk_hitting_time():
    # one row "S.G": expected hitting time from distance 2 under a uniform 4-action walk is 12
    env = make_gridworld_env(parse_grid_layout("S.G"))
    rng = make_rng(11)
    lengths = [run_episode(env, lambda s, r: int(r.integers(4)), rng).steps for _ in range(4000)]
    assert np.mean(lengths) == pytest.approx(12.0, abs=0.75)


def test_gridworld_step_cap_is_500():
    env = make_gridworld_env(parse_grid_layout("S#G\n.#."))
    trace = run_episode(env, lambda s, r: 0, make_rng(0))
    assert trace.steps == 500 and trace.transitions[-1].truncated


def test_discretizer_edges_and_count():
    disc = DiscretizerSpec()
    assert disc.state_count == 6 * 6 * 12 * 6
    assert disc.bin_index(0, -100.0) == 0
    assert disc.bin_index(0, 100.0) == 5
    assert disc.state_id((-9, -9, -9, -9)) == 0
    assert disc.state_id((9, 9, 9, 9)) == disc.state_count - 1


def test_cartpole_mirror_symmetry():
    params = CartPoleParams(init_noise=0.0)
    left = make_cartpole_env(params)
    right = make_cartpole_env(params)
    rng = make_rng(0)
    s_l = left.set_observation((0.1, 0.0, 0.05, -0.2))
    s_r = right.set_observation((-0.1, 0.0, -0.05, 0.2))
    for a in [0, 1, 1, 0, 1, 1, 1, 0]:
        s_l = left.step(s_l, a, rng).next_state
        s_r = right.step(s_r, 1 - a, rng).next_state
        assert np.allclose(left.observation, [-v for v in right.observation], atol=1e-12)


def test_cartpole_without_gravity_drifts_right_under_right_pushes():
    env = make_cartpole_env(CartPoleParams.from_degrees(10.0, 80, gravity=0.0, init_noise=0.0))
    rng = make_rng(0)
    s = env.reset(rng)
    for _ in range(10):
        s = env.step(s, 1, rng).next_state
    assert env.observation[0] > 0 and env.observation[1] > 0


def test_cartpole_failure_is_terminal_not_truncated():
    params = CartPoleParams.from_degrees(2.4, 12, init_noise=0.0)
    env = make_cartpole_env(params)
    rng = make_rng(0)
    s = env.set_observation((0.0, 0.0, math.radians(11.99), 3.0))
    t = env.step(s, 0, rng)
    assert t.terminal and not t.truncated


def test_shared_discretizer_gives_identical_labels():
    target = CartPoleParams.from_degrees(2.4, 30)
    disc = DiscretizerSpec.for_params(target)
    source_env = make_cartpole_env(CartPoleParams.from_degrees(4.0, 60), disc)
    target_env = make_cartpole_env(target, disc)
    assert source_env.canonical_labels() == target_env.canonical_labels()
