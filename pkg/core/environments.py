"""
core/environments.py | Task Families
Purpose: Maze, grid world and cart-pole environments, grid layouts and the source-task generators.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: numpy
Abstract Spec: Grid tasks are defined by a GridLayout ('#' blocked, '.' free, 'G' goal, 'S' start).
Maze tasks start uniformly on a feasible non-goal cell and cap episodes at 200 steps; grid world
tasks start at the layout's start cell and cap at 500. Moving into a wall or off-grid leaves the
state unchanged. Reward is +1 on reaching the goal, 0 otherwise. Cart-pole is the classic Euler
integrated system with +1 reward per step, failure outside [-X, X] x [-Theta, Theta] and a
discretized state id. Source tasks are made by shrinking a maze around its goal or by moving
the start of a grid world.
"""
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Hashable, Optional, Tuple

from core.errors import ContractViolation, LayoutParseError
from core.mdp import Environment, Rng

Cell = Tuple[int, int]

# up, down, left, right
GRID_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))
MAZE_STEP_CAP = 200
GRIDWORLD_STEP_CAP = 500
CARTPOLE_STEP_CAP = 500


@dataclass(frozen=True)
class GridLayout:
    width: int
    height: int
    blocked: FrozenSet[Cell]
    goal: Cell
    start: Optional[Cell] = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"[ERROR] Layout must be at least 1x1, got {self.height}x{self.width}")
        object.__setattr__(self, "blocked", frozenset(self.blocked))
        if not self.in_bounds(self.goal):
            raise ValueError(f"[ERROR] Goal {self.goal} is outside the {self.height}x{self.width} grid")
        if self.goal in self.blocked:
            raise ValueError(f"[ERROR] Goal {self.goal} is blocked")
        if self.start is not None:
            if not self.in_bounds(self.start) or self.start in self.blocked:
                raise ValueError(f"[ERROR] Start {self.start} is not a feasible cell")
            if self.start == self.goal:
                raise ValueError(f"[ERROR] Start {self.start} coincides with the goal")
        if len(self.feasible_cells()) < 2:
            raise ValueError("[ERROR] Layout needs at least one feasible cell besides the goal")

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def is_feasible(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    def feasible_cells(self) -> FrozenSet[Cell]:
        return frozenset(
            (r, c) for r in range(self.height) for c in range(self.width) if (r, c) not in self.blocked
        )

    def state_id(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]

    def cell_of(self, state_id: int) -> Cell:
        return divmod(state_id, self.width)


def parse_grid_layout(text: str) -> GridLayout:
    """
    Purpose: Parse a layout string into a GridLayout.
    Inputs: text (str) - newline-separated rows over {#, ., G, S}; trailing blank lines ignored
    Outputs: GridLayout
    Role: Single entry point for layout files and inline test layouts.
    """
    rows = text.replace("\r\n", "\n").split("\n")
    while rows and rows[-1].strip() == "":
        rows.pop()
    if not rows:
        raise LayoutParseError("Layout is empty")
    width = len(rows[0])
    blocked = set()
    goal = None
    start = None
    for r, row in enumerate(rows):
        if len(row) != width:
            raise LayoutParseError(f"Layout is not rectangular: expected {width} columns, found {len(row)}", row=r)
        for c, ch in enumerate(row):
            if ch == "#":
                blocked.add((r, c))
            elif ch == ".":
                continue
            elif ch == "G":
                if goal is not None:
                    raise LayoutParseError(f"Duplicate goal, first at {goal}", row=r, col=c)
                goal = (r, c)
            elif ch == "S":
                if start is not None:
                    raise LayoutParseError(f"Duplicate start, first at {start}", row=r, col=c)
                start = (r, c)
            else:
                raise LayoutParseError(f"Unknown layout character {ch!r}", row=r, col=c)
    if goal is None:
        raise LayoutParseError("Layout has no goal cell 'G'")
    try:
        return GridLayout(width=width, height=len(rows), blocked=frozenset(blocked), goal=goal, start=start)
    except ValueError as e:
        raise LayoutParseError(str(e).replace("[ERROR] ", ""))


def serialize_grid_layout(layout: GridLayout) -> str:
    lines = []
    for r in range(layout.height):
        chars = []
        for c in range(layout.width):
            cell = (r, c)
            if cell == layout.goal:
                chars.append("G")
            elif cell == layout.start:
                chars.append("S")
            elif cell in layout.blocked:
                chars.append("#")
            else:
                chars.append(".")
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"


def bfs_distance(layout: GridLayout, start: Cell, goal: Cell) -> Optional[int]:
    """
    Purpose: Shortest 4-connected path length between two feasible cells.
    Inputs: layout (GridLayout), start (cell), goal (cell)
    Outputs: int distance, or None when goal is unreachable from start
    Role: Grid-world task feature and test oracle for optimal episode lengths.
    """
    for name, cell in (("from", start), ("to", goal)):
        if not layout.is_feasible(cell):
            raise ValueError(f"[ERROR] bfs_distance: '{name}' cell {cell} is not feasible")
    if start == goal:
        return 0
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        (r, c), d = frontier.popleft()
        for dr, dc in GRID_MOVES:
            nxt = (r + dr, c + dc)
            if nxt in seen or not layout.is_feasible(nxt):
                continue
            if nxt == goal:
                return d + 1
            seen.add(nxt)
            frontier.append((nxt, d + 1))
    return None


def shrink_maze(layout: GridLayout, keep: Tuple[int, int, int, int]) -> GridLayout:
    """
    Purpose: Block every cell outside the inclusive region (row0, col0, row1, col1).
    Inputs: layout (GridLayout), keep (tuple) - region that must contain the goal
    Outputs: GridLayout with the same goal and a subset of the feasible cells
    Role: Maze source-task generator (smaller state space, same goal).
    """
    r0, c0, r1, c1 = keep
    if not (r0 <= layout.goal[0] <= r1 and c0 <= layout.goal[1] <= c1):
        raise ValueError(f"[ERROR] shrink_maze: region {keep} excludes the goal {layout.goal}")
    blocked = set(layout.blocked)
    for r in range(layout.height):
        for c in range(layout.width):
            if not (r0 <= r <= r1 and c0 <= c <= c1):
                blocked.add((r, c))
    start = layout.start if layout.start is not None and layout.start not in blocked else None
    return GridLayout(layout.width, layout.height, frozenset(blocked), layout.goal, start)


def move_start(layout: GridLayout, new_start: Cell) -> GridLayout:
    """Grid-world source-task generator: same cells and goal, different start."""
    new_start = tuple(new_start)
    if not layout.is_feasible(new_start):
        raise ValueError(f"[ERROR] move_start: {new_start} is not a feasible cell")
    if new_start == layout.goal:
        raise ValueError(f"[ERROR] move_start: {new_start} is the goal")
    return replace(layout, start=new_start)


class GridEnvironment(Environment):
    """Deterministic 4-action navigation on a GridLayout; shared by maze and grid world."""

    def __init__(self, layout: GridLayout, step_cap: int, random_start: bool, name: str = "grid"):
        super().__init__(name, layout.width * layout.height, len(GRID_MOVES), step_cap)
        self.layout = layout
        self.random_start = random_start
        self._start_cells = sorted(layout.feasible_cells() - {layout.goal})
        self._goal_id = layout.state_id(layout.goal)

    def _start(self, rng: Rng) -> int:
        if self.random_start:
            cell = self._start_cells[int(rng.integers(len(self._start_cells)))]
        else:
            cell = self.layout.start
        return self.layout.state_id(cell)

    def _check_state(self, s: int) -> None:
        super()._check_state(s)
        if not self.layout.is_feasible(self.layout.cell_of(s)):
            raise ContractViolation(f"[ERROR] {self.name}: state {s} is a blocked cell")

    def _advance(self, s: int, a: int, rng: Rng):
        r, c = self.layout.cell_of(s)
        dr, dc = GRID_MOVES[a]
        nxt = (r + dr, c + dc)
        if not self.layout.is_feasible(nxt):
            nxt = (r, c)
        next_id = self.layout.state_id(nxt)
        if next_id == self._goal_id:
            return next_id, 1.0, True
        return next_id, 0.0, False

    def canonical_labels(self) -> Dict[int, Hashable]:
        return {self.layout.state_id(cell): cell for cell in self.layout.feasible_cells()}


def make_maze_env(layout: GridLayout, step_cap: int = MAZE_STEP_CAP, name: str = "maze") -> GridEnvironment:
    return GridEnvironment(layout, step_cap=step_cap, random_start=True, name=name)


def make_gridworld_env(layout: GridLayout, step_cap: int = GRIDWORLD_STEP_CAP, name: str = "gridworld") -> GridEnvironment:
    if layout.start is None:
        raise ValueError(f"[ERROR] Grid world task '{name}' needs a start cell 'S'")
    return GridEnvironment(layout, step_cap=step_cap, random_start=False, name=name)


@dataclass(frozen=True)
class CartPoleParams:
    x_bound: float = 2.4
    angle_bound: float = math.radians(30.0)
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    pole_half_length: float = 0.5
    force_magnitude: float = 10.0
    dt: float = 0.02
    step_cap: int = CARTPOLE_STEP_CAP
    gravity: float = 9.8
    init_noise: float = 0.05

    def __post_init__(self):
        if self.x_bound <= 0:
            raise ValueError(f"[ERROR] CartPoleParams: x_bound must be > 0, got {self.x_bound}")
        if not 0 < self.angle_bound < math.pi / 2:
            raise ValueError(f"[ERROR] CartPoleParams: angle_bound must be in (0, pi/2), got {self.angle_bound}")
        if self.dt <= 0:
            raise ValueError(f"[ERROR] CartPoleParams: dt must be > 0, got {self.dt}")
        if self.step_cap < 1:
            raise ValueError(f"[ERROR] CartPoleParams: step_cap must be >= 1, got {self.step_cap}")

    @classmethod
    def from_degrees(cls, x_bound: float, angle_deg: float, **kwargs) -> "CartPoleParams":
        return cls(x_bound=float(x_bound), angle_bound=math.radians(float(angle_deg)), **kwargs)


@dataclass(frozen=True)
class DiscretizerSpec:
    """Per-dimension bins over (x, v, theta, omega); values outside the clip range go to the edge bins."""

    bins: Tuple[int, int, int, int] = (6, 6, 12, 6)
    lows: Tuple[float, float, float, float] = (-2.4, -3.0, -math.radians(30.0), -3.5)
    highs: Tuple[float, float, float, float] = (2.4, 3.0, math.radians(30.0), 3.5)
    _radix: Tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (len(self.bins) == len(self.lows) == len(self.highs) == 4):
            raise ValueError("[ERROR] DiscretizerSpec needs 4 bins, lows and highs")
        for n, lo, hi in zip(self.bins, self.lows, self.highs):
            if n < 1:
                raise ValueError(f"[ERROR] DiscretizerSpec: bin count must be >= 1, got {n}")
            if not hi > lo:
                raise ValueError(f"[ERROR] DiscretizerSpec: clip range [{lo}, {hi}] is empty")
        radix = []
        acc = 1
        for n in reversed(self.bins):
            radix.append(acc)
            acc *= n
        object.__setattr__(self, "_radix", tuple(reversed(radix)))

    @classmethod
    def for_params(cls, params: CartPoleParams, bins=(6, 6, 12, 6)) -> "DiscretizerSpec":
        return cls(
            bins=tuple(int(b) for b in bins),
            lows=(-params.x_bound, -3.0, -params.angle_bound, -3.5),
            highs=(params.x_bound, 3.0, params.angle_bound, 3.5),
        )

    @property
    def state_count(self) -> int:
        total = 1
        for n in self.bins:
            total *= n
        return total

    def bin_index(self, dim: int, value: float) -> int:
        n, lo, hi = self.bins[dim], self.lows[dim], self.highs[dim]
        if value <= lo:
            return 0
        if value >= hi:
            return n - 1
        return min(int((value - lo) / (hi - lo) * n), n - 1)

    def state_id(self, obs) -> int:
        return sum(self.bin_index(d, obs[d]) * self._radix[d] for d in range(4))

    def cell_centre(self, state_id: int) -> Tuple[float, ...]:
        centre = []
        for d in range(4):
            idx = (state_id // self._radix[d]) % self.bins[d]
            width = (self.highs[d] - self.lows[d]) / self.bins[d]
            centre.append(round(self.lows[d] + (idx + 0.5) * width, 6))
        return tuple(centre)


class CartPoleEnvironment(Environment):
    """Classic cart-pole; action 0 pushes Left, 1 pushes Right."""

    def __init__(self, params: CartPoleParams, disc: DiscretizerSpec, name: str = "cartpole"):
        super().__init__(name, disc.state_count, 2, params.step_cap)
        self.params = params
        self.disc = disc
        self.observation = (0.0, 0.0, 0.0, 0.0)

    def set_observation(self, obs) -> int:
        """Place the system in a given continuous state (used by tests); returns its StateId."""
        self.observation = tuple(float(v) for v in obs)
        self.current_state = self.disc.state_id(self.observation)
        self.episode_steps = 0
        self._done = False
        return self.current_state

    def _start(self, rng: Rng) -> int:
        noise = self.params.init_noise
        if noise > 0:
            self.observation = tuple(float(v) for v in rng.uniform(-noise, noise, size=4))
        else:
            self.observation = (0.0, 0.0, 0.0, 0.0)
        return self.disc.state_id(self.observation)

    def _check_state(self, s: int) -> None:
        super()._check_state(s)
        if s != self.current_state:
            raise ContractViolation(f"[ERROR] {self.name}: state {s} does not match the current state {self.current_state}")

    def _advance(self, s: int, a: int, rng: Rng):
        p = self.params
        x, v, theta, omega = self.observation
        force = p.force_magnitude if a == 1 else -p.force_magnitude
        total_mass = p.cart_mass + p.pole_mass
        polemass_length = p.pole_mass * p.pole_half_length
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + polemass_length * omega * omega * sin_t) / total_mass
        theta_acc = (p.gravity * sin_t - cos_t * temp) / (
            p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass)
        )
        x_acc = temp - polemass_length * theta_acc * cos_t / total_mass
        x = x + p.dt * v
        v = v + p.dt * x_acc
        theta = theta + p.dt * omega
        omega = omega + p.dt * theta_acc
        self.observation = (x, v, theta, omega)
        failed = abs(x) > p.x_bound or abs(theta) > p.angle_bound
        return self.disc.state_id(self.observation), 1.0, failed

    def canonical_labels(self) -> Dict[int, Hashable]:
        return {s: self.disc.cell_centre(s) for s in range(self.state_count)}


def make_cartpole_env(params: CartPoleParams, disc: DiscretizerSpec = None, name: str = "cartpole") -> CartPoleEnvironment:
    if disc is None:
        disc = DiscretizerSpec.for_params(params)
    return CartPoleEnvironment(params, disc, name=name)
