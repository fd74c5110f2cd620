"""Deterministic N x N gridworld.

Coordinates are ``(x, y)`` with x growing to the right, y growing upward and
the origin in the bottom-left corner. Moving into a wall leaves the agent in
place. Every step costs -1 except the one that enters the goal, which pays 0
and ends the episode.
"""
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Tuple

from . import _kernels

Position = Tuple[int, int]


class Action(IntEnum):
    UP = _kernels.UP
    DOWN = _kernels.DOWN
    LEFT = _kernels.LEFT
    RIGHT = _kernels.RIGHT


@dataclass(frozen=True)
class GridSpec:
    """Static description of a gridworld task.

    :param side: grid size N (the grid is N x N)
    :param start: start cell, defaults to the bottom-left corner
    :param task_goal: goal cell, defaults to the top-right corner
    :param horizon: episode time limit H
    :param gamma: discount factor in (0, 1]
    """

    side: int = 10
    start: Position = (0, 0)
    task_goal: Optional[Position] = None
    horizon: int = 500
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.side) != self.side or self.side < 2:
            raise ValueError(f"side must be an integer >= 2, got {self.side!r}")
        object.__setattr__(self, "side", int(self.side))
        if self.task_goal is None:
            object.__setattr__(self, "task_goal", (self.side - 1, self.side - 1))
        object.__setattr__(self, "start", self._check_cell(self.start, "start"))
        object.__setattr__(self, "task_goal", self._check_cell(self.task_goal, "task_goal"))
        if self.start == self.task_goal:
            raise ValueError("start and task_goal must differ")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        object.__setattr__(self, "gamma", float(self.gamma))

    def _check_cell(self, cell, name) -> Position:
        x, y = (int(v) for v in cell)
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise ValueError(f"{name} {cell!r} is outside a {self.side}x{self.side} grid")
        return (x, y)

    @property
    def n_cells(self) -> int:
        return self.side * self.side

    def contains(self, cell) -> bool:
        x, y = cell
        return 0 <= x < self.side and 0 <= y < self.side

    def index(self, cell) -> int:
        """Flat cell index ``x + side * y``."""
        x, y = cell
        return int(x) + self.side * int(y)

    def position(self, index: int) -> Position:
        return (int(index) % self.side, int(index) // self.side)


@dataclass(frozen=True)
class GridState:
    x: int
    y: int
    t: int = 0

    @property
    def pos(self) -> Position:
        return (self.x, self.y)


@dataclass(frozen=True)
class StepOutcome:
    next_state: GridState
    reward: float
    terminal: bool
    truncated: bool = field(default=False)

    @property
    def done(self) -> bool:
        return self.terminal or self.truncated


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def reset(spec: GridSpec) -> GridState:
    return GridState(*spec.start, t=0)


def move(spec: GridSpec, pos, action) -> Position:
    """Cell reached from ``pos`` under ``action`` (walls clamp)."""
    if not spec.contains(pos):
        raise ValueError(f"{pos!r} is outside the grid")
    return spec.position(_kernels.move(spec.side, spec.index(pos), int(Action(action))))


def step(spec: GridSpec, state: GridState, action) -> StepOutcome:
    """Apply ``action`` in ``state``.

    Stepping from the goal or from a state whose time has run out is an error:
    the episode is already over there.
    """
    if state.pos == spec.task_goal:
        raise ValueError("episode already ended at the goal")
    if state.t >= spec.horizon:
        raise ValueError(f"time {state.t} is past the horizon {spec.horizon}")
    nxt = move(spec, state.pos, action)
    terminal = nxt == spec.task_goal
    t = state.t + 1
    return StepOutcome(
        next_state=GridState(*nxt, t=t),
        reward=0.0 if terminal else -1.0,
        terminal=terminal,
        truncated=not terminal and t >= spec.horizon,
    )


def optimal_return(spec: GridSpec, start=None) -> Optional[float]:
    """Best achievable undiscounted task return from ``start`` (default: the task start).

    A shortest path of d moves earns -1 for each of its first d - 1 moves; the
    last one enters the goal for 0. Returns None when the goal is farther than
    the horizon.
    """
    if spec.gamma != 1.0:
        raise ValueError("closed form only holds for gamma == 1; use oracle.value_iteration")
    d = manhattan(spec.start if start is None else start, spec.task_goal)
    if d == 0:
        return 0.0
    if d > spec.horizon:
        return None
    return -float(d - 1)
