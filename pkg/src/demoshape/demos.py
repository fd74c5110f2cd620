"""Single-trajectory demonstrations of graded quality."""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .env import GridSpec, GridState, manhattan


class Quality(Enum):
    """Demo tier; the value is how far from the task goal the demo stops."""

    OPTIMAL = 0
    GOOD = 2
    MEDIUM = 4
    WORST = 6

    @classmethod
    def parse(cls, value) -> "Quality":
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            names = ", ".join(q.name.lower() for q in cls)
            raise ValueError(f"unknown demo quality {value!r} (expected one of {names})") from None


@dataclass(frozen=True)
class Demonstration:
    states: Tuple[GridState, ...]
    quality: Quality = Quality.OPTIMAL

    def __post_init__(self):
        if len(self.states) == 0:
            raise ValueError("a demonstration needs at least one state")
        for i, (a, b) in enumerate(zip(self.states, self.states[1:])):
            if manhattan(a.pos, b.pos) > 1:
                raise ValueError(f"demo jumps between steps {i} and {i + 1}")

    def __len__(self):
        return len(self.states)

    def __array__(self, dtype=None, copy=None):
        out = self.positions()
        return out if dtype is None else out.astype(dtype)

    @property
    def length(self) -> int:
        """Number of moves L (the demo has L + 1 states)."""
        return len(self.states) - 1

    @property
    def demo_goal(self) -> GridState:
        return self.states[-1]

    def positions(self) -> np.ndarray:
        return np.array([s.pos for s in self.states], dtype=np.int64).reshape(-1, 2)

    def cells(self, side: int) -> np.ndarray:
        pos = self.positions()
        return pos[:, 0] + side * pos[:, 1]

    @classmethod
    def from_positions(cls, positions, quality=Quality.OPTIMAL) -> "Demonstration":
        pos = np.asarray(positions, dtype=np.int64).reshape(-1, 2)
        return cls(tuple(GridState(int(x), int(y), t) for t, (x, y) in enumerate(pos)), quality)


def optimal_path(spec: GridSpec):
    """Shortest path that first runs along the start row, then along the goal column."""
    (x, y), (gx, gy) = spec.start, spec.task_goal
    path = [(x, y)]
    dx = 1 if gx > x else -1
    while x != gx:
        x += dx
        path.append((x, y))
    dy = 1 if gy > y else -1
    while y != gy:
        y += dy
        path.append((x, y))
    return path


def make_demo(spec: GridSpec, quality) -> Demonstration:
    """Demo that follows the optimal path and stops ``quality.value`` moves short of the goal."""
    quality = Quality.parse(quality)
    path = optimal_path(spec)
    cut = quality.value
    if cut >= len(path) - 1:
        raise ValueError(
            f"{quality.name.lower()} demo needs more than {cut} moves to the goal; "
            f"a {spec.side}x{spec.side} task only has {len(path) - 1}"
        )
    kept = path[: len(path) - cut]
    return Demonstration(tuple(GridState(x, y, t) for t, (x, y) in enumerate(kept)), quality)


def demo_goal_at(demo: Demonstration, t: int) -> GridState:
    """Sub-goal used at time ``t``: the next demo state, clamped to the last one."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return demo.states[min(t + 1, len(demo.states) - 1)]


def save_demo(demo: Demonstration, path: Union[str, Path]) -> None:
    rows = np.array([(s.t, s.x, s.y) for s in demo.states], dtype=np.int64)
    np.savetxt(path, rows, fmt="%d", header=f"quality={demo.quality.name.lower()}\nt x y")


def load_demo(path: Union[str, Path]) -> Demonstration:
    quality = Quality.OPTIMAL
    with open(path) as fh:
        for line in fh:
            if line.startswith("# quality="):
                quality = Quality.parse(line.split("=", 1)[1].strip())
    rows = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if rows.shape[1] != 3 or not np.array_equal(rows[:, 0], np.arange(len(rows))):
        raise ValueError(f"{path}: expected rows 't x y' with t = 0, 1, 2, ...")
    return Demonstration.from_positions(rows[:, 1:], quality)
