"""Tabular Q-learning with an experience replay buffer."""
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import numpy as np

from . import _kernels
from .env import Action, GridSpec, Position


@dataclass(frozen=True)
class LearnerParams:
    alpha: float = 0.1
    epsilon: float = 0.2
    gamma: float = 1.0
    updates_per_step: int = 20
    buffer_capacity: int = 5000
    total_steps: int = 250_000

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        for name in ("updates_per_step", "buffer_capacity", "total_steps"):
            value = getattr(self, name)
            if int(value) != value or value < (1 if name == "buffer_capacity" else 0):
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")


class QKey(NamedTuple):
    """Lookup key: a cell, optionally paired with a goal cell."""

    x: int
    y: int
    gx: Optional[int] = None
    gy: Optional[int] = None

    @property
    def augmented(self) -> bool:
        return self.gx is not None

    def encode(self, side: int) -> int:
        p = self.x + side * self.y
        if self.gx is None:
            return p
        return p * side * side + self.gx + side * self.gy

    @classmethod
    def decode(cls, key: int, side: int, augmented: bool) -> "QKey":
        key = int(key)
        if not augmented:
            return cls(key % side, key // side)
        p, g = divmod(key, side * side)
        return cls(p % side, p // side, g % side, g // side)


class QTable:
    """Dense table of action values, zero-initialised."""

    def __init__(self, side: int, augmented: bool, values: Optional[np.ndarray] = None):
        self.side = int(side)
        self.augmented = bool(augmented)
        n_keys = self.side ** 4 if self.augmented else self.side ** 2
        if values is None:
            values = np.zeros((n_keys, _kernels.N_ACTIONS))
        if values.shape != (n_keys, _kernels.N_ACTIONS):
            raise ValueError(f"expected a table of shape {(n_keys, _kernels.N_ACTIONS)}, got {values.shape}")
        self.values = values

    def index(self, key) -> int:
        if isinstance(key, (int, np.integer)):
            return int(key)
        key = QKey(*key)
        if key.augmented != self.augmented:
            raise KeyError(f"{key} does not match a table with augmented={self.augmented}")
        return key.encode(self.side)

    def __getitem__(self, key) -> np.ndarray:
        return self.values[self.index(key)]

    def to_text(self, path: Union[str, Path], only_visited: bool = True) -> None:
        """Write ``x y [gx gy] action value`` rows."""
        rows = np.flatnonzero(np.any(self.values != 0.0, axis=1)) if only_visited else np.arange(len(self.values))
        cols = "x y gx gy" if self.augmented else "x y"
        with open(path, "w") as fh:
            fh.write(f"# side={self.side} augmented={int(self.augmented)}\n# {cols} action value\n")
            for k in rows:
                key = QKey.decode(k, self.side, self.augmented)
                coords = " ".join(str(v) for v in key if v is not None)
                for a in Action:
                    fh.write(f"{coords} {a.name} {float(self.values[k, a])!r}\n")

    @classmethod
    def from_text(cls, path: Union[str, Path]) -> "QTable":
        with open(path) as fh:
            header = dict(item.split("=") for item in fh.readline()[1:].split())
            side, augmented = int(header["side"]), bool(int(header["augmented"]))
            table = cls(side, augmented)
            for line in fh:
                if line.startswith("#") or not line.strip():
                    continue
                *coords, action, value = line.split()
                table.values[QKey(*map(int, coords)).encode(side), Action[action]] = float(value)
        return table


@dataclass(frozen=True)
class Transition:
    """One replay record. Positions are ``(x, y)``; ``g`` is the sub-goal in force at ``t``."""

    key: QKey
    action: Action
    reward: float
    next_key: QKey
    terminal: bool
    s: Position
    g: Position
    s_next: Position
    g_next: Position
    r_task: float
    t: int

    @classmethod
    def from_record(cls, rec, side: int, augmented: bool) -> "Transition":
        pos = lambda i: (int(i) % side, int(i) // side)  # noqa: E731
        return cls(
            key=QKey.decode(rec["key"], side, augmented),
            action=Action(int(rec["action"])),
            reward=float(rec["reward"]),
            next_key=QKey.decode(rec["next_key"], side, augmented),
            terminal=bool(rec["terminal"]),
            s=pos(rec["s"]),
            g=pos(rec["g"]),
            s_next=pos(rec["s_next"]),
            g_next=pos(rec["g_next"]),
            r_task=float(rec["r_task"]),
            t=int(rec["t"]),
        )

    def to_record(self, side: int) -> np.void:
        rec = np.zeros((), dtype=_kernels.TRANSITION_DTYPE)
        cell = lambda p: p[0] + side * p[1]  # noqa: E731
        rec["key"] = self.key.encode(side)
        rec["action"] = int(self.action)
        rec["reward"] = self.reward
        rec["next_key"] = self.next_key.encode(side)
        rec["terminal"] = self.terminal
        rec["s"], rec["g"] = cell(self.s), cell(self.g)
        rec["s_next"], rec["g_next"] = cell(self.s_next), cell(self.g_next)
        rec["r_task"] = self.r_task
        rec["t"] = self.t
        return rec[()]


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions backed by a structured array."""

    def __init__(self, capacity: int):
        if int(capacity) != capacity or capacity < 1:
            raise ValueError(f"capacity must be a positive integer, got {capacity!r}")
        self.data = np.zeros(int(capacity), dtype=_kernels.TRANSITION_DTYPE)
        self.cursor = np.zeros(3, dtype=np.int64)  # head, size, total pushed

    @property
    def capacity(self) -> int:
        return len(self.data)

    @property
    def total_pushed(self) -> int:
        return int(self.cursor[_kernels.PUSHED])

    def __len__(self):
        return int(self.cursor[_kernels.SIZE])

    def push_record(self, rec) -> None:
        _kernels.buffer_push(
            self.data, self.cursor, rec["key"], rec["action"], rec["reward"], rec["next_key"],
            rec["terminal"], rec["s"], rec["g"], rec["s_next"], rec["g_next"], rec["r_task"], rec["t"],
        )

    def records(self) -> np.ndarray:
        """Stored records, oldest first."""
        size, head = len(self), int(self.cursor[_kernels.HEAD])
        if size < self.capacity:
            return self.data[:size].copy()
        return np.concatenate([self.data[head:], self.data[:head]])

    def latest(self, n: int) -> np.ndarray:
        n = min(int(n), len(self))
        return self.records()[len(self) - n:]

    def sample(self, rng: np.random.Generator) -> np.void:
        if len(self) == 0:
            raise IndexError("sample from an empty buffer")
        return self.data[int(rng.random() * len(self))]


class Learner:
    """Mutable training state: Q-table, replay buffer and the running episode."""

    def __init__(self, cfg: _kernels.KernelConfig, capacity: int):
        self.cfg = cfg
        self.q = QTable(cfg.side, cfg.augment)
        self.buffer = ReplayBuffer(capacity)
        self.episode = np.zeros(cfg.horizon, dtype=_kernels.TRANSITION_DTYPE)
        self.env = np.zeros(4, dtype=np.int64)
        self.env[_kernels.POS] = cfg.start

    @property
    def steps(self) -> int:
        return int(self.env[_kernels.STEPS])

    def transitions(self, records) -> List[Transition]:
        return [Transition.from_record(r, self.cfg.side, self.cfg.augment) for r in records]


def kernel_config(spec: GridSpec, params: LearnerParams, demo_cells=None, *, augment=False,
                  shaping=_kernels.SHAPING_NONE, shaping_scale=1.0, n_goals=0,
                  manhattan_c=0.0, state_potential=None) -> _kernels.KernelConfig:
    """Bundle everything the compiled loop needs; types are pinned to keep one specialisation."""
    if demo_cells is None:
        demo_cells = [spec.index(spec.start)]
    n = spec.n_cells
    return _kernels.KernelConfig(
        side=spec.side,
        start=spec.index(spec.start),
        goal=spec.index(spec.task_goal),
        horizon=spec.horizon,
        gamma=float(params.gamma),
        alpha=float(params.alpha),
        epsilon=float(params.epsilon),
        updates_per_step=int(params.updates_per_step),
        augment=bool(augment),
        shaping=int(shaping),
        shaping_scale=float(shaping_scale),
        n_goals=int(n_goals),
        manhattan_c=float(manhattan_c),
        demo=np.ascontiguousarray(demo_cells, dtype=np.int64),
        state_potential=np.zeros(n) if state_potential is None else np.ascontiguousarray(state_potential, dtype=np.float64),
    )


def select_action(q: QTable, key, epsilon: float, rng: np.random.Generator) -> Action:
    """Epsilon-greedy with a uniform tie-break among exact maximisers."""
    return Action(_kernels.select_action(q.values, q.index(key), float(epsilon), rng))


def greedy_action(q: QTable, key, rng: np.random.Generator) -> Action:
    return Action(_kernels.greedy_action(q.values, q.index(key), rng))


def q_update(q: QTable, tr: Transition, alpha: float, gamma: float) -> float:
    """Apply one Q-learning backup for ``tr``; returns the new value."""
    k = q.index(tr.key)
    _kernels.q_update(q.values, k, int(tr.action), float(tr.reward), q.index(tr.next_key),
                      bool(tr.terminal), float(alpha), float(gamma))
    return float(q.values[k, int(tr.action)])


def train_step(learner: Learner, rng: np.random.Generator) -> List[Transition]:
    """One environment step plus replay; returns the records it added to the buffer."""
    before = learner.buffer.total_pushed
    _kernels.train_step(learner.cfg, learner.q.values, learner.buffer.data, learner.buffer.cursor,
                        learner.env, learner.episode, rng)
    return learner.transitions(learner.buffer.latest(learner.buffer.total_pushed - before))
