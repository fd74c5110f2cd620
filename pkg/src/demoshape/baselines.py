"""Reward-shaping baselines that also learn from a single demonstration."""
from dataclasses import dataclass

import numpy as np

from .demos import Demonstration, demo_goal_at
from .env import GridSpec, manhattan


@dataclass(frozen=True)
class SBSParams:
    """Similarity-based shaping: Gaussian-like width ``sigma`` and scale ``c``."""

    sigma: float = 10.0
    c: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class ManhattanParams:
    c: float = 1.0

    def __post_init__(self):
        if self.c < 0:
            raise ValueError(f"c must be non-negative, got {self.c!r}")


def sbs_potential_table(params: SBSParams, demo: Demonstration, spec: GridSpec) -> np.ndarray:
    """phi(s) for every cell: the best similarity to any demo state.

    Similarity is exp(-d / (2 sigma)) with d the L1 distance between
    coordinates scaled to [0, 1].
    """
    xs, ys = np.divmod(np.arange(spec.n_cells), spec.side)[::-1]
    demo_pos = demo.positions()
    scale = spec.side - 1
    d = (np.abs(xs[:, None] - demo_pos[None, :, 0]) + np.abs(ys[:, None] - demo_pos[None, :, 1])) / scale
    return np.exp(-d / (2.0 * params.sigma)).max(axis=1)


def sbs_potential(params: SBSParams, s, demo: Demonstration, spec: GridSpec) -> float:
    return float(sbs_potential_table(params, demo, spec)[spec.index(s)])


def sbs_reward(r_task: float, phi_s: float, phi_next: float, gamma: float, c: float, terminal: bool) -> float:
    """r + c * (gamma * phi(s') - phi(s)), with phi(s') = 0 when s' is terminal."""
    return r_task + c * (gamma * (0.0 if terminal else phi_next) - phi_s)


def manhattan_reward(r_task: float, s, t: int, demo: Demonstration, c: float) -> float:
    """r - c * |s_t - demo goal at t|_1 (not potential based)."""
    return r_task - c * manhattan(s, demo_goal_at(demo, t).pos)
