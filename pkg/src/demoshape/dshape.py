"""Demonstration-guided shaping: goal-augmented states, a distance potential and
hindsight relabelling with achieved-state pairs."""
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from . import _kernels
from .demos import Demonstration, demo_goal_at
from .env import Action, GridSpec, GridState, manhattan
from .qcore import Learner, QKey, QTable, ReplayBuffer, Transition, greedy_action


@dataclass(frozen=True)
class PotentialFn:
    """phi([s, g]) = -|s - g|_1, forced to 0 on terminal states."""

    def __call__(self, s, g, terminal: bool = False) -> float:
        if terminal:
            return 0.0
        return -float(manhattan(s, g))


@dataclass(frozen=True)
class AblationFlags:
    relabel: bool = True
    shaping: bool = True
    augment: bool = True

    def __post_init__(self):
        if self.relabel and not (self.shaping and self.augment):
            raise ValueError("relabelling needs both shaping and goal augmentation")

    @property
    def label(self) -> str:
        if self.relabel:
            return "dshape"
        parts = ["-GR"]
        if not self.augment:
            parts.append("-SA")
        if not self.shaping:
            parts.append("-PBRS")
        return "dshape" + "".join(parts)


def shaping_term(s, g, s_next, g_next, gamma: float, terminal: bool, phi: PotentialFn = PotentialFn()) -> float:
    """F = gamma * phi([s', g']) - phi([s, g])."""
    return gamma * phi(s_next, g_next, terminal) - phi(s, g)


def shaped_reward(r_task: float, F: float) -> float:
    return r_task + F


def rollout_step(learner: Learner, rng: np.random.Generator) -> Transition:
    """Take one epsilon-greedy step from the learner's current state.

    The transition is staged in the learner's running episode but not stored in
    the replay buffer; the learner is not reset when the episode ends.
    """
    if learner.env[_kernels.T] >= learner.cfg.horizon or learner.env[_kernels.POS] == learner.cfg.goal:
        raise ValueError("the running episode is already over")
    _kernels.env_step(learner.cfg, learner.q.values, learner.env, rng, learner.episode)
    rec = learner.episode[learner.env[_kernels.EP_LEN] - 1]
    return Transition.from_record(rec, learner.cfg.side, learner.cfg.augment)


def relabel(episode: Sequence[Transition], n_goals: int, rng: np.random.Generator, *,
            side: int, gamma: float = 1.0) -> List[Transition]:
    """Relabelled copies of every transition in ``episode``.

    Each transition gets ``n_goals`` copies whose (g, g') is the achieved pair
    (s_k, s_k+1) of a step k drawn uniformly (with replacement) from the same
    episode. Rewards are recomputed from the stored task reward.
    """
    if n_goals < 0:
        raise ValueError("n_goals must be non-negative")
    n = len(episode)
    if n == 0 or n_goals == 0:
        return []
    staged = np.zeros(n, dtype=_kernels.TRANSITION_DTYPE)
    for i, tr in enumerate(episode):
        staged[i] = tr.to_record(side)
    out = ReplayBuffer(n * n_goals)
    cfg = _kernels.KernelConfig(
        side=side, start=0, goal=0, horizon=n, gamma=float(gamma), alpha=0.1, epsilon=0.0,
        updates_per_step=0, augment=True, shaping=_kernels.SHAPING_GOAL, shaping_scale=1.0,
        n_goals=int(n_goals), manhattan_c=0.0, demo=np.zeros(1, np.int64), state_potential=np.zeros(1),
    )
    _kernels.relabel_episode(cfg, staged, n, out.data, out.cursor, rng)
    return [Transition.from_record(r, side, True) for r in out.records()]


def inference_action(q: QTable, state: GridState, demo: Demonstration, rng: np.random.Generator) -> Action:
    """Greedy action at ``state`` for the goal the demo prescribes at ``state.t``."""
    if q.augmented:
        g = demo_goal_at(demo, state.t)
        key = QKey(state.x, state.y, g.x, g.y)
    else:
        key = QKey(state.x, state.y)
    return greedy_action(q, key, rng)


def augmented_start(spec: GridSpec, demo: Demonstration):
    """Initial augmented state [s_0, g_0]."""
    return spec.start, demo_goal_at(demo, 0).pos
