"""Learners with an estimator interface: ``fit`` on a demonstration, ``predict``
greedy actions for states, ``score`` the greedy policy's task return."""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .baselines import ManhattanParams, SBSParams, sbs_potential_table
from .dshape import AblationFlags
from .env import GridSpec
from .qcore import Learner, LearnerParams, kernel_config
from .validation import check_demo, check_states

_TRAIN, _EVAL, _PREDICT, _SCORE = range(4)


def seed_sequence(random_state) -> np.random.SeedSequence:
    if isinstance(random_state, np.random.SeedSequence):
        return np.random.SeedSequence(random_state.entropy, spawn_key=random_state.spawn_key)
    if isinstance(random_state, (list, tuple)):
        random_state = [int(v) for v in random_state]
    return np.random.SeedSequence(random_state)


class TabularAgent(BaseEstimator):
    """Shared training loop; subclasses decide keys and rewards via ``_kernel_config``.

    ``random_state`` may be an int, a sequence of ints or a SeedSequence; two
    independent streams are derived from it, one for training and one for the
    greedy evaluations.
    """

    _needs_demo = True

    def __init__(self, side=10, horizon=500, gamma=1.0, alpha=0.1, epsilon=0.2,
                 updates_per_step=20, buffer_capacity=5000, total_steps=250_000,
                 eval_interval=2500, eval_episodes=10, random_state=None):
        self.side = side
        self.horizon = horizon
        self.gamma = gamma
        self.alpha = alpha
        self.epsilon = epsilon
        self.updates_per_step = updates_per_step
        self.buffer_capacity = buffer_capacity
        self.total_steps = total_steps
        self.eval_interval = eval_interval
        self.eval_episodes = eval_episodes
        self.random_state = random_state

    def _kernel_config(self, spec, params, demo):
        raise NotImplementedError

    def _streams(self, which):
        ss = np.random.SeedSequence(self.seed_entropy_, spawn_key=self.seed_spawn_key_)
        return np.random.default_rng(ss.spawn(4)[which])

    def fit(self, X=None, y=None):
        """Train from scratch. ``X`` is the demonstration (ignored by plain Q-learning)."""
        spec = GridSpec(side=self.side, horizon=self.horizon, gamma=self.gamma)
        params = LearnerParams(self.alpha, self.epsilon, self.gamma, self.updates_per_step,
                               self.buffer_capacity, self.total_steps)
        if int(self.eval_interval) != self.eval_interval or self.eval_interval < 1:
            raise ValueError(f"eval_interval must be a positive integer, got {self.eval_interval!r}")
        if int(self.eval_episodes) != self.eval_episodes or self.eval_episodes < 1:
            raise ValueError(f"eval_episodes must be a positive integer, got {self.eval_episodes!r}")
        if X is None:
            if self._needs_demo:
                raise ValueError(f"{type(self).__name__} needs a demonstration")
            demo = None
        else:
            demo = check_demo(X, spec)

        ss = seed_sequence(self.random_state)
        self.seed_entropy_, self.seed_spawn_key_ = ss.entropy, ss.spawn_key
        train_rng, eval_rng = self._streams(_TRAIN), self._streams(_EVAL)

        cfg = self._kernel_config(spec, params, demo)
        learner = Learner(cfg, params.buffer_capacity)
        returns = _kernels.train(
            cfg, learner.q.values, learner.buffer.data, learner.buffer.cursor, learner.env,
            learner.episode, int(params.total_steps), int(self.eval_interval),
            int(self.eval_episodes), train_rng, eval_rng,
        )
        self.spec_ = spec
        self.demo_ = demo
        self.learner_ = learner
        self.q_table_ = learner.q
        self.buffer_ = learner.buffer
        self.eval_steps_ = np.arange(len(returns), dtype=np.int64) * int(self.eval_interval)
        self.eval_returns_ = returns
        self.learning_curve_ = returns.mean(axis=1)
        self.eval_rng_ = eval_rng
        return self

    def predict(self, X):
        """Greedy action for each ``(x, y)`` or ``(x, y, t)`` row."""
        check_is_fitted(self, "q_table_")
        states = check_states(X, self.spec_)
        cfg = self.learner_.cfg
        rng = self._streams(_PREDICT)
        out = np.empty(len(states), dtype=np.int64)
        for i, (x, y, t) in enumerate(states):
            p = x + cfg.side * y
            key = _kernels.make_key(cfg.side, p, _kernels.demo_goal(cfg.demo, t), cfg.augment)
            out[i] = _kernels.greedy_action(self.q_table_.values, key, rng)
        return out

    def score(self, X=None, y=None):
        """Mean task return of ``eval_episodes`` greedy rollouts from the start."""
        check_is_fitted(self, "q_table_")
        visits = np.zeros(self.spec_.n_cells, np.int64)
        returns = _kernels.evaluate(self.learner_.cfg, self.q_table_.values, self._streams(_SCORE),
                                    int(self.eval_episodes), visits)
        return float(returns.mean())

    def visitation(self, n_episodes=100):
        """Cell visit counts of greedy rollouts, as a (side, side) array indexed [y, x].

        Draws tie-breaks from the evaluation stream, continuing where training left off.
        """
        check_is_fitted(self, "q_table_")
        visits = np.zeros(self.spec_.n_cells, np.int64)
        _kernels.evaluate(self.learner_.cfg, self.q_table_.values, self.eval_rng_, int(n_episodes), visits)
        return visits.reshape(self.spec_.side, self.spec_.side)


class QLearningAgent(TabularAgent):
    """Plain Q-learning with experience replay; the demonstration is not used."""

    _needs_demo = False

    def _kernel_config(self, spec, params, demo):
        return kernel_config(spec, params)


class DShapeAgent(TabularAgent):
    """Goal-augmented Q-learning shaped towards the demo, with hindsight relabelling.

    Turning off ``relabel``, ``shaping`` or ``augment`` gives the ablations.
    """

    def __init__(self, relabel=True, shaping=True, augment=True, n_goals=3,
                 side=10, horizon=500, gamma=1.0, alpha=0.1, epsilon=0.2,
                 updates_per_step=20, buffer_capacity=5000, total_steps=250_000,
                 eval_interval=2500, eval_episodes=10, random_state=None):
        super().__init__(side, horizon, gamma, alpha, epsilon, updates_per_step, buffer_capacity,
                         total_steps, eval_interval, eval_episodes, random_state)
        self.relabel = relabel
        self.shaping = shaping
        self.augment = augment
        self.n_goals = n_goals

    @property
    def flags(self) -> AblationFlags:
        return AblationFlags(bool(self.relabel), bool(self.shaping), bool(self.augment))

    def _kernel_config(self, spec, params, demo):
        flags = self.flags
        if flags.relabel and (int(self.n_goals) != self.n_goals or self.n_goals < 1):
            raise ValueError(f"n_goals must be a positive integer, got {self.n_goals!r}")
        return kernel_config(
            spec, params, demo.cells(spec.side),
            augment=flags.augment,
            shaping=_kernels.SHAPING_GOAL if flags.shaping else _kernels.SHAPING_NONE,
            n_goals=int(self.n_goals) if flags.relabel else 0,
        )


class RIDMAgent(TabularAgent):
    """Q-learning over states augmented with the time-aligned demo goal, unshaped."""

    def _kernel_config(self, spec, params, demo):
        return kernel_config(spec, params, demo.cells(spec.side), augment=True)


class SBSAgent(TabularAgent):
    """Potential-based shaping with a similarity-to-demo potential."""

    def __init__(self, sigma=10.0, c=1.0,
                 side=10, horizon=500, gamma=1.0, alpha=0.1, epsilon=0.2,
                 updates_per_step=20, buffer_capacity=5000, total_steps=250_000,
                 eval_interval=2500, eval_episodes=10, random_state=None):
        super().__init__(side, horizon, gamma, alpha, epsilon, updates_per_step, buffer_capacity,
                         total_steps, eval_interval, eval_episodes, random_state)
        self.sigma = sigma
        self.c = c

    def _kernel_config(self, spec, params, demo):
        sbs = SBSParams(float(self.sigma), float(self.c))
        return kernel_config(
            spec, params, demo.cells(spec.side),
            shaping=_kernels.SHAPING_STATE, shaping_scale=sbs.c,
            state_potential=sbs_potential_table(sbs, demo, spec),
        )


class ManhattanAgent(TabularAgent):
    """Additive penalty on the distance to the time-aligned demo state (not potential based)."""

    def __init__(self, c=1.0,
                 side=10, horizon=500, gamma=1.0, alpha=0.1, epsilon=0.2,
                 updates_per_step=20, buffer_capacity=5000, total_steps=250_000,
                 eval_interval=2500, eval_episodes=10, random_state=None):
        super().__init__(side, horizon, gamma, alpha, epsilon, updates_per_step, buffer_capacity,
                         total_steps, eval_interval, eval_episodes, random_state)
        self.c = c

    def _kernel_config(self, spec, params, demo):
        mp = ManhattanParams(float(self.c))
        return kernel_config(spec, params, demo.cells(spec.side), manhattan_c=mp.c)
