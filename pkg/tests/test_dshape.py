import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from demoshape import _kernels
from demoshape.demos import make_demo
from demoshape.dshape import (
    AblationFlags, PotentialFn, inference_action, relabel, rollout_step, shaped_reward, shaping_term,
)
from demoshape.env import Action, GridSpec, GridState, manhattan
from demoshape.estimators import DShapeAgent, QLearningAgent, RIDMAgent
from demoshape.qcore import Learner, LearnerParams, QKey, QTable, Transition, kernel_config


def dshape_learner(spec, demo, epsilon=0.2, capacity=5000):
    cfg = kernel_config(spec, LearnerParams(epsilon=epsilon), demo.cells(spec.side), augment=True,
                        shaping=_kernels.SHAPING_GOAL, n_goals=3)
    return Learner(cfg, capacity)


def eq1(tr: Transition, gamma=1.0):
    """Shaping term recomputed from a record's stored positions."""
    phi_next = 0.0 if tr.terminal else -manhattan(tr.s_next, tr.g_next)
    return gamma * phi_next + manhattan(tr.s, tr.g)


def test_shaping_term_examples():
    assert shaping_term((0, 0), (1, 0), (1, 0), (2, 0), 1.0, False) == 0.0
    assert shaping_term((3, 3), (3, 3), (4, 3), (4, 3), 1.0, False) == 0.0
    assert shaping_term((1, 0), (2, 2), (9, 9), (2, 2), 1.0, True) == 3.0


def test_shaped_reward_examples():
    assert shaped_reward(-1.0, 0.0) == -1.0
    assert shaped_reward(-1.0, 1.0) == 0.0
    assert shaped_reward(0.0, 3.0) == 3.0


def test_potential():
    phi = PotentialFn()
    assert phi((0, 0), (3, 4)) == -7.0
    assert phi((0, 0), (3, 4), terminal=True) == 0.0


def test_flags_validation():
    AblationFlags(False, False, False)
    AblationFlags(False, True, False)
    with pytest.raises(ValueError):
        AblationFlags(True, False, True)
    with pytest.raises(ValueError):
        AblationFlags(True, True, False)
    assert AblationFlags().label == "dshape"
    assert AblationFlags(False, True, False).label == "dshape-GR-SA"


def _force(learner, key, action):
    learner.q[key][:] = 0.0
    learner.q[key][action] = 1.0


def test_rollout_step_first_move_right(rng, spec5, demo5):
    learner = dshape_learner(spec5, demo5, epsilon=0.0)
    _force(learner, QKey(0, 0, 1, 0), Action.RIGHT)
    tr = rollout_step(learner, rng)
    assert tr.key == QKey(0, 0, 1, 0)
    assert tr.next_key == QKey(1, 0, 2, 0)
    assert tr.reward - tr.r_task == 0.0
    assert tr.reward == -1.0


def test_rollout_step_standing_still(rng, spec5, demo5):
    learner = dshape_learner(spec5, demo5, epsilon=0.0)
    _force(learner, QKey(0, 0, 1, 0), Action.LEFT)
    tr = rollout_step(learner, rng)
    assert tr.s_next == (0, 0)
    assert tr.reward - tr.r_task < 0
    assert tr.reward < -1


def test_rollout_step_goal_arrival(rng, spec5, demo5):
    learner = dshape_learner(spec5, demo5, epsilon=0.0)
    learner.env[_kernels.POS] = spec5.index((4, 3))
    learner.env[_kernels.T] = 7
    _force(learner, QKey(4, 3, 4, 4), Action.UP)
    tr = rollout_step(learner, rng)
    assert tr.terminal and tr.r_task == 0.0
    assert tr.reward == 0.0 + eq1(tr)
    with pytest.raises(ValueError):
        rollout_step(learner, rng)


def _episode(rng, spec, demo, max_tries=50):
    """A completed (goal-reaching) exploratory episode as stored transitions."""
    for _ in range(max_tries):
        learner = dshape_learner(spec, demo, epsilon=1.0)
        out = []
        while True:
            out.append(rollout_step(learner, rng))
            if out[-1].terminal or out[-1].t + 1 >= spec.horizon:
                break
        if out[-1].terminal:
            return out
    raise RuntimeError("no completed episode")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["optimal", "good", "worst"]))
def test_telescoping(seed, tier):
    spec = GridSpec(side=8, horizon=3000)
    demo = make_demo(spec, tier)
    ep = _episode(np.random.default_rng(seed), spec, demo)
    total = sum(tr.reward - tr.r_task for tr in ep)
    assert abs(total - manhattan(ep[0].s, ep[0].g)) <= 1e-9


def test_relabel_self_goal(rng):
    tr = Transition(QKey(0, 0, 0, 0), Action.RIGHT, -1.0, QKey(1, 0, 1, 0), False,
                    (0, 0), (0, 0), (1, 0), (1, 0), -1.0, 0)
    out = relabel([tr], 3, rng, side=5)
    assert len(out) == 3
    for r in out:
        assert (r.g, r.g_next) == (tr.s, tr.s_next)
        assert r.reward == r.r_task


def test_relabel_counts_with_replacement(rng, spec5, demo5):
    ep = _episode(rng, GridSpec(side=2, horizon=200), make_demo(GridSpec(side=2), "optimal"))
    ep = ep[:2]
    out = relabel(ep, 3, rng, side=2)
    assert len(out) == 6
    assert len({(r.g, r.g_next) for r in out}) <= 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_relabel_records(seed, n_goals):
    rng = np.random.default_rng(seed)
    spec = GridSpec(side=6, horizon=3000)
    ep = _episode(rng, spec, make_demo(spec, "good"))
    out = relabel(ep, n_goals, rng, side=6)
    assert len(out) == n_goals * len(ep)
    achieved = {(tr.s, tr.s_next) for tr in ep}
    for i, r in enumerate(out):
        src = ep[i // n_goals]
        assert (r.s, r.s_next, r.action, r.r_task, r.terminal, r.t) == \
            (src.s, src.s_next, src.action, src.r_task, src.terminal, src.t)
        assert r.reward - r.r_task == eq1(r)
        # the goal pair is an achieved transition of the same episode
        assert (r.g, r.g_next) in achieved
        assert r.key == QKey(*r.s, *r.g) and r.next_key == QKey(*r.s_next, *r.g_next)


def test_inference_untrained_is_uniform(rng, demo5):
    q = QTable(5, augmented=True)
    draws = [inference_action(q, GridState(2, 2, 3), demo5, rng) for _ in range(8000)]
    assert chisquare(np.bincount(draws, minlength=4)).pvalue > 0.001


def test_inference_uses_time_aligned_goal(rng, demo5):
    q = QTable(5, augmented=True)
    q[QKey(4, 0, 4, 2)][Action.UP] = 1.0
    assert inference_action(q, GridState(4, 0, 5), demo5, rng) == Action.UP


def test_converged_5x5_acts_optimally(demo5):
    agent = DShapeAgent(side=5, horizon=100, total_steps=20_000, eval_interval=1000, random_state=3).fit(demo5)
    assert agent.predict([[0, 0, 0]])[0] in (Action.RIGHT, Action.UP)
    assert agent.score() == -7.0


def test_ablation_all_off_is_qlearning(demo5):
    kw = dict(side=5, horizon=60, total_steps=4000, eval_interval=500)
    for seed in range(3):
        a = DShapeAgent(False, False, False, random_state=seed, **kw).fit(demo5)
        b = QLearningAgent(random_state=seed, **kw).fit(demo5)
        assert np.array_equal(a.q_table_.values, b.q_table_.values)
        assert np.array_equal(a.eval_returns_, b.eval_returns_)


def test_ablation_augment_only_is_ridm(demo5):
    kw = dict(side=5, horizon=60, total_steps=4000, eval_interval=500)
    for seed in range(3):
        a = DShapeAgent(False, False, True, random_state=seed, **kw).fit(demo5)
        b = RIDMAgent(random_state=seed, **kw).fit(demo5)
        assert np.array_equal(a.q_table_.values, b.q_table_.values)
        assert np.array_equal(a.eval_returns_, b.eval_returns_)


def test_buffer_records_recomputable(demo5):
    agent = DShapeAgent(side=5, horizon=60, total_steps=3000, eval_interval=500, random_state=8).fit(demo5)
    recs = agent.learner_.transitions(agent.buffer_.records())
    assert len(recs) == 5000
    for r in recs:
        assert r.reward - r.r_task == eq1(r)
