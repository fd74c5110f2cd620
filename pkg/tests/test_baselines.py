import math

import numpy as np
import pytest

from demoshape.baselines import (
    ManhattanParams, SBSParams, manhattan_reward, sbs_potential, sbs_potential_table, sbs_reward,
)
from demoshape.demos import make_demo
from demoshape.env import GridSpec
from demoshape.estimators import ManhattanAgent, QLearningAgent, RIDMAgent, SBSAgent
from demoshape.oracle import value_iteration


def test_sbs_potential_on_demo_state(spec5, demo5):
    for s in demo5.states:
        assert sbs_potential(SBSParams(), s.pos, demo5, spec5) == 1.0


def test_sbs_potential_wide_kernel(spec5, demo5):
    table = sbs_potential_table(SBSParams(sigma=1e12), demo5, spec5)
    assert np.allclose(table, 1.0)


def test_sbs_potential_corner(spec5, demo5):
    assert sbs_potential(SBSParams(sigma=10), (0, 4), demo5, spec5) == pytest.approx(math.exp(-0.05))


@pytest.mark.parametrize("tier", ["optimal", "good", "worst"])
@pytest.mark.parametrize("sigma", [0.1, 1.0, 10.0])
def test_sbs_potential_range(tier, sigma):
    spec = GridSpec(side=10)
    demo = make_demo(spec, tier)
    table = sbs_potential_table(SBSParams(sigma=sigma), demo, spec)
    assert np.all(table > 0) and np.all(table <= 1)
    on_demo = np.zeros(spec.n_cells, bool)
    on_demo[demo.cells(10)] = True
    assert np.array_equal(table == 1.0, on_demo)


def test_sbs_reward_examples():
    assert sbs_reward(-1.0, 0.3, 0.8, 1.0, 0.0, False) == -1.0
    assert sbs_reward(-1.0, 0.7, 0.7, 1.0, 1.0, False) == -1.0
    assert sbs_reward(-1.0, 0.9, 1.0, 1.0, 1.0, False) == pytest.approx(-0.9)
    assert sbs_reward(0.0, 0.9, 1.0, 1.0, 1.0, True) == pytest.approx(-0.9)


def test_manhattan_reward_examples(demo5):
    # at t = 0 the lookahead demo state is (1, 0)
    assert manhattan_reward(-1.0, (1, 0), 0, demo5, 25.0) == -1.0
    assert manhattan_reward(-1.0, (1, 3), 0, demo5, 1.0) == -4.0
    assert manhattan_reward(-1.0, (1, 3), 0, demo5, 25.0) == -76.0


def test_manhattan_reward_decreasing(demo5):
    values = [manhattan_reward(-1.0, (x, 0), 7, demo5, 2.0) for x in range(5)]  # goal (4, 4)
    assert all(a < b for a, b in zip(values, values[1:]))


def test_param_validation():
    with pytest.raises(ValueError):
        SBSParams(sigma=0.0)
    with pytest.raises(ValueError):
        ManhattanParams(c=-1.0)


@pytest.mark.parametrize("cls", [SBSAgent, ManhattanAgent])
def test_zero_coefficient_is_qlearning(cls, demo5):
    kw = dict(side=5, horizon=60, total_steps=3000, eval_interval=500)
    for seed in range(3):
        a = cls(c=0.0, random_state=seed, **kw).fit(demo5)
        b = QLearningAgent(random_state=seed, **kw).fit(demo5)
        assert np.array_equal(a.q_table_.values, b.q_table_.values)
        assert np.array_equal(a.eval_returns_, b.eval_returns_)


def test_ridm_solves_3x3():
    spec = GridSpec(side=3, horizon=10)
    agent = RIDMAgent(side=3, horizon=10, total_steps=20_000, eval_interval=1000, random_state=0)
    agent.fit(make_demo(spec, "optimal"))
    assert agent.learning_curve_[-1] == value_iteration(spec).value((0, 0))
