import pytest
from hypothesis import given
from hypothesis import strategies as st

from demoshape.env import Action, GridSpec, GridState, manhattan, optimal_return, reset, step


def test_reset_default_start(spec10, spec5):
    assert reset(spec10) == GridState(0, 0, 0)
    assert reset(spec5) == GridState(0, 0, 0)


def test_reset_custom_start():
    assert reset(GridSpec(side=10, start=(2, 3))) == GridState(2, 3, 0)


def test_default_goal_is_top_right():
    assert GridSpec(side=7).task_goal == (6, 6)


@pytest.mark.parametrize("kwargs", [
    dict(side=1),
    dict(side=4, start=(4, 0)),
    dict(side=4, task_goal=(0, 0)),
    dict(side=4, horizon=0),
    dict(side=4, gamma=0.0),
    dict(side=4, gamma=1.5),
])
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_wall_bump(spec10):
    out = step(spec10, GridState(0, 0, 0), Action.LEFT)
    assert out.next_state == GridState(0, 0, 1)
    assert out.reward == -1.0
    assert not out.terminal and not out.truncated


def test_goal_arrival(spec10):
    out = step(spec10, GridState(9, 8, 37), Action.UP)
    assert out.next_state == GridState(9, 9, 38)
    assert out.reward == 0.0
    assert out.terminal


def test_time_limit(spec10):
    out = step(spec10, GridState(3, 3, 499), Action.RIGHT)
    assert out.next_state == GridState(4, 3, 500)
    assert out.reward == -1.0
    assert out.truncated and not out.terminal


def test_step_after_end_rejected(spec10):
    with pytest.raises(ValueError):
        step(spec10, GridState(9, 9, 3), Action.UP)
    with pytest.raises(ValueError):
        step(spec10, GridState(1, 1, 500), Action.UP)
    with pytest.raises(ValueError):
        step(spec10, GridState(10, 1, 0), Action.UP)


def test_optimal_return_values():
    assert optimal_return(GridSpec(side=10)) == -17
    assert optimal_return(GridSpec(side=5)) == -7
    assert optimal_return(GridSpec(side=5, start=(4, 3))) == 0
    assert optimal_return(GridSpec(side=10, horizon=5)) is None


cells = st.integers(0, 9)


@given(cells, cells, st.integers(0, 498), st.sampled_from(list(Action)))
def test_step_properties(x, y, t, a):
    spec = GridSpec(side=10)
    s = GridState(x, y, t)
    if s.pos == spec.task_goal:
        return
    out = step(spec, s, a)
    assert out == step(spec, s, a)
    assert out.next_state.t == t + 1
    assert out.reward in (0.0, -1.0)
    assert (out.reward == 0.0) == out.terminal
    assert abs(manhattan(out.next_state.pos, spec.task_goal) - manhattan(s.pos, spec.task_goal)) <= 1
    nx, ny = out.next_state.pos
    outward = (a == Action.LEFT and x == 0) or (a == Action.RIGHT and x == 9) \
        or (a == Action.DOWN and y == 0) or (a == Action.UP and y == 9)
    if outward:
        assert (nx, ny) == (x, y)
    else:
        assert manhattan((nx, ny), (x, y)) == 1


@given(st.lists(st.sampled_from(list(Action)), min_size=1, max_size=60))
def test_rollout_return_bounded(actions):
    spec = GridSpec(side=4, horizon=30)
    s, total, n = reset(spec), 0.0, 0
    for a in actions:
        out = step(spec, s, a)
        total += out.reward
        n += 1
        s = out.next_state
        if out.done:
            break
    assert n <= spec.horizon
    assert -spec.horizon <= total <= 0
