"""Compiled inner loops for the tabular learners.

Everything in here works on flat integer cell indices (``x + side * y``) and
plain numpy arrays so numba can compile it. The public modules wrap these
functions with friendlier types; the experiment code calls ``train`` directly.

Random draws only ever use ``rng.random()`` so the same ``numpy.random.Generator``
yields the same stream whether a function runs compiled or as plain Python.
"""
from typing import NamedTuple

import numba
import numpy as np

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
N_ACTIONS = 4

SHAPING_NONE = 0
SHAPING_GOAL = 1  # -L1(s, g) on the augmented state
SHAPING_STATE = 2  # tabulated potential over cells (SBS)

TRANSITION_DTYPE = np.dtype(
    [
        ("key", np.int64),
        ("action", np.int64),
        ("reward", np.float64),
        ("next_key", np.int64),
        ("terminal", np.bool_),
        ("s", np.int64),
        ("g", np.int64),
        ("s_next", np.int64),
        ("g_next", np.int64),
        ("r_task", np.float64),
        ("t", np.int64),
    ]
)

# buffer cursor slots
HEAD, SIZE, PUSHED = range(3)
# environment cursor slots
POS, T, EP_LEN, STEPS = range(4)


class KernelConfig(NamedTuple):
    side: int
    start: int
    goal: int
    horizon: int
    gamma: float
    alpha: float
    epsilon: float
    updates_per_step: int
    augment: bool
    shaping: int
    shaping_scale: float
    n_goals: int
    manhattan_c: float
    demo: np.ndarray  # int64 cell index per demo timestep
    state_potential: np.ndarray  # float64 per cell, used when shaping == SHAPING_STATE


@numba.njit(cache=True)
def move(side, p, a):
    x = p % side
    y = p // side
    if a == UP:
        y = min(y + 1, side - 1)
    elif a == DOWN:
        y = max(y - 1, 0)
    elif a == LEFT:
        x = max(x - 1, 0)
    else:
        x = min(x + 1, side - 1)
    return x + side * y


@numba.njit(cache=True)
def l1(side, p, q):
    return abs(p % side - q % side) + abs(p // side - q // side)


@numba.njit(cache=True)
def demo_goal(demo, t):
    i = t + 1
    last = demo.shape[0] - 1
    if i > last:
        i = last
    return demo[i]


@numba.njit(cache=True)
def make_key(side, p, g, augment):
    if augment:
        return p * side * side + g
    return p


@numba.njit(cache=True)
def greedy_action(q, key, rng):
    row = q[key]
    best = row[0]
    for a in range(1, N_ACTIONS):
        if row[a] > best:
            best = row[a]
    n_best = 0
    for a in range(N_ACTIONS):
        if row[a] == best:
            n_best += 1
    if n_best == 1:
        for a in range(N_ACTIONS):
            if row[a] == best:
                return a
    pick = int(rng.random() * n_best)
    for a in range(N_ACTIONS):
        if row[a] == best:
            if pick == 0:
                return a
            pick -= 1
    return N_ACTIONS - 1


@numba.njit(cache=True)
def select_action(q, key, epsilon, rng):
    if rng.random() < epsilon:
        return int(rng.random() * N_ACTIONS)
    return greedy_action(q, key, rng)


@numba.njit(cache=True)
def q_update(q, key, action, reward, next_key, terminal, alpha, gamma):
    target = reward
    if not terminal:
        row = q[next_key]
        best = row[0]
        for a in range(1, N_ACTIONS):
            if row[a] > best:
                best = row[a]
        target += gamma * best
    value = q[key, action] + alpha * (target - q[key, action])
    if not np.isfinite(value):
        raise FloatingPointError("non-finite Q value")
    q[key, action] = value


@numba.njit(cache=True)
def goal_shaping(side, s, g, s_next, g_next, gamma, terminal):
    phi_next = 0.0 if terminal else -float(l1(side, s_next, g_next))
    return gamma * phi_next + float(l1(side, s, g))


@numba.njit(cache=True)
def buffer_push(buf, cursor, key, action, reward, next_key, terminal, s, g, s_next, g_next, r_task, t):
    cap = buf.shape[0]
    i = cursor[HEAD]
    buf[i].key = key
    buf[i].action = action
    buf[i].reward = reward
    buf[i].next_key = next_key
    buf[i].terminal = terminal
    buf[i].s = s
    buf[i].g = g
    buf[i].s_next = s_next
    buf[i].g_next = g_next
    buf[i].r_task = r_task
    buf[i].t = t
    cursor[HEAD] = (i + 1) % cap
    if cursor[SIZE] < cap:
        cursor[SIZE] += 1
    cursor[PUSHED] += 1


@numba.njit(cache=True)
def relabel_episode(cfg, episode, n, buf, cursor, rng):
    """Push ``cfg.n_goals`` relabelled copies of each of the ``n`` episode records.

    Each copy takes the achieved pair (s_k, s_k+1) of a uniformly drawn step k
    as its (g, g') and recomputes the shaped reward from the stored task reward.
    """
    side = cfg.side
    for i in range(n):
        tr = episode[i]
        for _ in range(cfg.n_goals):
            k = int(rng.random() * n)
            g = episode[k].s
            g_next = episode[k].s_next
            reward = tr.r_task + goal_shaping(side, tr.s, g, tr.s_next, g_next, cfg.gamma, tr.terminal)
            buffer_push(
                buf, cursor,
                make_key(side, tr.s, g, True), tr.action, reward,
                make_key(side, tr.s_next, g_next, True), tr.terminal,
                tr.s, g, tr.s_next, g_next, tr.r_task, tr.t,
            )


@numba.njit(cache=True)
def env_step(cfg, q, env, rng, episode):
    """Act once in the environment and stage the transition in ``episode``.

    Returns True when the episode is over (goal reached or time limit).
    """
    side = cfg.side
    p = env[POS]
    t = env[T]
    g = demo_goal(cfg.demo, t)
    key = make_key(side, p, g, cfg.augment)
    a = select_action(q, key, cfg.epsilon, rng)
    p_next = move(side, p, a)
    t_next = t + 1
    terminal = p_next == cfg.goal
    r_task = 0.0 if terminal else -1.0
    g_next = demo_goal(cfg.demo, t_next)
    reward = r_task
    if cfg.shaping == SHAPING_GOAL:
        reward += cfg.shaping_scale * goal_shaping(side, p, g, p_next, g_next, cfg.gamma, terminal)
    elif cfg.shaping == SHAPING_STATE:
        phi_next = 0.0 if terminal else cfg.state_potential[p_next]
        reward += cfg.shaping_scale * (cfg.gamma * phi_next - cfg.state_potential[p])
    if cfg.manhattan_c != 0.0:
        reward -= cfg.manhattan_c * l1(side, p, g)
    n = env[EP_LEN]
    tr = episode[n]
    tr.key = key
    tr.action = a
    tr.reward = reward
    tr.next_key = make_key(side, p_next, g_next, cfg.augment)
    tr.terminal = terminal
    tr.s = p
    tr.g = g
    tr.s_next = p_next
    tr.g_next = g_next
    tr.r_task = r_task
    tr.t = t
    env[EP_LEN] = n + 1
    env[STEPS] += 1
    env[POS] = p_next
    env[T] = t_next
    return terminal or t_next >= cfg.horizon


@numba.njit(cache=True)
def replay(cfg, q, buf, cursor, rng):
    size = cursor[SIZE]
    if size == 0:
        return
    for _ in range(cfg.updates_per_step):
        tr = buf[int(rng.random() * size)]
        q_update(q, tr.key, tr.action, tr.reward, tr.next_key, tr.terminal, cfg.alpha, cfg.gamma)


@numba.njit(cache=True)
def train_step(cfg, q, buf, cursor, env, episode, rng):
    """One env step, buffer insertion (+ relabels at episode end), then replay updates."""
    done = env_step(cfg, q, env, rng, episode)
    n = env[EP_LEN]
    tr = episode[n - 1]
    buffer_push(
        buf, cursor, tr.key, tr.action, tr.reward, tr.next_key, tr.terminal,
        tr.s, tr.g, tr.s_next, tr.g_next, tr.r_task, tr.t,
    )
    if done:
        if cfg.n_goals > 0:
            relabel_episode(cfg, episode, n, buf, cursor, rng)
        env[POS] = cfg.start
        env[T] = 0
        env[EP_LEN] = 0
    replay(cfg, q, buf, cursor, rng)
    return done


@numba.njit(cache=True)
def greedy_episode(cfg, q, rng, visits):
    """Task return of one greedy rollout; cell visits are added to ``visits``."""
    side = cfg.side
    p = cfg.start
    total = 0.0
    visits[p] += 1
    for t in range(cfg.horizon):
        key = make_key(side, p, demo_goal(cfg.demo, t), cfg.augment)
        a = greedy_action(q, key, rng)
        p = move(side, p, a)
        visits[p] += 1
        if p == cfg.goal:
            break
        total -= 1.0
    return total


@numba.njit(cache=True)
def evaluate(cfg, q, rng, n_episodes, visits):
    out = np.empty(n_episodes)
    for i in range(n_episodes):
        out[i] = greedy_episode(cfg, q, rng, visits)
    return out


@numba.njit(cache=True)
def train(cfg, q, buf, cursor, env, episode, total_steps, eval_interval, eval_episodes, rng, eval_rng):
    """Run ``total_steps`` env steps; returns (n_points, eval_episodes) greedy returns.

    Evaluation happens before the first step and after every ``eval_interval`` steps.
    """
    n_points = total_steps // eval_interval + 1
    returns = np.empty((n_points, eval_episodes))
    scratch = np.zeros(cfg.side * cfg.side, np.int64)
    returns[0] = evaluate(cfg, q, eval_rng, eval_episodes, scratch)
    point = 1
    for step in range(1, total_steps + 1):
        train_step(cfg, q, buf, cursor, env, episode, rng)
        if step % eval_interval == 0:
            returns[point] = evaluate(cfg, q, eval_rng, eval_episodes, scratch)
            point += 1
    return returns
