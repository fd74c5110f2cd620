"""Exhaustive action-sequence enumeration, written without the package's dynamics."""
import numpy as np


def moves(side):
    """Next-cell table built independently of the package code."""
    n = side * side
    table = np.zeros((n, 4), dtype=np.int64)
    for p in range(n):
        x, y = p % side, p // side
        table[p] = [x + side * min(y + 1, side - 1), x + side * max(y - 1, 0),
                    max(x - 1, 0) + side * y, min(x + 1, side - 1) + side * y]
    return table


def brute_force_q(side, horizon):
    """Q[t, p, a]: best return over every action sequence from (p, t) starting with a."""
    N = moves(side)
    goal = side * side - 1
    Q = np.zeros((horizon, side * side, 4))
    for t in range(horizon):
        k = horizon - t
        seqs = np.arange(4 ** k)
        digits = [(seqs // 4 ** i) % 4 for i in range(k)]
        for p in range(side * side):
            if p == goal:
                continue
            pos = np.full(seqs.shape, p)
            ret = np.zeros(seqs.shape)
            alive = np.ones(seqs.shape, bool)
            for a in digits:
                nxt = N[pos, a]
                ret -= alive & (nxt != goal)
                alive &= nxt != goal
                pos = np.where(alive, nxt, pos)
            for a in range(4):
                Q[t, p, a] = ret[digits[0] == a].max()
    return Q
