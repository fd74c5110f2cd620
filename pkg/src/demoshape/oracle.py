"""Exact finite-horizon solutions of the gridworld, its goal-augmented version and
shaped variants, plus checks that compare their greedy action sets.

Time is part of the state here, so every solution is exact for the horizon it
is given. States at t = H are terminal, as is the goal cell; potentials are
taken to be 0 on terminal states.
"""
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Optional, Tuple

import numpy as np

from . import _kernels
from .baselines import SBSParams, sbs_potential_table
from .demos import Demonstration
from .env import Action, GridSpec

ARGMAX_TOL = 1e-9
MAX_ENTRIES = 60_000_000  # H * |S| * |A| * branching


def theory_horizon(side: int) -> int:
    return 4 * side


def _next_cells(spec: GridSpec) -> np.ndarray:
    cells = np.arange(spec.n_cells)
    return np.array([[_kernels.move(spec.side, p, a) for a in range(_kernels.N_ACTIONS)] for p in cells],
                    dtype=np.int64)


def _l1(spec: GridSpec, p, q):
    p, q = np.asarray(p), np.asarray(q)
    return np.abs(p % spec.side - q % spec.side) + np.abs(p // spec.side - q // spec.side)


def argmax_set(row, tol: float = ARGMAX_TOL) -> FrozenSet[Action]:
    best = np.max(row)
    return frozenset(Action(a) for a in np.flatnonzero(row >= best - tol))


@dataclass
class ExactSolution:
    """Q[t, s, a] and V[t, s] over flat state indices, with the reachable mask.

    For augmented problems a state index is ``cell * n_cells + goal_cell``.
    """

    spec: GridSpec
    Q: np.ndarray
    V: np.ndarray
    reachable: np.ndarray
    terminal: np.ndarray
    augmented: bool = False

    def state_index(self, s, g=None) -> int:
        p = self.spec.index(s)
        if self.augmented:
            if g is None:
                raise ValueError("augmented solution needs a goal")
            return p * self.spec.n_cells + self.spec.index(g)
        return p

    def describe(self, idx: int):
        n = self.spec.n_cells
        if self.augmented:
            return self.spec.position(idx // n), self.spec.position(idx % n)
        return self.spec.position(idx)

    def value(self, s, t: int = 0, g=None) -> float:
        return float(self.V[t, self.state_index(s, g)])

    def optimal_actions(self, s, t: int = 0, g=None) -> FrozenSet[Action]:
        return argmax_set(self.Q[t, self.state_index(s, g)])

    def decision_states(self):
        """(t, state index) pairs that are reachable and not terminal, t < H."""
        mask = self.reachable[:-1] & ~self.terminal[None, :]
        return np.argwhere(mask)


Step = Callable[[int], Tuple[np.ndarray, np.ndarray]]


def _solve(spec, n_states, step: Step, terminal, init, policy=None, max_entries=MAX_ENTRIES):
    """Backward induction. ``step(t)`` gives (next index, reward), each (S, A, K);
    the K outcomes are equally likely."""
    H = spec.horizon
    nxt0, _ = step(0)
    entries = H * nxt0.size
    if entries > max_entries:
        raise ValueError(f"problem needs {entries} table entries, over the budget of {max_entries}")
    V = np.zeros((H + 1, n_states))
    Q = np.zeros((H, n_states, _kernels.N_ACTIONS))
    reachable = np.zeros((H + 1, n_states), dtype=bool)
    reachable[0, init] = True
    for t in range(H):
        live = reachable[t] & ~terminal
        reachable[t + 1, step(t)[0][live].ravel()] = True
    rows = np.arange(n_states)
    for t in range(H - 1, -1, -1):
        nxt, r = step(t)
        Q[t] = (r + spec.gamma * V[t + 1][nxt]).mean(axis=2)
        Q[t, terminal] = 0.0
        V[t] = Q[t].max(axis=1) if policy is None else Q[t][rows, policy[t]]
        V[t, terminal] = 0.0
    return Q, V, reachable


def value_iteration(spec: GridSpec, extra_reward=None, max_entries=MAX_ENTRIES, policy=None) -> ExactSolution:
    """Exact solution of the task MDP.

    ``extra_reward(t, next_cells)`` may return an (n_cells, 4) array added to
    the task reward at time t (used for the shaped baselines).
    ``policy`` (H, n_cells) of action ints evaluates that policy instead of optimising.
    """
    N = _next_cells(spec)
    goal = spec.index(spec.task_goal)
    base = np.where(N == goal, 0.0, -1.0)
    terminal = np.arange(spec.n_cells) == goal

    def step(t):
        r = base if extra_reward is None else base + extra_reward(t, N)
        return N[:, :, None], r[:, :, None]

    Q, V, reach = _solve(spec, spec.n_cells, step, terminal, [spec.index(spec.start)], policy, max_entries)
    return ExactSolution(spec, Q, V, reach, terminal)


def _demo_goal_cells(spec: GridSpec, demo: Demonstration) -> np.ndarray:
    """Cell of the sub-goal in force at each t = 0 .. H."""
    cells = demo.cells(spec.side)
    idx = np.minimum(np.arange(spec.horizon + 1) + 1, len(cells) - 1)
    return cells[idx]


def value_iteration_augmented(spec: GridSpec, demo: Optional[Demonstration] = None, *, goal_kernel: str = "demo",
                              shaped: bool = False, goal_penalty: float = 0.0, policy=None,
                              max_entries=MAX_ENTRIES) -> ExactSolution:
    """Exact solution over augmented states [s, g].

    ``goal_kernel`` decides how g evolves:

    * ``"demo"``: g is the demo sub-goal for the current time, starting from [s_0, g_0];
    * ``"relabel"``: g' = move(g, b) with b uniform over the four actions, the
      dynamics of consecutive achieved states; every goal cell is a possible start.

    ``shaped`` adds gamma * phi([s', g']) - phi([s, g]) with phi = -L1.
    ``goal_penalty`` subtracts that multiple of |s' - g|_1 from the reward, which
    makes the reward depend on g (a deliberately broken variant).
    """
    n = spec.n_cells
    N = _next_cells(spec)
    goal = spec.index(spec.task_goal)
    idx = np.arange(n * n)
    p_of, g_of = idx // n, idx % n
    s_next = N[p_of][:, :, None]  # (S, A, 1)
    terminal = p_of == goal
    base = np.where(s_next == goal, 0.0, -1.0)
    if goal_penalty:
        base = base - goal_penalty * _l1(spec, s_next, g_of[:, None, None])

    if goal_kernel == "demo":
        if demo is None:
            raise ValueError("the demo goal kernel needs a demonstration")
        goals = _demo_goal_cells(spec, demo)
        init = [spec.index(spec.start) * n + goals[0]]

        def next_goal(t):
            return np.full((n * n, 1, 1), goals[t + 1])
    elif goal_kernel == "relabel":
        init = spec.index(spec.start) * n + np.arange(n)
        moved = N[g_of][:, None, :]  # (S, 1, K)

        def next_goal(t):
            return moved
    else:
        raise ValueError(f"unknown goal kernel {goal_kernel!r}")

    phi = -_l1(spec, p_of, g_of).astype(float)

    def step(t):
        g_next = next_goal(t)
        nxt = s_next * n + g_next
        r = np.broadcast_to(base, nxt.shape).astype(float)
        if shaped:
            ends = (s_next == goal) | (t + 1 >= spec.horizon)
            phi_next = np.where(ends, 0.0, -_l1(spec, s_next, g_next))
            r = r + spec.gamma * phi_next - phi[:, None, None]
        return nxt, r

    Q, V, reach = _solve(spec, n * n, step, terminal, init, policy, max_entries)
    return ExactSolution(spec, Q, V, reach, terminal, augmented=True)


@dataclass
class Certificate:
    name: str
    passed: bool
    n_checked: int
    counterexamples: List[tuple] = field(default_factory=list)
    n_failed: int = 0
    note: str = ""
    on_path_failed: Optional[int] = None

    def to_text(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'} "
                 f"({self.n_checked} states checked, {self.n_failed} mismatches)"]
        if self.note:
            lines.append(f"  {self.note}")
        for ex in self.counterexamples:
            lines.append("  " + " ".join(str(v) for v in ex))
        return "\n".join(lines)


def _fmt(actions) -> str:
    return "{" + ",".join(a.name for a in sorted(actions)) + "}"


def _compare(name, left: ExactSolution, right: ExactSolution, project=None, keep=10, states=None):
    """Compare argmax sets of ``left`` against ``right`` on left's decision states.

    ``project`` maps a left state index to the matching right index.
    """
    if states is None:
        states = left.decision_states()
    failed, examples = 0, []
    for t, i in states:
        j = i if project is None else project(i)
        a, b = argmax_set(left.Q[t, i]), argmax_set(right.Q[t, j])
        if a != b:
            failed += 1
            if len(examples) < keep:
                examples.append((f"t={t}", left.describe(i), _fmt(a), "vs", _fmt(b)))
    return Certificate(name, failed == 0, len(states), examples, failed)


def _project(spec):
    n = spec.n_cells
    return lambda i: i // n


def check_theorem1(spec: GridSpec, demo: Demonstration, goal_kernel: str = "demo",
                   goal_penalty: float = 0.0) -> Certificate:
    """Greedy actions of the augmented MDP match those of the task MDP at every reachable [s, g]."""
    aug = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel, goal_penalty=goal_penalty)
    base = value_iteration(spec)
    cert = _compare(f"augmented optimal actions ({goal_kernel} goals)", aug, base, _project(spec))
    if goal_penalty:
        cert.note = f"reward depends on the goal (penalty {goal_penalty})"
    return cert


def check_value_equivalence(spec: GridSpec, demo: Demonstration, goal_kernel: str = "demo") -> Certificate:
    """V*([s, g]) equals V*(s) at every reachable augmented state."""
    aug = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel)
    base = value_iteration(spec)
    states = aug.decision_states()
    diff = np.abs(aug.V[states[:, 0], states[:, 1]] - base.V[states[:, 0], states[:, 1] // spec.n_cells])
    bad = np.flatnonzero(diff > ARGMAX_TOL)
    examples = [(f"t={states[k, 0]}", aug.describe(states[k, 1]), f"diff={diff[k]:.3g}") for k in bad[:10]]
    return Certificate(f"augmented optimal values ({goal_kernel} goals)", len(bad) == 0, len(states), examples, len(bad))


def check_policy_invariance(spec: GridSpec, demo: Demonstration, goal_kernel: str = "demo") -> Certificate:
    """Shaping with phi = -L1(s, g) leaves the augmented greedy actions unchanged."""
    shaped = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel, shaped=True)
    plain = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel)
    return _compare(f"shaped augmented actions ({goal_kernel} goals)", shaped, plain)


def check_shaping_offset(spec: GridSpec, demo: Demonstration, goal_kernel: str = "demo") -> Certificate:
    """Shaped and unshaped optimal Q differ by exactly -phi([s, g]) (gamma = 1)."""
    if spec.gamma != 1.0:
        raise ValueError("the constant offset only holds for gamma == 1")
    shaped = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel, shaped=True)
    plain = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel)
    n = spec.n_cells
    states = plain.decision_states()
    phi = -_l1(spec, states[:, 1] // n, states[:, 1] % n)
    gap = shaped.Q[states[:, 0], states[:, 1]] - plain.Q[states[:, 0], states[:, 1]] + phi[:, None]
    err = np.abs(gap).max(axis=1)
    bad = np.flatnonzero(err > ARGMAX_TOL)
    examples = [(f"t={states[k, 0]}", plain.describe(states[k, 1]), f"err={err[k]:.3g}") for k in bad[:10]]
    return Certificate(f"shaping offset ({goal_kernel} goals)", len(bad) == 0, len(states), examples, len(bad))


def check_policy_lift(spec: GridSpec, demo: Demonstration, policy: np.ndarray,
                      goal_kernel: str = "demo") -> Certificate:
    """A task policy run on augmented states (ignoring g) keeps its value everywhere reachable.

    ``policy`` is an (H, n_cells) array of actions.
    """
    policy = np.asarray(policy, dtype=np.int64)
    n = spec.n_cells
    base = value_iteration(spec, policy=policy)
    lifted = np.repeat(policy, n, axis=1)  # state p * n + g -> policy[t, p]
    aug = value_iteration_augmented(spec, demo, goal_kernel=goal_kernel, policy=lifted)
    states = aug.decision_states()
    diff = np.abs(aug.V[states[:, 0], states[:, 1]] - base.V[states[:, 0], states[:, 1] // n])
    bad = np.flatnonzero(diff > ARGMAX_TOL)
    examples = [(f"t={states[k, 0]}", aug.describe(states[k, 1]), f"diff={diff[k]:.3g}") for k in bad[:10]]
    return Certificate(f"lifted policy values ({goal_kernel} goals)", len(bad) == 0, len(states), examples, len(bad))


def sbs_solution(spec: GridSpec, demo: Demonstration, params: SBSParams = SBSParams()) -> ExactSolution:
    phi = sbs_potential_table(params, demo, spec)
    goal = spec.index(spec.task_goal)

    def extra(t, N):
        ends = (N == goal) | (t + 1 >= spec.horizon)
        return params.c * (spec.gamma * np.where(ends, 0.0, phi[N]) - phi[:, None])

    return value_iteration(spec, extra)


def manhattan_solution(spec: GridSpec, demo: Demonstration, c: float) -> ExactSolution:
    goals = _demo_goal_cells(spec, demo)
    cells = np.arange(spec.n_cells)

    def extra(t, N):
        return np.broadcast_to(-c * _l1(spec, cells, goals[t])[:, None], N.shape)

    return value_iteration(spec, extra)


def check_sbs_invariance(spec: GridSpec, demo: Demonstration, params: SBSParams = SBSParams()) -> Certificate:
    cert = _compare("similarity-shaped actions", sbs_solution(spec, demo, params), value_iteration(spec))
    cert.note = f"sigma={params.sigma} c={params.c}"
    return cert


def greedy_path(sol: ExactSolution):
    """(t, cell) pairs visited by the first-maximiser greedy policy from the start."""
    spec = sol.spec
    N = _next_cells(spec)
    p, path = spec.index(spec.start), []
    for t in range(spec.horizon):
        if sol.terminal[p]:
            break
        path.append((t, p))
        p = N[p, int(np.argmax(sol.Q[t, p]))]
    return path


def check_manhattan(spec: GridSpec, demo: Demonstration, c: float) -> Certificate:
    """Compare the Manhattan-shaped optimal actions with the task's.

    The certificate fails when they differ anywhere reachable; ``note`` reports
    how many differences lie on the shaped policy's own greedy path.
    """
    shaped = manhattan_solution(spec, demo, c)
    base = value_iteration(spec)
    cert = _compare(f"Manhattan-shaped actions (c={c})", shaped, base)
    on_path = _compare("on-path", shaped, base, states=np.array(greedy_path(shaped), dtype=np.int64).reshape(-1, 2))
    cert.note = f"{on_path.n_failed} of {on_path.n_checked} on-path states differ"
    cert.on_path_failed = on_path.n_failed
    cert.counterexamples = on_path.counterexamples or cert.counterexamples
    return cert


def certify(spec: GridSpec, demo: Demonstration, manhattan_c: Optional[float] = None) -> List[Certificate]:
    """Every invariance check for one (grid, demo) pair."""
    certs = []
    for kernel in ("demo", "relabel"):
        certs += [
            check_theorem1(spec, demo, kernel),
            check_value_equivalence(spec, demo, kernel),
            check_policy_invariance(spec, demo, kernel),
        ]
        if spec.gamma == 1.0:
            certs.append(check_shaping_offset(spec, demo, kernel))
    certs.append(check_sbs_invariance(spec, demo))
    if manhattan_c is not None:
        certs.append(check_manhattan(spec, demo, manhattan_c))
    return certs


def report(certs) -> str:
    return "\n".join(c.to_text() for c in certs)
