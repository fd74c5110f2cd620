"""Multi-seed experiments: configuration, orchestration, aggregation and output files."""
import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .demos import Quality, make_demo
from .dshape import AblationFlags
from .env import GridSpec, optimal_return
from .estimators import DShapeAgent, ManhattanAgent, QLearningAgent, RIDMAgent, SBSAgent
from .qcore import LearnerParams

log = logging.getLogger(__name__)

METHODS = ("qlearning", "dshape", "sbs", "ridm", "manhattan", "dshape_ablation")


@dataclass
class ExperimentConfig:
    sides: List[int] = field(default_factory=lambda: [10])
    method: str = "dshape"
    demo_quality: str = "optimal"
    horizon: int = 500
    alpha: float = 0.1
    epsilon: float = 0.2
    gamma: float = 1.0
    updates_per_step: int = 20
    buffer_capacity: int = 5000
    total_steps: int = 250_000
    sigma: float = 10.0
    c: float = 1.0
    n_goals: int = 3
    relabel: bool = True
    shaping: bool = True
    augment: bool = True
    n_runs: int = 30
    eval_interval: int = 2500
    eval_episodes: int = 10
    visitation_episodes: int = 100
    base_seed: int = 0
    label: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.sides, int):
            self.sides = [self.sides]
        self.sides = [int(s) for s in self.sides]
        if not self.sides:
            raise ValueError("sides must list at least one grid size")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        Quality.parse(self.demo_quality)
        self.learner  # validates the learner fields
        for name in ("n_runs", "eval_interval", "eval_episodes", "visitation_episodes", "horizon"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer, got {getattr(self, name)!r}")
        if self.total_steps % self.eval_interval:
            raise ValueError(f"eval_interval {self.eval_interval} does not divide total_steps {self.total_steps}")
        flags = (self.relabel, self.shaping, self.augment)
        if self.method == "dshape_ablation":
            AblationFlags(*flags)
        elif flags != (True, True, True):
            raise ValueError(f"relabel/shaping/augment only apply to method 'dshape_ablation', not {self.method!r}")
        if self.method == "sbs" and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.method == "manhattan" and self.c < 0:
            raise ValueError("c must be non-negative")
        if self.method in ("dshape", "dshape_ablation") and self.n_goals < 1:
            raise ValueError("n_goals must be a positive integer")
        for side in self.sides:
            GridSpec(side=side, horizon=self.horizon, gamma=self.gamma)
            if self.method != "qlearning":
                make_demo(GridSpec(side=side, horizon=self.horizon), self.demo_quality)

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.method == "dshape_ablation":
            return AblationFlags(self.relabel, self.shaping, self.augment).label
        if self.method == "manhattan":
            return f"manhattan_c{self.c:g}"
        if self.method == "sbs":
            return f"sbs_sigma{self.sigma:g}_c{self.c:g}"
        return self.method

    @property
    def learner(self) -> LearnerParams:
        return LearnerParams(self.alpha, self.epsilon, self.gamma, self.updates_per_step,
                             self.buffer_capacity, self.total_steps)

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: not a valid config file ({e})") from None
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a flat key/value object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def make_agent(self, side: int, run: int):
        common = dict(
            side=side, horizon=self.horizon, gamma=self.gamma, alpha=self.alpha, epsilon=self.epsilon,
            updates_per_step=self.updates_per_step, buffer_capacity=self.buffer_capacity,
            total_steps=self.total_steps, eval_interval=self.eval_interval,
            eval_episodes=self.eval_episodes, random_state=(self.base_seed, run),
        )
        if self.method == "qlearning":
            return QLearningAgent(**common)
        if self.method == "dshape":
            return DShapeAgent(n_goals=self.n_goals, **common)
        if self.method == "dshape_ablation":
            return DShapeAgent(self.relabel, self.shaping, self.augment, self.n_goals, **common)
        if self.method == "ridm":
            return RIDMAgent(**common)
        if self.method == "sbs":
            return SBSAgent(self.sigma, self.c, **common)
        return ManhattanAgent(self.c, **common)


@dataclass
class LearningCurve:
    """Mean evaluation return of each run at each evaluation point."""

    env_steps: np.ndarray
    returns: np.ndarray  # (n_points, n_runs)
    fingerprint: str = ""

    def __post_init__(self):
        self.env_steps = np.asarray(self.env_steps, dtype=np.int64)
        self.returns = np.asarray(self.returns, dtype=float).reshape(len(self.env_steps), -1)
        if np.any(np.diff(self.env_steps) <= 0):
            raise ValueError("env_steps must increase")

    @property
    def n_runs(self) -> int:
        return self.returns.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.returns.mean(axis=1)

    @property
    def std(self) -> np.ndarray:
        return self.returns.std(axis=1)

    @property
    def final(self) -> np.ndarray:
        """Per-run return at the last evaluation point."""
        return self.returns[-1]

    def run_aucs(self) -> np.ndarray:
        return self.returns.sum(axis=0)

    def points(self):
        for step, row, m, s in zip(self.env_steps, self.returns, self.mean, self.std):
            yield int(step), row, float(m), float(s)


@dataclass
class VisitationMap:
    """Visit counts indexed [y, x], summed over runs and rollouts."""

    counts: np.ndarray
    n_runs: int
    episodes_per_run: int

    @property
    def side(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def normalized(self) -> np.ndarray:
        return self.counts / max(self.total, 1)

    def edge_fraction(self) -> float:
        """Share of visits on the bottom row or the right column."""
        edge = self.counts[0, :].sum() + self.counts[1:, -1].sum()
        return float(edge) / max(self.total, 1)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    side: int
    curve: LearningCurve
    visitation: VisitationMap

    @property
    def name(self) -> str:
        return self.config.name

    @property
    def optimal(self) -> Optional[float]:
        if self.config.gamma != 1.0:
            return None
        return optimal_return(GridSpec(side=self.side, horizon=self.config.horizon))


def compute_auc(curve: LearningCurve) -> float:
    """Area under the mean curve: the sum of mean returns over evaluation points."""
    if len(curve.env_steps) == 0:
        raise ValueError("empty curve")
    return float(curve.mean.sum())


def _one_run(config: ExperimentConfig, side: int, run: int):
    agent = config.make_agent(side, run)
    demo = None
    if config.method != "qlearning":
        demo = make_demo(GridSpec(side=side, horizon=config.horizon), config.demo_quality)
    agent.fit(demo)
    return agent.learning_curve_, agent.visitation(config.visitation_episodes)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> Dict[int, ExperimentResult]:
    """Train ``n_runs`` independent learners per grid side and aggregate in run order."""
    results = {}
    for side in config.sides:
        log.info("%s side=%d: %d runs x %d steps", config.name, side, config.n_runs, config.total_steps)
        runs = Parallel(n_jobs=jobs)(delayed(_one_run)(config, side, i) for i in range(config.n_runs))
        curves = np.column_stack([r[0] for r in runs])
        visits = np.sum([r[1] for r in runs], axis=0)
        steps = np.arange(curves.shape[0], dtype=np.int64) * config.eval_interval
        results[side] = ExperimentResult(
            config, side,
            LearningCurve(steps, curves, config.fingerprint()),
            VisitationMap(visits, config.n_runs, config.visitation_episodes),
        )
    return results


def _prepare(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.touch()
        probe.unlink()
    except OSError as e:
        raise OSError(f"cannot write to {out}: {e.strerror or e}") from None
    return out


def write_curve_csv(curve: LearningCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["env_step", "mean_return", "std_return"] + [f"run_{i}" for i in range(curve.n_runs)])
        for step, row, m, s in curve.points():
            w.writerow([step, repr(m), repr(s)] + [repr(float(v)) for v in row])


def read_curve_csv(path) -> LearningCurve:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:3] != ["env_step", "mean_return", "std_return"]:
        raise ValueError(f"{path}: not a learning-curve CSV")
    data = np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))
    return LearningCurve(data[:, 0], data[:, 3:])


def write_visitation_csv(vmap: VisitationMap, path) -> None:
    """Rows run from the top of the grid (y = side - 1) down to y = 0."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + [f"x{x}" for x in range(vmap.side)])
        for y in range(vmap.side - 1, -1, -1):
            w.writerow([y] + [int(v) for v in vmap.counts[y]])


def plot_curves(named_curves, path, optimal: Optional[float] = None, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "demoshape", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, curve in named_curves:
            ax.plot(curve.env_steps, curve.mean, label=name)
            ax.fill_between(curve.env_steps, curve.mean - curve.std, curve.mean + curve.std, alpha=0.2)
        if optimal is not None:
            ax.axhline(optimal, color="black", linestyle="--", linewidth=1, label="optimal")
        ax.set_xlabel("environment steps")
        ax.set_ylabel("average return")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def emit_outputs(results: Sequence[ExperimentResult], out_dir) -> List[Path]:
    """Write one curve CSV and one visitation CSV per result, and one SVG per grid side."""
    if not results:
        raise ValueError("no results to write")
    out = _prepare(out_dir)
    written = []
    by_side: Dict[int, list] = {}
    for res in results:
        stem = f"{res.name}_side{res.side}"
        write_curve_csv(res.curve, out / f"{stem}.csv")
        write_visitation_csv(res.visitation, out / f"{stem}_visitation.csv")
        written += [out / f"{stem}.csv", out / f"{stem}_visitation.csv"]
        by_side.setdefault(res.side, []).append(res)
    for side, group in by_side.items():
        svg = out / f"curves_side{side}.svg"
        plot_curves([(r.name, r.curve) for r in group], svg, group[0].optimal, f"{side}x{side} grid")
        written.append(svg)
    return written
