"""Demonstration states as goals: shaped, goal-augmented tabular Q-learning on gridworlds."""
from .baselines import ManhattanParams, SBSParams, manhattan_reward, sbs_potential, sbs_reward
from .demos import Demonstration, Quality, demo_goal_at, load_demo, make_demo, save_demo
from .dshape import AblationFlags, PotentialFn, inference_action, relabel, rollout_step, shaped_reward, shaping_term
from .env import Action, GridSpec, GridState, StepOutcome, optimal_return, reset, step
from .estimators import DShapeAgent, ManhattanAgent, QLearningAgent, RIDMAgent, SBSAgent
from .harness import ExperimentConfig, LearningCurve, VisitationMap, compute_auc, emit_outputs, run_experiment
from .qcore import LearnerParams, QKey, QTable, ReplayBuffer, Transition, q_update, select_action, train_step

__version__ = "0.1.0"

__all__ = [
    "AblationFlags", "Action", "DShapeAgent", "Demonstration", "ExperimentConfig", "GridSpec", "GridState",
    "LearnerParams", "LearningCurve", "ManhattanAgent", "ManhattanParams", "PotentialFn", "QKey",
    "QLearningAgent", "QTable", "Quality", "RIDMAgent", "ReplayBuffer", "SBSAgent", "SBSParams",
    "StepOutcome", "Transition", "VisitationMap", "compute_auc", "demo_goal_at", "emit_outputs",
    "inference_action", "load_demo", "make_demo", "manhattan_reward", "optimal_return", "q_update",
    "relabel", "reset", "rollout_step", "run_experiment", "save_demo", "sbs_potential", "sbs_reward",
    "select_action", "shaped_reward", "shaping_term", "step", "train_step",
]
