"""Curriculum learning and imitation for object control in a non-rewarding gridworld."""
from .env import Action, Actor, EnvSpec, EnvState, ObjectSpec, build_environment, reset, step
from .agent import AgentParams, GoalSpec, Learner, self_reward
from .demonstrator import BobMode, BobPolicy
from .harness import RunConfig, run_experiment, run_suite

__all__ = [
    "Action", "Actor", "EnvSpec", "EnvState", "ObjectSpec", "build_environment", "reset", "step",
    "AgentParams", "GoalSpec", "Learner", "self_reward", "BobMode", "BobPolicy",
    "RunConfig", "run_experiment", "run_suite",
]
