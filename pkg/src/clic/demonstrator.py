"""Bob: a scripted agent that sets chosen objects to chosen states.

Bob re-plans at every step (closed loop): he heads for the next via-point of
his target object by a Manhattan-greedy move and acts once standing on it.
Sticky actions are the only source of sub-optimality.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .env import Action, Actor, EnvSpec, EnvState, apply_sticky, reset, step

TIMEOUT = 200
N_DEMOS = 25
MASTERY_THRESHOLD = 0.9


class BobMode(enum.Enum):
    IDLE = "idle"
    RANDOM_SUBSET = "random"
    MENTOR = "mentor"


@dataclass(frozen=True)
class BobPolicy:
    mode: BobMode = BobMode.IDLE
    subset: tuple[int, ...] = ()
    mastery_threshold: float = MASTERY_THRESHOLD

    def __post_init__(self):
        if self.mode is BobMode.RANDOM_SUBSET and not self.subset:
            raise ValueError("RANDOM_SUBSET needs a non-empty subset")
        if not 0.0 < self.mastery_threshold <= 1.0:
            raise ValueError("mastery_threshold must lie in (0, 1]")

    @classmethod
    def parse(cls, text: str, n_objects: int) -> "BobPolicy":
        """``idle``, ``all``, ``mentor`` or ``random:1,2,3``."""
        text = text.strip().lower()
        if text == "idle":
            return cls(BobMode.IDLE)
        if text == "mentor":
            return cls(BobMode.MENTOR)
        if text == "all":
            return cls(BobMode.RANDOM_SUBSET, tuple(range(1, n_objects + 1)))
        if text.startswith("random:"):
            ids = tuple(int(t) for t in text.split(":", 1)[1].split(",") if t)
            if not ids or any(not 1 <= i <= n_objects for i in ids):
                raise ValueError(f"bad object subset in {text!r}")
            return cls(BobMode.RANDOM_SUBSET, ids)
        raise ValueError(f"unknown bob policy {text!r}")

    def label(self, n_objects: int) -> str:
        if self.mode is BobMode.RANDOM_SUBSET:
            if self.subset == tuple(range(1, n_objects + 1)):
                return "all"
            return "random:" + ",".join(map(str, self.subset))
        return self.mode.value


@dataclass
class Trajectory:
    target_object: int
    target_value: int
    states: list[EnvState] = field(default_factory=list)   # s_0 .. s_T
    actions: list[int] = field(default_factory=list)       # executed actions a_0 .. a_{T-1}

    def __len__(self) -> int:
        return len(self.actions)

    def transitions(self):
        for t, a in enumerate(self.actions):
            yield self.states[t], a, self.states[t + 1]


@dataclass
class DemoBatch:
    trajectories: list[Trajectory] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.trajectories)


def greedy_action(spec: EnvSpec, state: EnvState, target_object: int,
                  target_value: int) -> int | None:
    """Next optimal action for Bob, or ``None`` once ``o_i >= target_value``."""
    obj = spec.obj(target_object)
    if not 1 <= target_value <= obj.length:
        raise ValueError(f"target value {target_value} outside 1..{obj.length}")
    o = state.objects[target_object - 1]
    if o >= target_value:
        return None
    tx, ty = obj.positions[o]
    x, y = state.agent_pos
    if x < tx:
        return Action.RIGHT
    if x > tx:
        return Action.LEFT
    if y > ty:
        return Action.UP
    if y < ty:
        return Action.DOWN
    return Action.ACT


def demonstrate(spec: EnvSpec, target_object: int, target_value: int,
                rng: np.random.Generator, timeout: int = TIMEOUT) -> Trajectory:
    """One trajectory from reset; ends on completion or after ``timeout`` steps."""
    traj = Trajectory(target_object, target_value)
    s = reset(spec)
    traj.states.append(s)
    last = None
    for _ in range(timeout):
        intended = greedy_action(spec, s, target_object, target_value)
        if intended is None:
            break
        a = apply_sticky(intended, last, spec.sticky_prob, rng)
        s = step(spec, s, a, Actor.BOB)
        traj.actions.append(int(a))
        traj.states.append(s)
        last = a
    return traj


def mentor_select_object(competences: Sequence[float], threshold: float = MASTERY_THRESHOLD) -> int:
    """Lowest-indexed object below ``threshold``; the last object once all are mastered."""
    for i, c in enumerate(competences):
        if c < threshold:
            return i + 1
    return len(competences)


def run_demonstrations(spec: EnvSpec, policy: BobPolicy, competences: Sequence[float],
                       d: int, rng: np.random.Generator, timeout: int = TIMEOUT) -> DemoBatch:
    """``d`` trajectories, each targeting the full state of the chosen object."""
    if d < 1:
        raise ValueError("d must be >= 1")
    batch = DemoBatch()
    if policy.mode is BobMode.IDLE:
        return batch
    mentor_target = None
    if policy.mode is BobMode.MENTOR:
        mentor_target = mentor_select_object(competences, policy.mastery_threshold)
    for _ in range(d):
        if mentor_target is not None:
            i = mentor_target
        else:
            i = policy.subset[int(rng.integers(len(policy.subset)))]
        batch.trajectories.append(demonstrate(spec, i, spec.obj(i).length, rng, timeout))
    return batch
