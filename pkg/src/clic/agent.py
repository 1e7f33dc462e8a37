"""The learner: object-level goal-conditioned Q-learning, imitation of Bob,
and LP-driven choice of what to practice and imitate."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import network as nq
from .curriculum import WINDOW, CompetenceTracker, EPSILON_CLIC, sample_index
from .demonstrator import TIMEOUT, DemoBatch
from .env import Actor, EnvSpec, EnvState, apply_sticky, reset, step
from .network import Batch, QNetwork, encode_rows, input_size

REWARD_TOL = 0.5


@dataclass(frozen=True)
class AgentParams:
    epsilon: float = EPSILON_CLIC
    n_imit: int = 100
    f_demo: int = 5000
    d: int = 25
    window: int = WINDOW
    timeout: int = TIMEOUT
    batch_size: int = 64
    temperature: float = nq.TEMPERATURE
    buffer_size: int = 100_000
    gamma: float = nq.GAMMA
    lr: float = nq.LEARNING_RATE
    margin: float = nq.MARGIN
    target_period: int = nq.TARGET_PERIOD
    hidden: tuple[int, ...] = nq.HIDDEN


@dataclass(frozen=True)
class GoalSpec:
    """Goal value ``g`` and feature weights ``w`` over the object-state slots."""

    g: int
    w: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))
        if any(not 0.0 <= v <= 1.0 for v in self.w):
            raise ValueError("weights must lie in [0, 1]")

    @classmethod
    def one_hot(cls, i: int, g: int, n_objects: int) -> "GoalSpec":
        w = [0.0] * n_objects
        w[i - 1] = 1.0
        return cls(g, tuple(w))

    @property
    def selected(self) -> int:
        """1-based index of the single weighted object."""
        nz = [k for k, v in enumerate(self.w) if v != 0.0]
        if len(nz) != 1 or self.w[nz[0]] != 1.0:
            raise ValueError("only one-hot weight vectors are supported")
        return nz[0] + 1


def self_reward(s_next: EnvState, goal: GoalSpec) -> int:
    """0 when ``|w . (g - o)| <= tol`` on the object-state features, else -1."""
    gap = sum(w * (goal.g - o) for w, o in zip(goal.w, s_next.objects))
    return 0 if abs(gap) <= REWARD_TOL else -1


class Source(enum.IntEnum):
    SELF = 0
    BOB = 1


class ReplayBuffer:
    """FIFO of ``(s, a, s', g, w)`` with ``w`` stored as the selected object index."""

    def __init__(self, capacity: int, n_objects: int):
        width = 2 + n_objects
        self.capacity = capacity
        self.s = np.zeros((capacity, width), dtype=np.int16)
        self.s_next = np.zeros((capacity, width), dtype=np.int16)
        self.a = np.zeros(capacity, dtype=np.int64)
        self.obj = np.zeros(capacity, dtype=np.int64)
        self.g = np.zeros(capacity, dtype=np.int64)
        self.source = np.zeros(capacity, dtype=np.int8)
        self.pos = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, s: EnvState, a: int, s_next: EnvState, obj: int, g: int,
            source: Source = Source.SELF) -> None:
        i = self.pos
        self.s[i] = s.as_row()
        self.s_next[i] = s_next.as_row()
        self.a[i] = a
        self.obj[i] = obj
        self.g[i] = g
        self.source[i] = source
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int) -> np.ndarray:
        return rng.integers(0, self.size, size=batch_size)


def make_batch(spec: EnvSpec, s: np.ndarray, a: np.ndarray, s_next: np.ndarray,
               obj: np.ndarray, g: np.ndarray) -> Batch:
    """Encode raw rows and compute rewards from ``s'`` (reward 0 = goal reached = terminal)."""
    reached = s_next[np.arange(len(a)), 1 + obj] == g
    return Batch(
        x=encode_rows(s, obj, g, spec),
        actions=a,
        rewards=np.where(reached, 0.0, -1.0),
        x_next=encode_rows(s_next, obj, g, spec),
        terminal=reached,
    )


@dataclass(frozen=True)
class Annotated:
    s: EnvState
    a: int
    s_next: EnvState
    obj: int
    g: int
    t: int = 0       # index of this transition in its trajectory
    event: int = 0   # index of the transition on which o_obj became g


def augment_demonstrations(batch: DemoBatch) -> list[Annotated]:
    """Label Bob's transitions with the object changes they led to.

    If ``o_i`` changes to ``v`` on transition ``t`` of a trajectory, every
    transition up to and including ``t`` gets the goal ``(g=v, w=onehot(i))``.
    A transition can carry several goals; each yields one entry.
    """
    out = []
    for traj in batch.trajectories:
        steps = list(traj.transitions())
        for t, (s, _, s_next) in enumerate(steps):
            for i, (before, after) in enumerate(zip(s.objects, s_next.objects)):
                if after != before:
                    out.extend(Annotated(ps, pa, pn, i + 1, after, k, t)
                               for k, (ps, pa, pn) in enumerate(steps[:t + 1]))
    return out


class DemoSet:
    """Annotated Bob transitions grouped by object, cleared after each imitation phase."""

    def __init__(self, n_objects: int):
        self.n_objects = n_objects
        self.items: dict[int, list[Annotated]] = {i: [] for i in range(1, n_objects + 1)}
        self._arrays: dict[int, tuple[np.ndarray, ...]] = {}

    def add(self, items: Iterable[Annotated]) -> None:
        for it in items:
            self.items[it.obj].append(it)
        self._arrays.clear()

    def count(self, i: int) -> int:
        return len(self.items[i])

    def __len__(self) -> int:
        return sum(len(v) for v in self.items.values())

    def clear(self) -> None:
        for v in self.items.values():
            v.clear()
        self._arrays.clear()

    def arrays(self, i: int) -> tuple[np.ndarray, ...]:
        if i not in self._arrays:
            its = self.items[i]
            self._arrays[i] = (
                np.array([it.s.as_row() for it in its], dtype=np.int64),
                np.array([it.a for it in its], dtype=np.int64),
                np.array([it.s_next.as_row() for it in its], dtype=np.int64),
                np.array([it.obj for it in its], dtype=np.int64),
                np.array([it.g for it in its], dtype=np.int64),
            )
        return self._arrays[i]


def imitation_phase(spec: EnvSpec, demos: DemoSet, tracker: CompetenceTracker, net: QNetwork,
                    params: AgentParams, rng: np.random.Generator) -> np.ndarray:
    """``n_imit`` imitation steps; returns the per-object step counts and empties ``demos``.

    A step on an object without demonstrations is counted but makes no update.
    """
    counts = np.zeros(spec.n_objects, dtype=np.int64)
    p = tracker.sampling_distribution(params.epsilon)
    for _ in range(params.n_imit):
        i = sample_index(p, rng)
        counts[i - 1] += 1
        n = demos.count(i)
        if n == 0:
            continue
        s, a, s_next, obj, g = demos.arrays(i)
        idx = rng.integers(0, n, size=params.batch_size)
        batch = make_batch(spec, s[idx], a[idx], s_next[idx], obj[idx], g[idx])
        net.margin_update(batch, params.margin, params.gamma)
    demos.clear()
    return counts


@dataclass
class EpisodeEnd:
    obj: int
    g: int
    success: bool
    length: int


class Learner:
    """Owns the network, replay buffer, tracker and the current episode."""

    def __init__(self, spec: EnvSpec, params: AgentParams, rng: np.random.Generator,
                 net_rng: np.random.Generator | None = None):
        self.spec = spec
        self.params = params
        self.rng = rng
        self.net = QNetwork(input_size(spec.n_objects), params.hidden, rng=net_rng or rng,
                            lr=params.lr)
        self.buffer = ReplayBuffer(params.buffer_size, spec.n_objects)
        self.tracker = CompetenceTracker(spec.n_objects, params.window)
        self.demos = DemoSet(spec.n_objects)
        self.steps = 0
        self.imitation = np.zeros(spec.n_objects, dtype=np.int64)
        self.episodes: list[EpisodeEnd] = []
        self._x = np.zeros(input_size(spec.n_objects))
        self._inv_len = 1.0 / np.asarray(spec.lengths, dtype=float)
        self.new_episode()

    def new_episode(self) -> None:
        self.obj = self.tracker.sample_object(self.params.epsilon, self.rng)
        self.g = int(self.rng.integers(1, self.spec.obj(self.obj).length + 1))
        self.state = reset(self.spec)
        self.t = 0
        self.last: int | None = None
        n = self.spec.n_objects
        x = self._x
        x[2 + n:2 + 2 * n] = 0.0
        x[2 + n + self.obj - 1] = 1.0
        x[-1] = self.g * self._inv_len[self.obj - 1]

    @property
    def goal(self) -> GoalSpec:
        return GoalSpec.one_hot(self.obj, self.g, self.spec.n_objects)

    def _encode_current(self) -> np.ndarray:
        s, n, x = self.state, self.spec.n_objects, self._x
        x[0] = s.agent_pos[0] / self.spec.grid_size
        x[1] = s.agent_pos[1] / self.spec.grid_size
        x[2:2 + n] = s.objects
        x[2:2 + n] *= self._inv_len
        return x

    def act(self) -> int:
        q = self.net.forward(self._encode_current()[None, :])[0]
        return nq.softmax_sample(q, self.params.temperature, self.rng)

    def train_step(self) -> float:
        buf = self.buffer
        idx = buf.sample(self.rng, self.params.batch_size)
        batch = make_batch(self.spec, buf.s[idx], buf.a[idx], buf.s_next[idx], buf.obj[idx],
                           buf.g[idx])
        return self.net.td_update(batch, self.params.gamma)

    def run_learner_step(self) -> EpisodeEnd | None:
        """One environment step, one TD update; returns the episode summary when it ends."""
        a = apply_sticky(self.act(), self.last, self.spec.sticky_prob, self.rng)
        s_next = step(self.spec, self.state, a, Actor.AGENT)
        self.buffer.add(self.state, a, s_next, self.obj, self.g, Source.SELF)
        self.train_step()
        self.steps += 1
        if self.steps % self.params.target_period == 0:
            self.net.sync_target()
        self.t += 1
        self.last = a
        success = s_next.objects[self.obj - 1] == self.g
        if success or self.t >= self.params.timeout:
            end = EpisodeEnd(self.obj, self.g, success, self.t)
            self.tracker.record_outcome(self.obj, success)
            self.new_episode()
            return end
        self.state = s_next
        return None

    def ingest(self, batch: DemoBatch) -> list[Annotated]:
        items = augment_demonstrations(batch)
        for it in items:
            self.buffer.add(it.s, it.a, it.s_next, it.obj, it.g, Source.BOB)
        self.demos.add(items)
        return items

    def imitate(self) -> np.ndarray:
        counts = imitation_phase(self.spec, self.demos, self.tracker, self.net, self.params,
                                 self.rng)
        self.imitation += counts
        return counts

    def greedy_episode(self, obj: int, g: int, rng: np.random.Generator | None = None) -> bool:
        """Evaluation rollout with argmax actions; sticky noise only if ``rng`` is given."""
        goal = GoalSpec.one_hot(obj, g, self.spec.n_objects)
        s, last = reset(self.spec), None
        for _ in range(self.params.timeout):
            x = nq.encode(s, goal, self.spec)
            a = int(self.net.forward(x[None, :])[0].argmax())
            if rng is not None:
                a = apply_sticky(a, last, self.spec.sticky_prob, rng)
            s = step(self.spec, s, a, Actor.AGENT)
            last = a
            if s.objects[obj - 1] == g:
                return True
        return False
