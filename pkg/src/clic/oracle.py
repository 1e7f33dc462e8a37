"""Ground truth for tests: shortest paths, literal reward evaluation, tabular Q-learning."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .env import N_ACTIONS, Actor, EnvSpec, EnvState, apply_sticky, reset, step
from .network import softmax_sample

MAX_TABLE = 10**6


@dataclass(frozen=True)
class SearchNode:
    position: tuple[int, int]
    stage: int


def optimal_steps(spec: EnvSpec, obj: int, target_value: int,
                  actor: Actor = Actor.AGENT) -> int | None:
    """Fewest actions from reset that bring ``o_obj`` to ``target_value``; ``None`` if unreachable.

    Breadth-first over (position, stage of ``obj``), stepping a copy of the
    environment that holds only that object, so other objects cannot matter.
    """
    o = spec.obj(obj)
    if not 0 <= target_value <= o.length:
        raise ValueError(f"target value {target_value} outside 0..{o.length}")
    if target_value == 0:
        return 0
    if not o.controllable_by(actor):
        return None
    single = spec.replace(objects=(o,))
    start = SearchNode(spec.center, 0)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        s = EnvState(node.position, (node.stage,))
        for a in range(N_ACTIONS):
            s2 = step(single, s, a, actor)
            nxt = SearchNode(s2.agent_pos, s2.objects[0])
            if nxt in dist:
                continue
            dist[nxt] = dist[node] + 1
            if nxt.stage == target_value:
                return dist[nxt]
            queue.append(nxt)
    return None


def optimal_steps_full(spec: EnvSpec, obj: int, target_value: int,
                       actor: Actor = Actor.AGENT, max_states: int = 2_000_000) -> int | None:
    """Same question answered by BFS over complete environment states."""
    start = reset(spec)
    if start.objects[obj - 1] == target_value:
        return 0
    dist = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for a in range(N_ACTIONS):
            s2 = step(spec, s, a, actor)
            if s2 in dist:
                continue
            dist[s2] = dist[s] + 1
            if s2.objects[obj - 1] == target_value:
                return dist[s2]
            if len(dist) > max_states:
                raise RuntimeError("state space exceeds max_states")
            queue.append(s2)
    return None


def literal_reward(state_vector: Sequence[float], goal_vector: Sequence[float],
                   weights: Sequence[float], eps: float = 0.5) -> int:
    """``0 if |w . (g - s)| <= eps else -1`` over full state vectors ``(x, y, o_1..o_n)``."""
    s = np.asarray(state_vector, dtype=float)
    g = np.asarray(goal_vector, dtype=float)
    w = np.asarray(weights, dtype=float)
    return 0 if abs(float(w @ (g - s))) <= eps else -1


@dataclass
class TabularResult:
    success_rate: float
    greedy_steps: int | None
    q: np.ndarray


def tabular_reference_run(spec: EnvSpec, obj: int, g: int, episodes: int, seed: int,
                          lr: float = 0.5, gamma: float = 0.9, temperature: float = 1.0,
                          timeout: int = 200, eval_episodes: int = 100) -> TabularResult:
    """Tabular Q-learning with the learner's reward, softmax and episode rules.

    The table is indexed by the exact state ``(x, y, o_1..o_n)``. The reported
    success rate is that of greedy rollouts; ``greedy_steps`` is the length of
    a sticky-free greedy rollout (``None`` if it times out).
    """
    n = spec.grid_size
    dims = (n, n, *[l + 1 for l in spec.lengths], N_ACTIONS)
    if int(np.prod(dims)) > MAX_TABLE:
        raise ValueError(f"table of {int(np.prod(dims))} entries exceeds {MAX_TABLE}")
    q = np.zeros(dims)
    rng = np.random.default_rng(seed)

    def key(s: EnvState):
        return (s.agent_pos[0], s.agent_pos[1], *s.objects)

    def done(s: EnvState) -> bool:
        return s.objects[obj - 1] == g

    if done(reset(spec)):
        return TabularResult(1.0, 0, q)

    for _ in range(episodes):
        s, last = reset(spec), None
        for _ in range(timeout):
            a = softmax_sample(q[key(s)], temperature, rng)
            a = apply_sticky(a, last, spec.sticky_prob, rng)
            s2 = step(spec, s, a, Actor.AGENT)
            if done(s2):
                target = 0.0
            else:
                target = -1.0 + gamma * q[key(s2)].max()
            q[key(s)][a] += lr * (target - q[key(s)][a])
            s, last = s2, a
            if done(s):
                break

    def greedy(rollout_rng) -> int | None:
        s, last = reset(spec), None
        for t in range(1, timeout + 1):
            a = int(q[key(s)].argmax())
            if rollout_rng is not None:
                a = apply_sticky(a, last, spec.sticky_prob, rollout_rng)
            s, last = step(spec, s, a, Actor.AGENT), a
            if done(s):
                return t
        return None

    eval_rng = np.random.default_rng(seed + 1)
    wins = sum(greedy(eval_rng) is not None for _ in range(eval_episodes))
    return TabularResult(wins / eval_episodes, greedy(None), q)
