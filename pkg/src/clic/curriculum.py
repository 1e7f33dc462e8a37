"""Competence, absolute learning progress and the LP-proportional object sampler."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

WINDOW = 100
EPSILON_CLIC = 0.2
EPSILON_RND = 1.0


class CompetenceTracker:
    """Per-object sliding history of binary episode outcomes.

    Each object keeps its last ``2 * window`` outcomes: the newest ``window``
    give the current competence, the ``window`` before them the competence one
    window earlier.
    """

    def __init__(self, n_objects: int, window: int = WINDOW):
        if n_objects < 1 or window < 1:
            raise ValueError("need at least one object and a positive window")
        self.n_objects = n_objects
        self.window = window
        self.history: list[deque[int]] = [deque(maxlen=2 * window) for _ in range(n_objects)]
        self.episodes = 0

    def _hist(self, i: int) -> deque[int]:
        if not 1 <= i <= self.n_objects:
            raise IndexError(f"object index {i} out of range 1..{self.n_objects}")
        return self.history[i - 1]

    def record_outcome(self, i: int, success: bool) -> None:
        self._hist(i).append(1 if success else 0)
        self.episodes += 1

    def competence(self, i: int) -> float:
        h = self._hist(i)
        n = min(len(h), self.window)
        if n == 0:
            return 0.0
        return sum(list(h)[-n:]) / n

    def learning_progress(self, i: int) -> float:
        # Below a full 2*window history, compare the newest half of what exists
        # to the half before it (oldest outcome dropped when the count is odd).
        h = list(self._hist(i))
        half = min(len(h) // 2, self.window)
        if half == 0:
            return 0.0
        new = sum(h[-half:])
        old = sum(h[-2 * half:-half])
        return abs(new - old) / half

    def competences(self) -> np.ndarray:
        return np.array([self.competence(i) for i in range(1, self.n_objects + 1)])

    def learning_progresses(self) -> np.ndarray:
        return np.array([self.learning_progress(i) for i in range(1, self.n_objects + 1)])

    def sampling_distribution(self, epsilon: float) -> np.ndarray:
        return lp_distribution(self.learning_progresses(), epsilon)

    def sample_object(self, epsilon: float, rng: np.random.Generator) -> int:
        """1-based object index drawn from :meth:`sampling_distribution`."""
        return sample_index(self.sampling_distribution(epsilon), rng)


def lp_distribution(lp: np.ndarray, epsilon: float) -> np.ndarray:
    """``eps / N + (1 - eps) * LP_i / sum(LP)``, uniform proportional term when all LP are 0."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    lp = np.asarray(lp, dtype=float)
    n = lp.size
    total = lp.sum()
    prop = lp / total if total > 0 else np.full(n, 1.0 / n)
    return epsilon / n + (1.0 - epsilon) * prop


def sample_index(p: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(idx, len(p) - 1) + 1


@dataclass(frozen=True)
class SamplingConfig:
    epsilon: float = EPSILON_CLIC

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
