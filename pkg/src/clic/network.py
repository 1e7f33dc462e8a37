"""Goal-conditioned Q-network, written directly in numpy.

A 2x32 ReLU MLP mapping an encoded ``(state, w, g)`` vector to five action
values, with a hard-synced target copy and an Adam optimizer. Parameters live
in one flat float64 vector; per-layer weights are reshaped views into it so
the optimizer step is a handful of vector operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .env import N_ACTIONS, EnvSpec, EnvState

if TYPE_CHECKING:
    from .agent import GoalSpec

CHECKPOINT_VERSION = 1
HIDDEN = (32, 32)
GAMMA = 0.99
LEARNING_RATE = 1e-3
MARGIN = 1.0
TARGET_PERIOD = 1000
TEMPERATURE = 1.0


def input_size(n_objects: int) -> int:
    return 2 + 2 * n_objects + 1


def encode(state: EnvState, goal: "GoalSpec", spec: EnvSpec) -> np.ndarray:
    """``(x/N, y/N, o_1/l_1 .. o_n/l_n, w_1 .. w_n, g/l_sel)``."""
    sel = goal.selected  # raises for non one-hot w
    row = np.array([state.as_row()], dtype=np.int64)
    return encode_rows(row, np.array([sel]), np.array([goal.g]), spec)[0]


def encode_rows(rows: np.ndarray, obj: np.ndarray, g: np.ndarray, spec: EnvSpec,
                out: np.ndarray | None = None) -> np.ndarray:
    """Vectorised :func:`encode` over raw state rows ``(x, y, o_1..o_n)``.

    ``obj`` holds 1-based selected-object indices, ``g`` the goal values.
    """
    n = spec.n_objects
    lengths = np.asarray(spec.lengths, dtype=float)
    b = rows.shape[0]
    if out is None:
        out = np.empty((b, input_size(n)))
    out[:, :2] = rows[:, :2] / spec.grid_size
    out[:, 2:2 + n] = rows[:, 2:] / lengths
    out[:, 2 + n:2 + 2 * n] = 0.0
    sel = obj - 1
    out[np.arange(b), 2 + n + sel] = 1.0
    out[:, -1] = g / lengths[sel]
    return out


@dataclass
class Batch:
    """Encoded transitions. ``terminal`` marks goal-reaching (reward 0) transitions."""

    x: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    x_next: np.ndarray
    terminal: np.ndarray

    def __len__(self) -> int:
        return len(self.actions)


class QNetwork:
    def __init__(self, n_inputs: int, hidden: Sequence[int] = HIDDEN, n_actions: int = N_ACTIONS,
                 rng: np.random.Generator | None = None, lr: float = LEARNING_RATE,
                 betas: tuple[float, float] = (0.9, 0.999), adam_eps: float = 1e-8,
                 zero: bool = False):
        self.sizes = (n_inputs, *hidden, n_actions)
        self.shapes = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            self.shapes += [(fan_in, fan_out), (fan_out,)]
        self.n_params = sum(int(np.prod(s)) for s in self.shapes)
        self.params = np.zeros(self.n_params)
        self.layers = self._views(self.params)
        if not zero:
            rng = rng if rng is not None else np.random.default_rng()
            # uniform fan-in scaling for weights and biases alike
            for k, view in enumerate(self.layers):
                fan_in = self.shapes[k - (k % 2)][0]
                bound = 1.0 / np.sqrt(fan_in)
                view[...] = rng.uniform(-bound, bound, size=view.shape)
        self.target = self.params.copy()
        self.target_layers = self._views(self.target)
        self.grad = np.zeros(self.n_params)
        self.grad_layers = self._views(self.grad)

        self.lr = lr
        self.beta1, self.beta2 = betas
        self.adam_eps = adam_eps
        self.m = np.zeros(self.n_params)
        self.v = np.zeros(self.n_params)
        self.updates = 0

    def _views(self, flat: np.ndarray) -> list[np.ndarray]:
        views, start = [], 0
        for shape in self.shapes:
            size = int(np.prod(shape))
            views.append(flat[start:start + size].reshape(shape))
            start += size
        return views

    # -- evaluation -----------------------------------------------------------

    def _activations(self, x: np.ndarray, layers: list[np.ndarray]) -> list[np.ndarray]:
        acts = [x]
        h = x
        n_layers = len(layers) // 2
        for k in range(n_layers):
            h = h @ layers[2 * k] + layers[2 * k + 1]
            if k < n_layers - 1:
                np.maximum(h, 0.0, out=h)
            acts.append(h)
        return acts

    def forward(self, x: np.ndarray, use_target: bool = False) -> np.ndarray:
        layers = self.target_layers if use_target else self.layers
        return self._activations(np.asarray(x, dtype=float), layers)[-1]

    def sync_target(self) -> None:
        self.target[...] = self.params

    # -- losses ---------------------------------------------------------------

    def td_targets(self, batch: Batch, gamma: float) -> np.ndarray:
        """Double-DQN targets: online argmax at s', evaluated by the target net."""
        a_star = self.forward(batch.x_next).argmax(axis=1)
        boot = self.forward(batch.x_next, use_target=True)[np.arange(len(batch)), a_star]
        return batch.rewards + gamma * np.where(batch.terminal, 0.0, boot)

    def loss_and_grad(self, batch: Batch, gamma: float = GAMMA,
                      margin: float | None = None) -> tuple[float, np.ndarray]:
        """Mean double-DQN squared error, plus the mean large-margin term when
        ``margin`` is given. Gradients flow through the online network only;
        the result is written into ``self.grad`` and returned."""
        b = len(batch)
        if b == 0:
            raise ValueError("empty batch")
        y = self.td_targets(batch, gamma)
        acts = self._activations(batch.x, self.layers)
        q = acts[-1]
        rows = np.arange(b)
        delta = q[rows, batch.actions] - y
        loss = float(np.mean(delta ** 2))
        dq = np.zeros_like(q)
        dq[rows, batch.actions] = 2.0 * delta / b
        if margin is not None:
            bonus = np.full_like(q, margin)
            bonus[rows, batch.actions] = 0.0
            a_max = (q + bonus).argmax(axis=1)
            j_i = (q + bonus)[rows, a_max] - q[rows, batch.actions]
            loss += float(np.mean(j_i))
            np.add.at(dq, (rows, a_max), 1.0 / b)
            np.add.at(dq, (rows, batch.actions), -1.0 / b)
        self._backward(acts, dq)
        return loss, self.grad

    def _backward(self, acts: list[np.ndarray], dq: np.ndarray) -> None:
        g = self.grad_layers
        n_layers = len(self.layers) // 2
        delta = dq
        for k in range(n_layers - 1, -1, -1):
            h_in = acts[k]
            np.matmul(h_in.T, delta, out=g[2 * k])
            np.sum(delta, axis=0, out=g[2 * k + 1])
            if k > 0:
                delta = delta @ self.layers[2 * k].T
                delta *= h_in > 0

    def adam_step(self) -> None:
        self.updates += 1
        g = self.grad
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * g
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * g * g
        step = self.lr * np.sqrt(1.0 - self.beta2 ** self.updates) / (1.0 - self.beta1 ** self.updates)
        self.params -= step * self.m / (np.sqrt(self.v) + self.adam_eps)

    def td_update(self, batch: Batch, gamma: float = GAMMA) -> float:
        loss, _ = self.loss_and_grad(batch, gamma)
        self.adam_step()
        return loss

    def margin_update(self, batch: Batch, margin: float = MARGIN, gamma: float = GAMMA) -> float:
        loss, _ = self.loss_and_grad(batch, gamma, margin=margin)
        self.adam_step()
        return loss

    # -- checkpoints ----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as f:
            np.savez(f, version=CHECKPOINT_VERSION, sizes=np.array(self.sizes),
                     params=self.params, target=self.target, m=self.m, v=self.v,
                     updates=self.updates)

    @classmethod
    def load(cls, path: str | Path) -> "QNetwork":
        with np.load(path) as data:
            version = int(data["version"])
            if version != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {version}")
            sizes = [int(s) for s in data["sizes"]]
            net = cls(sizes[0], sizes[1:-1], sizes[-1], zero=True)
            if data["params"].shape != net.params.shape:
                raise ValueError("checkpoint parameters do not match the declared layer sizes")
            net.params[...] = data["params"]
            net.target[...] = data["target"]
            net.m[...] = data["m"]
            net.v[...] = data["v"]
            net.updates = int(data["updates"])
        return net


def softmax_probs(values: np.ndarray, temperature: float = TEMPERATURE) -> np.ndarray:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    z = (np.asarray(values, dtype=float) - np.max(values)) / temperature
    p = np.exp(z)
    return p / p.sum()


def softmax_sample(values: np.ndarray, temperature: float, rng: np.random.Generator) -> int:
    p = softmax_probs(values, temperature)
    idx = int(np.searchsorted(np.cumsum(p), rng.random(), side="right"))
    return min(idx, len(p) - 1)
