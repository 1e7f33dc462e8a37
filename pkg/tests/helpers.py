"""Independent oracles shared by unit and acceptance tests."""
import numpy as np

from clic.network import Batch, QNetwork


def reference_q(flat, sizes, x):
    """Plain re-implementation of the MLP forward pass from a flat parameter vector."""
    h, start = np.asarray(x, dtype=float), 0
    n_layers = len(sizes) - 1
    for k in range(n_layers):
        fi, fo = sizes[k], sizes[k + 1]
        W = flat[start:start + fi * fo].reshape(fi, fo)
        start += fi * fo
        b = flat[start:start + fo]
        start += fo
        h = h @ W + b
        if k < n_layers - 1:
            h = np.where(h > 0, h, 0.0)
    return h


def reference_loss(flat, sizes, batch, y, margin=None):
    """Mean squared TD error against fixed targets ``y``, plus the mean margin term."""
    q = reference_q(flat, sizes, batch.x)
    rows = np.arange(len(batch))
    loss = np.mean((q[rows, batch.actions] - y) ** 2)
    if margin is not None:
        bonus = np.where(np.arange(q.shape[1])[None, :] == batch.actions[:, None], 0.0, margin)
        loss += np.mean((q + bonus).max(axis=1) - q[rows, batch.actions])
    return loss


def fd_grad(f, flat, h=1e-5):
    g = np.zeros_like(flat)
    for i in range(flat.size):
        p, m = flat.copy(), flat.copy()
        p[i] += h
        m[i] -= h
        g[i] = (f(p) - f(m)) / (2 * h)
    return g


def random_fixture(seed, n_in=7, hidden=(6, 5), batch=9):
    rng = np.random.default_rng(seed)
    net = QNetwork(n_in, hidden, rng=rng)
    net.target[...] = net.params + rng.normal(0, 0.3, net.n_params)
    b = Batch(
        x=rng.uniform(0, 1, (batch, n_in)),
        actions=rng.integers(0, 5, batch),
        rewards=np.where(rng.random(batch) < 0.3, 0.0, -1.0),
        x_next=rng.uniform(0, 1, (batch, n_in)),
        terminal=np.zeros(batch, dtype=bool),
    )
    b.terminal = b.rewards == 0.0
    return net, b


def relative_error(a, b):
    denom = np.linalg.norm(a) + np.linalg.norm(b)
    return 0.0 if denom == 0 else np.linalg.norm(a - b) / denom


def gradient_check(seed, margin=None, gamma=0.9):
    """Relative error between analytic and central-difference gradients."""
    net, batch = random_fixture(seed)
    y = net.td_targets(batch, gamma)
    _, grad = net.loss_and_grad(batch, gamma, margin=margin)
    num = fd_grad(lambda p: reference_loss(p, net.sizes, batch, y, margin), net.params.copy())
    return relative_error(grad.copy(), num)
