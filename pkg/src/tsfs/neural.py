"""Minimal feed-forward networks trained with Adam.

Every network here is a stack of dense layers with ReLU between them and an
identity or softmax output. Losses follow one convention: the squared error is
``||out - Y||_F^2 / (2 n)`` and the cross-entropy is averaged over samples,
so gradients are already divided by the batch size.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError
from .linalg import as_matrix

__all__ = [
    "DenseNet",
    "AdamState",
    "TrainConfig",
    "forward",
    "backward",
    "adam_step",
    "train",
    "objective",
    "check_gradients",
    "one_hot",
    "save_net",
    "load_net",
]

_version_counter = itertools.count()


class DenseNet:
    """Dense ReLU network.

    Parameters
    ----------
    sizes : sequence of int
        Layer widths from input to output, e.g. ``(d, h, l)``.
    output : {"identity", "softmax"}
    seed : int
        Seeds the Glorot-uniform weight initialisation; biases start at 0.
    """

    def __init__(self, sizes, output="identity", seed=0):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise InvalidInputError(f"invalid layer sizes {sizes}")
        if output not in ("identity", "softmax"):
            raise InvalidInputError(f"unknown output activation {output!r}")
        rng = np.random.default_rng(seed)
        self.output = output
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.touch()

    @classmethod
    def from_params(cls, weights, biases, output="identity"):
        net = cls.__new__(cls)
        net.output = output
        net.weights = [np.array(W, dtype=np.float64) for W in weights]
        net.biases = [np.array(b, dtype=np.float64).reshape(-1) for b in biases]
        for W, b, W_next in zip(net.weights, net.biases, net.weights[1:] + [None]):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise InvalidInputError("bias length must match weight columns")
            if W_next is not None and W_next.shape[0] != W.shape[1]:
                raise InvalidInputError("adjacent layer sizes do not chain")
        net.touch()
        return net

    @property
    def sizes(self):
        return (self.weights[0].shape[0],) + tuple(W.shape[1] for W in self.weights)

    def params(self):
        """Parameters layer by layer from the input side, weights before biases."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def copy(self):
        return DenseNet.from_params([W.copy() for W in self.weights],
                                    [b.copy() for b in self.biases], self.output)

    def touch(self):
        """Mark parameters as changed so older forward caches go stale."""
        self.version = next(_version_counter)

    def predict(self, X):
        return forward(self, X)[0]

    def hidden(self, X, layer=-1):
        """Post-ReLU activations of a hidden layer (default: the last one)."""
        _, cache = forward(self, X)
        return cache.post[1:][layer]

    def __repr__(self):
        return f"DenseNet(sizes={self.sizes}, output={self.output!r})"


@dataclass
class _Cache:
    version: int
    post: list  # layer inputs: X, then each hidden activation
    pre: list  # pre-activations of every layer
    out: np.ndarray


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def forward(net, X):
    """Run ``X`` through the network, keeping activations for :func:`backward`."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.weights[0].shape[0]:
        raise InvalidInputError(
            f"input has shape {X.shape}, network expects {net.weights[0].shape[0]} columns")
    post = [X]
    pre = []
    A = X
    last = len(net.weights) - 1
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        Z = A @ W + b
        pre.append(Z)
        if i < last:
            A = np.maximum(Z, 0.0)
            post.append(A)
    out = _softmax(Z) if net.output == "softmax" else Z
    return out, _Cache(net.version, post, pre, out)


def backward(net, cache, loss_grad, wrt_logits=False):
    """Gradients of the loss with respect to every parameter.

    ``loss_grad`` is the loss derivative at the network output. For softmax
    networks pass ``wrt_logits=True`` with the derivative at the pre-softmax
    logits instead (the usual ``(P - T) / n`` for cross-entropy).

    Returns a list ordered like :meth:`DenseNet.params`.
    """
    if cache.version != net.version:
        raise InvalidInputError("forward cache is stale; parameters changed since forward()")
    G = np.asarray(loss_grad, dtype=np.float64)
    if G.shape != cache.out.shape:
        raise InvalidInputError(f"loss gradient has shape {G.shape}, output is {cache.out.shape}")
    if net.output == "softmax" and not wrt_logits:
        P = cache.out
        G = P * (G - np.sum(G * P, axis=1, keepdims=True))
    grads = [None] * (2 * len(net.weights))
    for i in range(len(net.weights) - 1, -1, -1):
        grads[2 * i] = cache.post[i].T @ G
        grads[2 * i + 1] = G.sum(axis=0)
        if i:
            G = (G @ net.weights[i].T) * (cache.pre[i - 1] > 0)
    return grads


@dataclass
class AdamState:
    """First/second moment estimates for every parameter array."""

    m: list
    v: list
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params],
                   lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(state, params, grads):
    """One Adam update; ``params`` are modified in place and returned."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise InvalidInputError("params, grads and optimiser state disagree in length")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass
class TrainConfig:
    epochs: int = 500
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be >= 0")


def one_hot(labels, n_classes=None):
    labels = np.asarray(labels, dtype=np.int64)
    c = int(labels.max()) + 1 if n_classes is None else n_classes
    T = np.zeros((labels.size, c))
    T[np.arange(labels.size), labels] = 1.0
    return T


def _data_term(net, out, Y, loss):
    """Loss value and its gradient (at logits for softmax nets)."""
    n = out.shape[0]
    if loss == "squared_error":
        R = out - Y
        return float(np.sum(R * R)) / (2.0 * n), R / n
    if loss == "softmax_ce":
        if net.output != "softmax":
            raise InvalidInputError("softmax_ce needs a softmax output layer")
        value = -float(np.sum(Y * np.log(np.clip(out, 1e-300, None)))) / n
        return value, (out - Y) / n
    raise InvalidInputError(f"unknown loss {loss!r}")


def _loss_and_grads(net, X, Y, loss, regularizer):
    out, cache = forward(net, X)
    value, G = _data_term(net, out, Y, loss)
    grads = backward(net, cache, G, wrt_logits=(loss == "softmax_ce"))
    if regularizer is not None:
        r_value, r_grads = regularizer(net)
        value += r_value
        for i, g in enumerate(r_grads):
            if g is not None:
                grads[2 * i] = grads[2 * i] + g
    return value, grads


def objective(net, X, Y, loss, regularizer=None):
    """Data term plus regulariser value on the full data set."""
    out, _ = forward(net, X)
    value, _ = _data_term(net, out, np.asarray(Y, dtype=np.float64), loss)
    if regularizer is not None:
        value += regularizer(net)[0]
    return value


def train(net, X, Y, loss="squared_error", regularizer=None, cfg=None, state=None):
    """Mini-batch Adam training.

    Parameters
    ----------
    net : DenseNet
        Left untouched; a trained copy is returned.
    X, Y : ndarray
        Inputs and targets with the same row count (one-hot targets for
        ``softmax_ce``).
    regularizer : callable, optional
        ``regularizer(net) -> (value, per_layer_weight_grads)`` where the grad
        list holds one array (or ``None``) per layer. Biases are never
        regularised.

    Returns
    -------
    net : DenseNet
    history : list of float
        Full-data objective after every epoch.
    """
    cfg = cfg or TrainConfig()
    X = as_matrix(X)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != X.shape[0]:
        raise InvalidInputError(f"X has {X.shape[0]} rows but targets have {Y.shape[0]}")
    net = net.copy()
    params = net.params()
    if state is None:
        state = AdamState.for_params(params, lr=cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    n = X.shape[0]
    history = []
    last_finite = None
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            value, grads = _loss_and_grads(net, X[idx], Y[idx], loss, regularizer)
            if not np.isfinite(value) or not all(np.all(np.isfinite(g)) for g in grads):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch {b}; last finite loss {last_finite}")
            last_finite = value
            adam_step(state, params, grads)
            net.touch()
        history.append(objective(net, X, Y, loss, regularizer))
        if not np.isfinite(history[-1]):
            raise NumericalError(
                f"non-finite epoch objective at epoch {epoch}; last finite loss {last_finite}")
    return net, history


def check_gradients(net, X, Y, loss="squared_error", regularizer=None, epsilon=1e-5):
    """Largest relative error between backprop and central differences.

    The relative error of one entry is ``|a - f| / max(|a|, |f|, 1e-8)``.
    """
    X = as_matrix(X)
    Y = np.asarray(Y, dtype=np.float64)
    net = net.copy()
    _, analytic = _loss_and_grads(net, X, Y, loss, regularizer)
    worst = 0.0
    for p, a in zip(net.params(), analytic):
        flat = p.reshape(-1)
        a = a.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            net.touch()
            f_plus = objective(net, X, Y, loss, regularizer)
            flat[j] = orig - epsilon
            net.touch()
            f_minus = objective(net, X, Y, loss, regularizer)
            flat[j] = orig
            net.touch()
            fd = (f_plus - f_minus) / (2.0 * epsilon)
            err = abs(a[j] - fd) / max(abs(a[j]), abs(fd), 1e-8)
            worst = max(worst, err)
    return worst


_MAGIC = "tsfs-densenet 1"


def save_net(net, path):
    """Write a network as one ASCII header line then raw little-endian float64.

    The header lists the layer sizes and the output activation; parameters
    follow in :meth:`DenseNet.params` order, each matrix row-major.
    """
    header = f"{_MAGIC} sizes={','.join(map(str, net.sizes))} output={net.output}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for p in net.params():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_net(path):
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if " ".join(header[:2]) != _MAGIC:
            raise InvalidInputError(f"{path} is not a saved DenseNet")
        fields = dict(item.split("=", 1) for item in header[2:])
        sizes = [int(s) for s in fields["sizes"].split(",")]
        flat = np.frombuffer(fh.read(), dtype="<f8")
    weights, biases, pos = [], [], 0
    for a, b in zip(sizes[:-1], sizes[1:]):
        weights.append(flat[pos:pos + a * b].reshape(a, b))
        pos += a * b
        biases.append(flat[pos:pos + b])
        pos += b
    if pos != flat.size:
        raise InvalidInputError(f"{path} holds {flat.size} values, header implies {pos}")
    return DenseNet.from_params(weights, biases, fields["output"])
