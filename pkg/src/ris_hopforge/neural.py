"""Small dense-network stack with hand-written backpropagation.

Batches are row-major: ``x`` has shape (batch, features). A hidden block is
``dense -> [batchnorm] -> activation``; the output block is
``dense -> output activation``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError

CHECKPOINT_VERSION = 1


class StaleCacheError(RuntimeError):
    """backward() was handed a cache from another network or an older parameter state."""


def _relu(z):
    return np.maximum(z, 0.0)


def _tanh(z):
    return np.tanh(z)


def _identity(z):
    return z


_ACTIVATIONS = {
    "relu": (_relu, lambda z, a: (z > 0).astype(z.dtype)),
    "tanh": (_tanh, lambda z, a: 1.0 - a * a),
    "identity": (_identity, lambda z, a: np.ones_like(z)),
}


@dataclass
class Dense:
    weight: np.ndarray  # out x in
    bias: np.ndarray

    @property
    def shape(self):
        return self.weight.shape


@dataclass
class BatchNorm:
    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5

    @classmethod
    def create(cls, width, momentum=0.1, eps=1e-5):
        return cls(np.ones(width), np.zeros(width), np.zeros(width), np.ones(width),
                   momentum, eps)


class DenseNet:
    """Fully connected network with optional batchnorm on every hidden block.

    Parameters
    ----------
    sizes : sequence of int
        Layer widths ``[input, hidden_1, ..., hidden_n, output]``.
    hidden_activation : {"relu", "tanh"}
    output_activation : {"tanh", "identity"}
    batchnorm : bool
        Insert a batchnorm layer between each hidden dense map and its
        activation.
    rng : numpy Generator, optional
        Source for the weight init. Required unless ``init="zeros"``.
    init : {"fan_in", "zeros"}
        ``fan_in`` draws U(-l, l) with l = gain * sqrt(3 / fan_in), gain
        sqrt(2) ahead of ReLU and 1 otherwise. Biases start at zero.
    """

    def __init__(self, sizes: Sequence[int], *, hidden_activation="relu",
                 output_activation="identity", batchnorm=True,
                 rng: np.random.Generator | None = None, init="fan_in",
                 bn_momentum=0.1, bn_eps=1e-5):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise InvalidArgumentError(f"invalid layer sizes {sizes}")
        if hidden_activation not in _ACTIVATIONS or output_activation not in _ACTIVATIONS:
            raise InvalidArgumentError(
                f"unknown activation {hidden_activation!r}/{output_activation!r}")
        if init not in ("fan_in", "zeros"):
            raise InvalidArgumentError(f"unknown init {init!r}")
        if init == "fan_in" and rng is None:
            raise InvalidArgumentError("fan_in init needs a generator")
        self.sizes = sizes
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        self.layers: list[Dense] = []
        self.norms: list[BatchNorm | None] = []
        self.version = 0
        n_layers = len(sizes) - 1
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            hidden = i < n_layers - 1
            if init == "zeros":
                W = np.zeros((fan_out, fan_in))
            else:
                gain = math.sqrt(2.0) if hidden and hidden_activation == "relu" else 1.0
                limit = gain * math.sqrt(3.0 / fan_in)
                W = rng.uniform(-limit, limit, (fan_out, fan_in))
            self.layers.append(Dense(W, np.zeros(fan_out)))
            if hidden:
                self.norms.append(BatchNorm.create(fan_out, bn_momentum, bn_eps)
                                  if batchnorm else None)

    @property
    def input_width(self) -> int:
        return self.sizes[0]

    @property
    def output_width(self) -> int:
        return self.sizes[-1]

    def params(self) -> list[np.ndarray]:
        """Trainable tensors, in the order ``backward`` reports gradients."""
        out = []
        for layer in self.layers:
            out += [layer.weight, layer.bias]
        for bn in self.norms:
            if bn is not None:
                out += [bn.gamma, bn.beta]
        return out

    def buffers(self) -> list[np.ndarray]:
        out = []
        for bn in self.norms:
            if bn is not None:
                out += [bn.running_mean, bn.running_var]
        return out

    def tensors(self) -> list[np.ndarray]:
        return self.params() + self.buffers()

    def touch(self):
        """Mark parameters as modified; invalidates outstanding caches."""
        self.version += 1

    def copy(self) -> "DenseNet":
        return copy.deepcopy(self)

    def __call__(self, x, mode="eval"):
        return forward(self, x, mode, update_stats=False)[0]


def forward(net: DenseNet, batch: np.ndarray, mode: str = "train", *,
            update_stats: bool = True):
    """Run ``net`` on a (batch, features) array.

    Train mode normalizes with batch statistics and, when ``update_stats``,
    moves the running statistics by ``momentum``. Eval mode uses the running
    statistics, so each output row depends only on its input row.

    Returns
    -------
    outputs : ndarray
    cache : dict
        Intermediates consumed by :func:`backward`.
    """
    if mode not in ("train", "eval"):
        raise InvalidArgumentError(f"mode must be 'train' or 'eval', got {mode!r}")
    x = np.asarray(batch, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_width:
        raise DimensionMismatchError(
            f"input has shape {x.shape}, expected (batch, {net.input_width})")
    if mode == "train" and x.shape[0] < 2 and any(bn is not None for bn in net.norms):
        raise InvalidArgumentError("train-mode batchnorm needs a batch of at least 2")
    steps = []
    a = x
    n_layers = len(net.layers)
    for i, layer in enumerate(net.layers):
        inp = a
        z = inp @ layer.weight.T + layer.bias
        bn_cache = None
        if i < n_layers - 1:
            bn = net.norms[i]
            if bn is not None:
                if mode == "train":
                    mu = z.mean(axis=0)
                    var = z.var(axis=0)
                    if update_stats:
                        bn.running_mean *= 1.0 - bn.momentum
                        bn.running_mean += bn.momentum * mu
                        bn.running_var *= 1.0 - bn.momentum
                        bn.running_var += bn.momentum * var
                else:
                    mu, var = bn.running_mean, bn.running_var
                inv_std = 1.0 / np.sqrt(var + bn.eps)
                xhat = (z - mu) * inv_std
                bn_cache = (xhat, inv_std, mode)
                z = bn.gamma * xhat + bn.beta
            act = net.hidden_activation
        else:
            act = net.output_activation
        a = _ACTIVATIONS[act][0](z)
        steps.append((inp, z, a, bn_cache, act))
    cache = {"net": id(net), "version": net.version, "steps": steps}
    return a, cache


def backward(net: DenseNet, cache: dict, upstream_grad: np.ndarray):
    """Reverse-mode gradients for the scalar loss L with dL/d(outputs) = ``upstream_grad``.

    Returns ``(param_grads, input_grad)`` with ``param_grads`` aligned to
    ``net.params()``.
    """
    if cache.get("net") != id(net) or cache.get("version") != net.version:
        raise StaleCacheError("cache does not belong to the current state of this network")
    steps = cache["steps"]
    delta = np.asarray(upstream_grad, dtype=float)
    if delta.shape != steps[-1][2].shape:
        raise DimensionMismatchError(
            f"upstream grad shape {delta.shape} != output shape {steps[-1][2].shape}")
    layer_grads = [None] * len(net.layers)
    bn_grads = [None] * len(net.norms)
    for i in range(len(net.layers) - 1, -1, -1):
        inp, z, a, bn_cache, act = steps[i]
        delta = delta * _ACTIVATIONS[act][1](z, a)
        if bn_cache is not None:
            bn = net.norms[i]
            xhat, inv_std, mode = bn_cache
            dgamma = np.sum(delta * xhat, axis=0)
            dbeta = np.sum(delta, axis=0)
            dxhat = delta * bn.gamma
            if mode == "train":
                n = dxhat.shape[0]
                delta = inv_std / n * (n * dxhat - dxhat.sum(axis=0)
                                       - xhat * np.sum(dxhat * xhat, axis=0))
            else:
                delta = dxhat * inv_std
            bn_grads[i] = (dgamma, dbeta)
        layer = net.layers[i]
        layer_grads[i] = (delta.T @ inp, delta.sum(axis=0))
        delta = delta @ layer.weight
    grads = []
    for dW, db in layer_grads:
        grads += [dW, db]
    for g in bn_grads:
        if g is not None:
            grads += list(g)
    return grads, delta


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    lr: float = 1e-3
    b1: float = 0.9
    b2: float = 0.999
    eps: float = 1e-8
    t: int = 0

    @classmethod
    def for_params(cls, params, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params],
                   lr, b1, b2, eps)


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]):
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if not (len(params) == len(grads) == len(state.m)):
        raise DimensionMismatchError("params, grads and Adam moments differ in length")
    state.t += 1
    c1 = 1.0 - state.b1 ** state.t
    c2 = 1.0 - state.b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise DimensionMismatchError(f"shape mismatch {p.shape} vs {g.shape}")
        m *= state.b1
        m += (1.0 - state.b1) * g
        tmp = np.square(g)
        tmp *= 1.0 - state.b2
        v *= state.b2
        v += tmp
        # p -= lr * (m / c1) / (sqrt(v / c2) + eps), without extra temporaries
        np.sqrt(v, out=tmp)
        tmp *= 1.0 / math.sqrt(c2)
        tmp += state.eps
        np.divide(m, tmp, out=tmp)
        tmp *= state.lr / c1
        p -= tmp
    return params, state


class Adam:
    """Adam bound to one network; bumps the network version after each step."""

    def __init__(self, net: DenseNet, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
        self.net = net
        self.state = AdamState.for_params(net.params(), lr, b1, b2, eps)

    @property
    def lr(self):
        return self.state.lr

    @lr.setter
    def lr(self, value):
        self.state.lr = value

    def step(self, grads):
        adam_step(self.state, self.net.params(), grads)
        self.net.touch()


def soft_update(target: DenseNet, source: DenseNet, tau: float):
    """target <- tau * source + (1 - tau) * target, running statistics included."""
    if not 0.0 < tau <= 1.0:
        raise InvalidArgumentError(f"tau must be in (0, 1], got {tau}")
    for t, s in zip(target.tensors(), source.tensors()):
        if tau == 1.0:
            t[...] = s
        else:
            t *= 1.0 - tau
            t += tau * s
    target.touch()


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    worst: str
    per_tensor: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def rel_error(analytic, numeric, floor=1e-6):
    """Elementwise |a - n| / max(|a|, |n|, floor)."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def _ridders(f: Callable[[float], float], h: float, shrink: float = 1.4, ntab: int = 10,
             safe: float = 2.0) -> float:
    """Derivative at 0 of ``f`` by Ridders' polynomial extrapolation of central differences.

    Builds a Neville tableau over steps h, h/shrink, ... and returns the
    entry with the smallest internal error estimate, stopping once higher
    orders start to lose accuracy.
    """
    con2 = shrink * shrink
    table = [[(f(h) - f(-h)) / (2.0 * h)]]
    best, err = table[0][0], math.inf
    for i in range(1, ntab):
        h /= shrink
        row = [(f(h) - f(-h)) / (2.0 * h)]
        fac = con2
        for j in range(1, i + 1):
            row.append((row[j - 1] * fac - table[i - 1][j - 1]) / (fac - 1.0))
            fac *= con2
            e = max(abs(row[j] - row[j - 1]), abs(row[j] - table[i - 1][j - 1]))
            if e <= err:
                err, best = e, row[j]
        table.append(row)
        if abs(row[i] - table[i - 1][i - 1]) >= safe * err:
            break
    return best


def central_difference(f: Callable[[], float], arr: np.ndarray, step: float,
                       method: str = "ridders") -> np.ndarray:
    """Numerical gradient of ``f()`` with respect to ``arr`` (perturbed in place, then restored).

    ``method="central"`` is the plain (f(x+h) - f(x-h)) / 2h rule.
    ``method="ridders"`` starts from step ``step`` and extrapolates central
    differences toward zero step, which stays accurate where the loss has
    large curvature (batchnorm over a nearly constant batch, for instance).
    """
    if method not in ("central", "ridders"):
        raise InvalidArgumentError(f"method must be 'central' or 'ridders', got {method!r}")
    num = np.zeros_like(arr)
    for idx in np.ndindex(arr.shape):
        orig = arr[idx]

        def shifted(dh):
            arr[idx] = orig + dh
            return f()

        try:
            if method == "central":
                num[idx] = (shifted(step) - shifted(-step)) / (2.0 * step)
            else:
                num[idx] = _ridders(shifted, step)
        finally:
            arr[idx] = orig
    return num


def grad_check(net: DenseNet, loss_fn: Callable, x: np.ndarray, tolerance: float = 1e-5,
               *, step: float = 1e-3, method: str = "ridders", mode: str = "train",
               check_input: bool = True, grads=None) -> GradCheckReport:
    """Compare analytic gradients with central differences on every parameter.

    ``loss_fn(outputs)`` returns ``(loss, dloss_doutputs)``. Running
    statistics are left untouched. ``grads`` replaces the analytic
    parameter gradients (useful to confirm the checker flags a bad one).

    Errors are elementwise ``|a - n| / max(|a|, |n|, floor)`` with
    ``floor = 1e-6 * max(1, |loss|)``: entries whose true gradient is zero
    (a dense bias feeding train-mode batchnorm, for instance) only carry
    rounding noise that grows with the loss value.
    """
    x = np.asarray(x, dtype=float)

    def loss_at():
        out, _ = forward(net, x, mode, update_stats=False)
        return loss_fn(out)[0]

    out, cache = forward(net, x, mode, update_stats=False)
    loss0, dout = loss_fn(out)
    floor = 1e-6 * max(1.0, abs(float(loss0)))
    analytic, dx = backward(net, cache, dout)
    if grads is not None:
        analytic = grads
    named = [(f"param[{i}]", p, g) for i, (p, g) in enumerate(zip(net.params(), analytic))]
    report = {}
    for name, p, g in named:
        num = central_difference(loss_at, p, step, method)
        report[name] = float(rel_error(g, num, floor).max(initial=0.0))
    if check_input:
        num = central_difference(loss_at, x, step, method)
        report["input"] = float(rel_error(dx, num, floor).max(initial=0.0))
    worst = max(report, key=report.get)
    return GradCheckReport(report[worst], tolerance, worst, report)


def relu_margin(net: DenseNet, x: np.ndarray, mode: str = "train") -> float:
    """Smallest |pre-activation| feeding a ReLU; inf when the net has no ReLU.

    Finite differences straddling a ReLU kink are meaningless, so gradient
    checks should only be trusted when this margin is well above the step.
    """
    _, cache = forward(net, x, mode, update_stats=False)
    zs = [np.abs(z).min() for _, z, _, _, act in cache["steps"] if act == "relu"]
    return float(min(zs)) if zs else math.inf


def save_checkpoint(path, nets: dict[str, DenseNet], optimizers: dict[str, Adam] | None = None,
                    metadata: dict | None = None):
    """Write networks, Adam moments and JSON metadata to one ``.npz`` file."""
    arrays = {}
    header = {"format_version": CHECKPOINT_VERSION, "nets": {}, "optimizers": {},
              "metadata": metadata or {}}
    for name, net in nets.items():
        header["nets"][name] = {
            "sizes": net.sizes, "hidden_activation": net.hidden_activation,
            "output_activation": net.output_activation,
            "batchnorm": [bn is not None for bn in net.norms],
            "bn": [[bn.momentum, bn.eps] if bn is not None else None for bn in net.norms],
        }
        for i, t in enumerate(net.tensors()):
            arrays[f"net/{name}/{i}"] = t
    for name, opt in (optimizers or {}).items():
        s = opt.state
        header["optimizers"][name] = {"lr": s.lr, "b1": s.b1, "b2": s.b2, "eps": s.eps,
                                      "t": s.t, "net": next(
                                          (k for k, n in nets.items() if n is opt.net), None)}
        for i, (m, v) in enumerate(zip(s.m, s.v)):
            arrays[f"opt/{name}/m/{i}"] = m
            arrays[f"opt/{name}/v/{i}"] = v
    arrays["header"] = np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)
    with open(Path(path), "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(nets, optimizers, metadata)``."""
    with np.load(Path(path)) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise InvalidArgumentError(
                f"unsupported checkpoint version {header.get('format_version')}")
        nets = {}
        for name, entry in header["nets"].items():
            net = DenseNet(entry["sizes"], hidden_activation=entry["hidden_activation"],
                           output_activation=entry["output_activation"],
                           batchnorm=any(entry["batchnorm"]), init="zeros")
            for i, bn_spec in enumerate(entry["bn"]):
                if bn_spec is None:
                    net.norms[i] = None
                else:
                    net.norms[i].momentum, net.norms[i].eps = bn_spec
            for i, t in enumerate(net.tensors()):
                t[...] = data[f"net/{name}/{i}"]
            nets[name] = net
        optimizers = {}
        for name, entry in header["optimizers"].items():
            opt = Adam(nets[entry["net"]], entry["lr"], entry["b1"], entry["b2"], entry["eps"])
            opt.state.t = entry["t"]
            for i in range(len(opt.state.m)):
                opt.state.m[i][...] = data[f"opt/{name}/m/{i}"]
                opt.state.v[i][...] = data[f"opt/{name}/v/{i}"]
            optimizers[name] = opt
    return nets, optimizers, header["metadata"]
