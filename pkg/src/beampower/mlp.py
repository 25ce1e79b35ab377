"""Minimal fully-connected regression network in 64-bit numpy.

Affine -> ReLU -> affine -> ReLU -> affine with a linear output head,
mean-squared-error on selected output units only, exact analytic gradients,
Adam updates with bias correction, and a versioned little-endian binary
model file. Everything is float64: the networks are desk-scale and bit
determinism plus finite-difference-checkable gradients matter more than
speed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"BEAMQNET"
FORMAT_VERSION = 1


@dataclass
class MlpModel:
    """Layer parameters plus deployment metadata.

    weights[l] has shape (fan_in, fan_out); biases[l] shape (fan_out,).
    meta carries what a deployed model needs to interpret inputs and
    outputs: the link count it was trained for, the action grid recipe,
    the state pad constant, and the dB convention of state entries.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    meta: dict = field(default_factory=dict)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]


@dataclass
class AdamState:
    """First/second moment accumulators and step counter."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_w: list[np.ndarray] = field(default_factory=list)
    v_w: list[np.ndarray] = field(default_factory=list)
    m_b: list[np.ndarray] = field(default_factory=list)
    v_b: list[np.ndarray] = field(default_factory=list)


def init_model(dims: list[int], rng: np.random.Generator, meta: dict | None = None) -> MlpModel:
    """He-uniform hidden layers (limit sqrt(6/fan_in)), small-uniform output head.

    Deterministic under the generator state; biases start at zero.
    """
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ValueError("dims must list at least input and output sizes, all >= 1")
    weights, biases = [], []
    for l, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        if l < len(dims) - 2:
            limit = np.sqrt(6.0 / fan_in)
        else:
            limit = 1e-3
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=weights, biases=biases, meta=dict(meta or {}))


def adam_init(model: MlpModel, lr: float = 0.001, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    return AdamState(
        lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=0,
        m_w=[np.zeros_like(w) for w in model.weights],
        v_w=[np.zeros_like(w) for w in model.weights],
        m_b=[np.zeros_like(b) for b in model.biases],
        v_b=[np.zeros_like(b) for b in model.biases],
    )


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Network output for a single state (D,) or a batch (B, D)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != model.input_dim:
        raise ValueError(f"input dim {h.shape[1]} != model input dim {model.input_dim}")
    n_layers = len(model.weights)
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if l < n_layers - 1:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def selected_output_loss(model: MlpModel, states: np.ndarray, actions: np.ndarray,
                         targets: np.ndarray) -> float:
    """MSE over the chosen output unit of each sample, without gradients."""
    q = forward(model, np.atleast_2d(states))
    picked = q[np.arange(q.shape[0]), np.asarray(actions, dtype=int)]
    return float(np.mean((np.asarray(targets, dtype=float) - picked) ** 2))


def loss_and_grads(model: MlpModel, states: np.ndarray, actions: np.ndarray,
                   targets: np.ndarray):
    """Batch MSE on selected outputs and its exact parameter gradients.

    L = (1/B) * sum_b (y_b - Q(s_b)[a_b])^2; gradient flows only through
    each sample's chosen output unit. Returns (loss, dL/dW list, dL/db list).
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    actions = np.asarray(actions, dtype=int)
    targets = np.asarray(targets, dtype=float)
    batch = states.shape[0]
    if batch == 0:
        raise ValueError("empty batch")
    if not np.all(np.isfinite(targets)):
        raise ValueError("non-finite training targets")

    n_layers = len(model.weights)
    acts = [states]                    # inputs to each layer
    h = states
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if l < n_layers - 1:
            h = np.maximum(h, 0.0)
        acts.append(h)

    q = acts[-1]
    picked = q[np.arange(batch), actions]
    diff = picked - targets
    loss = float(np.mean(diff * diff))

    # dL/dq is zero except at the selected unit of each sample
    delta = np.zeros_like(q)
    delta[np.arange(batch), actions] = 2.0 * diff / batch

    grads_w = [None] * n_layers
    grads_b = [None] * n_layers
    for l in range(n_layers - 1, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (acts[l] > 0.0)
    return loss, grads_w, grads_b


def adam_update_array(param: np.ndarray, grad: np.ndarray, m: np.ndarray,
                      v: np.ndarray, step: int, lr: float, beta1: float,
                      beta2: float, eps: float) -> None:
    """One bias-corrected Adam update, in place on param, m, v."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** step)
    v_hat = v / (1.0 - beta2 ** step)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


def train_step(model: MlpModel, adam: AdamState, states: np.ndarray,
               actions: np.ndarray, targets: np.ndarray) -> float:
    """One regression step on a batch; returns the pre-update loss.

    Aborts on a non-finite loss instead of silently diverging.
    """
    loss, grads_w, grads_b = loss_and_grads(model, states, actions, targets)
    if not np.isfinite(loss):
        raise FloatingPointError(f"training loss diverged to {loss}")
    adam.step += 1
    for l in range(len(model.weights)):
        adam_update_array(model.weights[l], grads_w[l], adam.m_w[l], adam.v_w[l],
                          adam.step, adam.lr, adam.beta1, adam.beta2, adam.eps)
        adam_update_array(model.biases[l], grads_b[l], adam.m_b[l], adam.v_b[l],
                          adam.step, adam.lr, adam.beta1, adam.beta2, adam.eps)
    return loss


# ---------------------------------------------------------------------------
# Model file format, version 1 (all integers little-endian, see README):
#   8 bytes   magic "BEAMQNET"
#   u32       format version
#   u32       metadata length M
#   M bytes   UTF-8 JSON metadata (sorted keys)
#   u32       number of weight layers L
#   (L+1)*u32 layer dims d0..dL
#   per layer l: d_{l} * d_{l+1} f64 weights row-major, then d_{l+1} f64 biases
#   if metadata has_adam: u64 step, 4 f64 (lr, beta1, beta2, eps), then per
#   layer: m_w, v_w, m_b, v_b arrays in the same shapes/order as above.
# ---------------------------------------------------------------------------


def save_model(model: MlpModel, path, adam: AdamState | None = None) -> None:
    """Write the versioned binary model file (bit-exact round trip)."""
    meta = dict(model.meta)
    meta["has_adam"] = adam is not None
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    parts = [MAGIC,
             struct.pack("<I", FORMAT_VERSION),
             struct.pack("<I", len(meta_bytes)),
             meta_bytes,
             struct.pack("<I", len(model.weights))]
    dims = model.dims
    parts.append(struct.pack(f"<{len(dims)}I", *dims))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    if adam is not None:
        parts.append(struct.pack("<Q", adam.step))
        parts.append(struct.pack("<4d", adam.lr, adam.beta1, adam.beta2, adam.eps))
        for l in range(len(model.weights)):
            for arr in (adam.m_w[l], adam.v_w[l], adam.m_b[l], adam.v_b[l]):
                parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class ModelFormatError(ValueError):
    """Bad magic, version, or truncated model file."""


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.buf):
            raise ModelFormatError(
                f"truncated model file: need {n} bytes at offset {self.off}, "
                f"have {len(self.buf) - self.off}")
        out = self.buf[self.off:self.off + n]
        self.off += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64_array(self, count: int, shape) -> np.ndarray:
        raw = self.take(count * 8)
        return np.frombuffer(raw, dtype="<f8").astype(float).reshape(shape)


def load_model(path):
    """Read a model file; returns (MlpModel, AdamState or None)."""
    with open(path, "rb") as fh:
        buf = fh.read()
    r = _Reader(buf)
    if r.take(len(MAGIC)) != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    meta = json.loads(r.take(r.u32()).decode("utf-8"))
    n_layers = r.u32()
    if n_layers < 1 or n_layers > 1024:
        raise ModelFormatError(f"{path}: implausible layer count {n_layers}")
    dims = [r.u32() for _ in range(n_layers + 1)]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(r.f64_array(fan_in * fan_out, (fan_in, fan_out)))
        biases.append(r.f64_array(fan_out, (fan_out,)))
    has_adam = bool(meta.pop("has_adam", False))
    adam = None
    if has_adam:
        step = struct.unpack("<Q", r.take(8))[0]
        lr, beta1, beta2, eps = struct.unpack("<4d", r.take(32))
        adam = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=step)
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            adam.m_w.append(r.f64_array(fan_in * fan_out, (fan_in, fan_out)))
            adam.v_w.append(r.f64_array(fan_in * fan_out, (fan_in, fan_out)))
            adam.m_b.append(r.f64_array(fan_out, (fan_out,)))
            adam.v_b.append(r.f64_array(fan_out, (fan_out,)))
    if r.off != len(buf):
        raise ModelFormatError(f"{path}: {len(buf) - r.off} trailing bytes")
    return MlpModel(weights=weights, biases=biases, meta=meta), adam
