"""Dense networks with exact gradients, Adam updates, and binary checkpoints.

Everything here is plain numpy. Parameters are stored as float32 (so
checkpoints round-trip bit-exactly) while all forward/backward arithmetic
is carried out in float64 for gradient accuracy.

Nets are plain data: share them read-only across threads freely. adam_step
mutates in place, so a net being trained belongs to exactly one trainer.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "tanh", "sigmoid", "identity")

MAGIC = b"DNETCKPT"
FORMAT_VERSION = 1


class ShapeError(ValueError):
    """Input/parameter dimensions do not line up."""


class CheckpointError(RuntimeError):
    """Checkpoint payload is unreadable, corrupted, or from another version."""


class DivergenceError(RuntimeError):
    """Training produced non-finite parameters or losses."""


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "identity":
        return z
    raise ValueError(f"unknown activation {name!r}")


def _act_deriv(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    # Derivative wrt pre-activation, expressed via z or the cached output a.
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "identity":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class Layer:
    weight: np.ndarray  # (out, in), float32
    bias: np.ndarray  # (out,), float32
    activation: str

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


@dataclass
class DenseNet:
    """A fully connected net: an ordered chain of affine layers + activations."""

    layers: list[Layer]

    def __post_init__(self):
        for k in range(1, len(self.layers)):
            if self.layers[k].in_dim != self.layers[k - 1].out_dim:
                raise ShapeError(
                    f"layer {k} expects input dim {self.layers[k].in_dim}, "
                    f"layer {k - 1} outputs {self.layers[k - 1].out_dim}"
                )
        for k, lay in enumerate(self.layers):
            if lay.activation not in ACTIVATIONS:
                raise ValueError(f"layer {k}: unknown activation {lay.activation!r}")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def architecture(self) -> list[dict]:
        return [
            {"in": lay.in_dim, "out": lay.out_dim, "act": lay.activation}
            for lay in self.layers
        ]


def dense_net(sizes: list[int], activations: list[str], seed: int = 0) -> DenseNet:
    """Build a net with uniform ±1/sqrt(fan_in) weights and zero biases.

    `sizes` lists layer widths input-first, so len(activations) == len(sizes) - 1.
    """
    if len(activations) != len(sizes) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(sizes[:-1], sizes[1:], activations):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in)).astype(np.float32)
        b = np.zeros(fan_out, dtype=np.float32)
        layers.append(Layer(w, b, act))
    return DenseNet(layers)


def clone(net: DenseNet) -> DenseNet:
    return DenseNet(
        [Layer(l.weight.copy(), l.bias.copy(), l.activation) for l in net.layers]
    )


def flat_params(net: DenseNet) -> np.ndarray:
    """All parameters as one float32 vector (weights row-major, then bias)."""
    return np.concatenate(
        [np.concatenate([l.weight.ravel(), l.bias]) for l in net.layers]
    )


def param_checksum(net: DenseNet) -> int:
    """CRC32 over the raw parameter bytes; cheap identity for freeze checks."""
    return zlib.crc32(flat_params(net).tobytes())


def _as_batch(x: np.ndarray, dim: int, what: str) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise ShapeError(f"{what}: expected length {dim}, got shape {x.shape}")
    return x, single


def forward(net: DenseNet, x: np.ndarray) -> np.ndarray:
    """Evaluate the net on a vector (in,) or a batch (B, in)."""
    h, single = _as_batch(x, net.input_dim, "layer 0 input")
    for lay in net.layers:
        h = _act(lay.activation, h @ lay.weight.T.astype(np.float64) + lay.bias)
    return h[0] if single else h


def _forward_cached(net: DenseNet, x: np.ndarray):
    """Forward pass keeping pre- and post-activations per layer."""
    acts = [x]
    pres = []
    h = x
    for lay in net.layers:
        z = h @ lay.weight.T.astype(np.float64) + lay.bias.astype(np.float64)
        h = _act(lay.activation, z)
        pres.append(z)
        acts.append(h)
    return pres, acts


@dataclass
class Gradients:
    """Per-layer (dW, db) plus the gradient wrt the network input."""

    layers: list[tuple[np.ndarray, np.ndarray]]
    wrt_input: np.ndarray
    loss: float = 0.0

    def scaled(self, c: float) -> "Gradients":
        return Gradients(
            [(dw * c, db * c) for dw, db in self.layers], self.wrt_input * c, self.loss
        )

    def add(self, other: "Gradients") -> "Gradients":
        return Gradients(
            [
                (dw + dw2, db + db2)
                for (dw, db), (dw2, db2) in zip(self.layers, other.layers)
            ],
            self.wrt_input + other.wrt_input,
            self.loss + other.loss,
        )


def backprop_upstream(net: DenseNet, x: np.ndarray, d_out: np.ndarray) -> Gradients:
    """Reverse accumulation from an arbitrary upstream gradient on the output.

    `x` and `d_out` may be single vectors or batches; batch contributions are
    summed (scale `d_out` beforehand for mean-reduced losses).
    """
    xb, single = _as_batch(x, net.input_dim, "layer 0 input")
    db_out, _ = _as_batch(d_out, net.output_dim, "upstream gradient")
    if db_out.shape[0] != xb.shape[0]:
        raise ShapeError("input batch and upstream gradient batch differ")
    pres, acts = _forward_cached(net, xb)
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    delta = db_out
    for k in range(len(net.layers) - 1, -1, -1):
        lay = net.layers[k]
        delta = delta * _act_deriv(lay.activation, pres[k], acts[k + 1])
        grads[k] = (delta.T @ acts[k], delta.sum(axis=0))
        delta = delta @ lay.weight.astype(np.float64)
    wrt_input = delta[0] if single else delta
    return Gradients(grads, wrt_input)


def _loss_and_dout(
    y: np.ndarray, loss_kind: str, target: np.ndarray | None
) -> tuple[float, np.ndarray]:
    if loss_kind == "mse":
        t = np.asarray(target, dtype=np.float64)
        if t.shape != y.shape:
            raise ShapeError(f"mse target shape {t.shape} != output shape {y.shape}")
        diff = y - t
        return float(np.sum(diff * diff)), 2.0 * diff
    if loss_kind == "bce":
        t = np.asarray(target, dtype=np.float64)
        if t.shape != y.shape:
            raise ShapeError(f"bce target shape {t.shape} != output shape {y.shape}")
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise ValueError("bce targets must lie in [0, 1]")
        p = np.clip(y, 1e-7, 1.0 - 1e-7)
        loss = float(-np.sum(t * np.log(p) + (1.0 - t) * np.log1p(-p)))
        return loss, (p - t) / (p * (1.0 - p))
    if loss_kind == "scalar-output":
        if y.size != 1:
            raise ShapeError("scalar-output loss needs a single-output net")
        u = 1.0 if target is None else float(np.asarray(target).reshape(()))
        return float(u * y.reshape(())), np.full_like(y, u)
    raise ValueError(f"unknown loss kind {loss_kind!r}")


def grad(
    net: DenseNet,
    x: np.ndarray,
    loss_kind: str,
    target: np.ndarray | None = None,
) -> Gradients:
    """Exact gradients of a loss on a single input.

    loss kinds: 'mse' (sum of squared errors vs target), 'bce' (sum of binary
    cross-entropies vs target, outputs clamped to [1e-7, 1-1e-7]), and
    'scalar-output' (the output itself, optionally weighted by the scalar in
    `target`; used where the gradient wrt the input is the quantity of
    interest).
    """
    xv, single = _as_batch(x, net.input_dim, "layer 0 input")
    if not single:
        raise ShapeError("grad() takes a single input vector")
    y = forward(net, xv[0])
    loss, d_out = _loss_and_dout(y, loss_kind, target)
    g = backprop_upstream(net, xv[0], d_out)
    g.loss = loss
    return g


@dataclass
class AdamState:
    """Adam moments; shapes mirror the net the state was created for."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    v: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


def adam_init(net: DenseNet, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = lambda: [
        (np.zeros(l.weight.shape), np.zeros(l.bias.shape)) for l in net.layers
    ]
    return AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=0,
                     m=zeros(), v=zeros())


def adam_step(net: DenseNet, grads: Gradients, state: AdamState) -> DenseNet:
    """One bias-corrected Adam update, in place; refuses non-finite results."""
    if len(grads.layers) != len(net.layers):
        raise ShapeError("gradient layer count does not match net")
    state.t += 1
    b1t = 1.0 - state.beta1**state.t
    b2t = 1.0 - state.beta2**state.t
    for k, (lay, (dw, db)) in enumerate(zip(net.layers, grads.layers)):
        if dw.shape != lay.weight.shape or db.shape != lay.bias.shape:
            raise ShapeError(f"layer {k}: gradient shape mismatch")
        for p, g, m, v in ((lay.weight, dw, state.m[k][0], state.v[k][0]),
                           (lay.bias, db, state.m[k][1], state.v[k][1])):
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            with np.errstate(invalid="ignore", over="ignore"):
                step = state.lr * (m / b1t) / (np.sqrt(v / b2t) + state.eps)
                new = p.astype(np.float64) - step
            if not np.all(np.isfinite(new)):
                raise DivergenceError(f"layer {k}: non-finite parameters after step {state.t}")
            p[...] = new.astype(np.float32)
    return net


def save_checkpoint(net: DenseNet, path: str) -> None:
    """Serialize: magic, u16 version, length-prefixed JSON header, f32 params, CRC32."""
    header = json.dumps({"layers": net.architecture()}).encode("utf-8")
    payload = b"".join(
        l.weight.astype("<f4").tobytes() + l.bias.astype("<f4").tobytes()
        for l in net.layers
    )
    body = MAGIC + struct.pack("<H", FORMAT_VERSION)
    body += struct.pack("<I", len(header)) + header + payload
    body += struct.pack("<I", zlib.crc32(body))
    with open(path, "wb") as fh:
        fh.write(body)


def load_checkpoint(path: str) -> DenseNet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 2 + 4 + 4 or blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a dense-net checkpoint")
    crc_stored = struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(blob[:-4]) != crc_stored:
        raise CheckpointError(f"{path}: checksum mismatch, refusing corrupted payload")
    off = len(MAGIC)
    version = struct.unpack_from("<H", blob, off)[0]
    off += 2
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    hlen = struct.unpack_from("<I", blob, off)[0]
    off += 4
    try:
        header = json.loads(blob[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable architecture header") from exc
    off += hlen
    layers = []
    for spec in header["layers"]:
        n_in, n_out, act = spec["in"], spec["out"], spec["act"]
        nw, nb = n_out * n_in * 4, n_out * 4
        if off + nw + nb > len(blob) - 4:
            raise CheckpointError(f"{path}: truncated parameter payload")
        w = np.frombuffer(blob, dtype="<f4", count=n_out * n_in, offset=off)
        off += nw
        b = np.frombuffer(blob, dtype="<f4", count=n_out, offset=off)
        off += nb
        layers.append(Layer(w.reshape(n_out, n_in).copy(), b.copy(), act))
    if off != len(blob) - 4:
        raise CheckpointError(f"{path}: trailing bytes after parameter payload")
    return DenseNet(layers)
