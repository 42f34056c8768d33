"""Autoencoder over flattened topologies: Gaussian encoder, sigmoid decoder.

The encoder emits mean and diagonal log-variance (2d outputs); the decoder
maps a d-dimensional latent vector back to per-link probabilities. Training
maximizes reconstruction log-likelihood minus the KL pull toward the
standard-normal prior, with the reparameterized sample carrying gradients
through the stochastic node.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import nets
from .graphs import Topology, TopologyDataset, pair_count, topology_from_bits
from .nets import DenseNet, DivergenceError, ShapeError

PROB_FLOOR = 1e-7  # decoder outputs are clamped to [PROB_FLOOR, 1-PROB_FLOOR] in logs


@dataclass
class GaussianParams:
    """Diagonal Gaussian over the latent space."""

    mean: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        if self.mean.shape != self.log_var.shape:
            raise ShapeError("mean and log-variance shapes differ")


@dataclass
class VaeModel:
    encoder: DenseNet  # L -> ... -> 2d
    decoder: DenseNet  # d -> ... -> L, sigmoid head
    n: int
    latent_dim: int

    def __post_init__(self):
        L = pair_count(self.n)
        if self.encoder.input_dim != L or self.encoder.output_dim != 2 * self.latent_dim:
            raise ShapeError(
                f"encoder must map {L} -> {2 * self.latent_dim}, got "
                f"{self.encoder.input_dim} -> {self.encoder.output_dim}"
            )
        if self.decoder.input_dim != self.latent_dim or self.decoder.output_dim != L:
            raise ShapeError(
                f"decoder must map {self.latent_dim} -> {L}, got "
                f"{self.decoder.input_dim} -> {self.decoder.output_dim}"
            )


def build_vae(
    n: int,
    latent_dim: int,
    enc_hidden: tuple[int, ...] = (512, 256),
    dec_hidden: tuple[int, ...] = (256, 512),
    seed: int = 0,
    logvar_bias_init: float = -4.0,
) -> VaeModel:
    """Fresh encoder/decoder pair.

    The log-variance head bias starts at `logvar_bias_init` (sigma ~ 0.14)
    so the latent channel is near-deterministic early in training; starting
    at sigma = 1 drowns the reconstruction signal in prior-level noise and
    the optimizer settles into emitting the dataset mean for every input.
    """
    L = pair_count(n)
    enc = nets.dense_net(
        [L, *enc_hidden, 2 * latent_dim],
        ["relu"] * len(enc_hidden) + ["identity"],
        seed=seed,
    )
    enc.layers[-1].bias[latent_dim:] = logvar_bias_init
    dec = nets.dense_net(
        [latent_dim, *dec_hidden, L],
        ["relu"] * len(dec_hidden) + ["sigmoid"],
        seed=seed + 1,
    )
    return VaeModel(enc, dec, n, latent_dim)


def _encode_raw(model: VaeModel, bits: np.ndarray) -> GaussianParams:
    out = nets.forward(model.encoder, bits)
    d = model.latent_dim
    return GaussianParams(out[..., :d], out[..., d:])


def encode(model: VaeModel, t: Topology) -> GaussianParams:
    if t.n != model.n:
        raise ShapeError(f"topology has n={t.n}, model expects n={model.n}")
    return _encode_raw(model, np.asarray(t.bits, dtype=np.float64))


def reparameterize(params: GaussianParams, noise: np.ndarray) -> np.ndarray:
    """z = mean + exp(log_var / 2) * noise."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != params.mean.shape:
        raise ShapeError(f"noise shape {noise.shape} != mean shape {params.mean.shape}")
    return params.mean + np.exp(0.5 * params.log_var) * noise


def decode(model: VaeModel, z: np.ndarray) -> np.ndarray:
    """Latent vector(s) -> per-link probabilities in (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != model.latent_dim:
        raise ShapeError(f"latent dim {z.shape[-1]} != model d={model.latent_dim}")
    return nets.forward(model.decoder, z)


def binarize(probs: np.ndarray, threshold: float = 0.5) -> Topology:
    """Link present iff probability >= threshold (ties round up)."""
    probs = np.asarray(probs, dtype=np.float64)
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    L = probs.shape[-1]
    n = round((1 + math.sqrt(1 + 8 * L)) / 2)
    if pair_count(n) != L:
        raise ValueError(f"{L} is not a pair count of any n")
    return topology_from_bits(n, (probs >= threshold).astype(int))


def kl_divergence(params: GaussianParams) -> float:
    """KL(q || standard normal) for a diagonal Gaussian, summed over dims."""
    mu, lv = params.mean, params.log_var
    return float(-0.5 * np.sum(1.0 + lv - mu * mu - np.exp(lv)))


def elbo_loss(
    bits: np.ndarray, probs: np.ndarray, params: GaussianParams, beta: float = 1.0
) -> tuple[float, float, float]:
    """(total, recon, kl) for one sample; recon is BCE summed over links."""
    bits = np.asarray(bits, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if bits.shape != probs.shape:
        raise ShapeError(f"bits shape {bits.shape} != probs shape {probs.shape}")
    p = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
    recon = float(-np.sum(bits * np.log(p) + (1.0 - bits) * np.log1p(-p)))
    kl = kl_divergence(params)
    return recon + beta * kl, recon, kl


@dataclass
class VaeTrainConfig:
    latent_dim: int = 10
    enc_hidden: tuple[int, ...] = (512, 256)
    dec_hidden: tuple[int, ...] = (256, 512)
    epochs: int = 800
    batch_size: int = 16
    lr: float = 1e-3
    beta: float = 1.0  # profiles use < 1 where exact reconstruction is the goal
    threshold: float = 0.5
    seed: int = 0
    logvar_bias_init: float = -4.0


@dataclass
class VaeTrainResult:
    model: VaeModel  # best-validation snapshot
    best_epoch: int
    report: list[dict] = field(repr=False)  # epoch, train_loss, val_loss, link_accuracy

    @property
    def final_accuracy(self) -> float:
        return self.report[self.best_epoch - 1]["link_accuracy"]


def _batch_bits(ds: TopologyDataset, idx: np.ndarray) -> np.ndarray:
    return np.array([ds.topologies[i].bits for i in idx], dtype=np.float64)


def _eval_split(model: VaeModel, X: np.ndarray, beta: float, threshold: float):
    """Deterministic validation: z = mean, no sampling."""
    d = model.latent_dim
    out = nets.forward(model.encoder, X)
    mu, lv = out[:, :d], out[:, d:]
    probs = nets.forward(model.decoder, mu)
    p = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
    recon = -np.sum(X * np.log(p) + (1.0 - X) * np.log1p(-p), axis=1)
    kl = -0.5 * np.sum(1.0 + lv - mu * mu - np.exp(lv), axis=1)
    loss = float(np.mean(recon + beta * kl))
    acc = float(np.mean((probs >= threshold) == (X > 0.5)))
    return loss, acc


def train_vae(dataset: TopologyDataset, cfg: VaeTrainConfig) -> VaeTrainResult:
    """Mini-batch ELBO training; keeps the best-validation-loss snapshot.

    Validation falls back to the training rows when the split leaves it
    empty (single-topology datasets).
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    model = build_vae(
        dataset.n,
        cfg.latent_dim,
        cfg.enc_hidden,
        cfg.dec_hidden,
        seed=cfg.seed,
        logvar_bias_init=cfg.logvar_bias_init,
    )
    d = cfg.latent_dim
    X_train = _batch_bits(dataset, dataset.train_idx)
    val_idx = dataset.val_idx if len(dataset.val_idx) else dataset.train_idx
    X_val = _batch_bits(dataset, val_idx)

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, len(dataset)]))
    enc_state = nets.adam_init(model.encoder, lr=cfg.lr)
    dec_state = nets.adam_init(model.decoder, lr=cfg.lr)

    best_loss, best_epoch, best_model = np.inf, 0, None
    report = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(X_train))
        train_losses = []
        for start in range(0, len(order), cfg.batch_size):
            xb = X_train[order[start : start + cfg.batch_size]]
            B = len(xb)
            out = nets.forward(model.encoder, xb)
            mu, lv = out[:, :d], out[:, d:]
            eps = rng.standard_normal(mu.shape)
            sigma = np.exp(0.5 * lv)
            z = mu + sigma * eps
            probs = nets.forward(model.decoder, z)

            p = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
            recon = -np.sum(xb * np.log(p) + (1.0 - xb) * np.log1p(-p))
            kl = -0.5 * np.sum(1.0 + lv - mu * mu - np.exp(lv))
            loss = (recon + cfg.beta * kl) / B
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}")
            train_losses.append(loss)

            # mean-over-batch loss: scale every upstream term by 1/B
            d_probs = (p - xb) / (p * (1.0 - p)) / B
            dec_grads = nets.backprop_upstream(model.decoder, z, d_probs)
            dz = dec_grads.wrt_input
            d_mu = dz + cfg.beta * mu / B
            d_lv = dz * eps * 0.5 * sigma + cfg.beta * 0.5 * (np.exp(lv) - 1.0) / B
            enc_grads = nets.backprop_upstream(
                model.encoder, xb, np.concatenate([d_mu, d_lv], axis=1)
            )
            nets.adam_step(model.decoder, dec_grads, dec_state)
            nets.adam_step(model.encoder, enc_grads, enc_state)

        val_loss, val_acc = _eval_split(model, X_val, cfg.beta, cfg.threshold)
        report.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(train_losses)),
                "val_loss": val_loss,
                "link_accuracy": val_acc,
            }
        )
        if val_loss < best_loss:
            best_loss, best_epoch = val_loss, epoch
            best_model = VaeModel(
                nets.clone(model.encoder), nets.clone(model.decoder), model.n, d
            )
    return VaeTrainResult(best_model, best_epoch, report)


def save_vae(model: VaeModel, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    nets.save_checkpoint(model.encoder, os.path.join(directory, "encoder.ckpt"))
    nets.save_checkpoint(model.decoder, os.path.join(directory, "decoder.ckpt"))
    meta = {"n": model.n, "latent_dim": model.latent_dim}
    with open(os.path.join(directory, "vae.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def load_vae(directory: str) -> VaeModel:
    with open(os.path.join(directory, "vae.json")) as fh:
        meta = json.load(fh)
    enc = nets.load_checkpoint(os.path.join(directory, "encoder.ckpt"))
    dec = nets.load_checkpoint(os.path.join(directory, "decoder.ckpt"))
    return VaeModel(enc, dec, meta["n"], meta["latent_dim"])


def vae_checkpoint_hash(directory: str) -> str:
    """SHA-256 over the serialized encoder+decoder, for binding manifests."""
    h = hashlib.sha256()
    for name in ("encoder.ckpt", "decoder.ckpt"):
        with open(os.path.join(directory, name), "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def write_report_csv(result: VaeTrainResult, path: str, header_comment: str = "") -> None:
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append("epoch,train_loss,val_loss,link_accuracy")
    for row in result.report:
        lines.append(
            f"{row['epoch']},{row['train_loss']!r},{row['val_loss']!r},{row['link_accuracy']!r}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
