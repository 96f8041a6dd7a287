"""Contrastive training of the encoder with the NT-Xent objective.

View A of each formula is the original featured graph; view B is its
augmentation.  Every anchor's positive is its counterpart in the other view,
the remaining 2N-2 embeddings in the batch are its negatives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .augment import AugmentConfig, augment
from .embed.featurize import FeaturedGraph, Featurizer
from .encoder import DEFAULT_DIMS, EncoderParams, GraphBatch, backward, forward, init_params
from .errors import BatchTooSmall, CorpusTooSmall, InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    temperature: float = 0.5
    epochs: int = 5
    lr: float = 0.01
    seed: int = 0
    dims: tuple[int, ...] = DEFAULT_DIMS
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        if self.batch_size < 2:
            raise BatchTooSmall(f"batch size {self.batch_size} leaves no negatives (need >= 2)")
        if self.temperature <= 0:
            raise InputError("temperature must be positive")
        if self.epochs < 0:
            raise InputError("epochs must be >= 0")


def _logits(za: np.ndarray, zb: np.ndarray, tau: float):
    n = za.shape[0]
    if n < 2 or zb.shape[0] != n:
        raise BatchTooSmall(f"need two views of equal size >= 2, got {za.shape[0]} and {zb.shape[0]}")
    z = np.concatenate([za, zb], axis=0)
    sim = z @ z.T / tau
    np.fill_diagonal(sim, -np.inf)
    pos = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
    return z, sim, pos


def ntxent_loss(za: np.ndarray, zb: np.ndarray, tau: float) -> float:
    """Mean over the 2N anchors of -log softmax(positive) over all non-self rows."""
    _, sim, pos = _logits(za, zb, tau)
    rows = np.arange(sim.shape[0])
    peak = sim.max(axis=1, keepdims=True)
    lse = np.log(np.exp(sim - peak).sum(axis=1)) + peak[:, 0]
    return float(np.mean(lse - sim[rows, pos]))


def ntxent_grad(za: np.ndarray, zb: np.ndarray, tau: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss and its gradients w.r.t. both views (rows treated as free vectors)."""
    z, sim, pos = _logits(za, zb, tau)
    m = z.shape[0]
    rows = np.arange(m)
    peak = sim.max(axis=1, keepdims=True)
    expd = np.exp(sim - peak)
    denom = expd.sum(axis=1, keepdims=True)
    loss = float(np.mean(np.log(denom[:, 0]) + peak[:, 0] - sim[rows, pos]))
    dsim = expd / denom
    dsim[rows, pos] -= 1.0
    dsim /= m
    dz = (dsim + dsim.T) @ z / tau
    n = za.shape[0]
    return loss, dz[:n], dz[n:]


def loss_gradients(params: EncoderParams, batch_a: GraphBatch, batch_b: GraphBatch, tau: float):
    """NT-Xent loss of a batch pair and its gradient for every encoder parameter."""
    za, cache_a = forward(params, batch_a)
    zb, cache_b = forward(params, batch_b)
    loss, dza, dzb = ntxent_grad(za, zb, tau)
    ga = backward(params, batch_a, cache_a, dza)
    gb = backward(params, batch_b, cache_b, dzb)
    for la, lb in zip(ga.layers, gb.layers):
        for name in la.FIELDS:
            setattr(la, name, getattr(la, name) + getattr(lb, name))
    return loss, ga


def sgd_step(params: EncoderParams, grads: EncoderParams, lr: float) -> None:
    for p, g in zip(params.arrays(), grads.arrays()):
        p -= lr * g


def train_gcl(
    graphs: list[FeaturedGraph],
    featurizer: Featurizer,
    cfg: TrainConfig,
    rng: np.random.Generator | None = None,
) -> tuple[EncoderParams, list[float]]:
    """Train from a seeded initialization; returns float32-rounded params and per-epoch mean loss.

    The last partial batch of each epoch is dropped so every step sees the
    same number of negatives.
    """
    if len(graphs) < cfg.batch_size:
        raise CorpusTooSmall(f"corpus of {len(graphs)} graphs is smaller than batch size {cfg.batch_size}")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    params = init_params(rng, cfg.dims, featurizer.edge_dim)
    history: list[float] = []
    n_batches = len(graphs) // cfg.batch_size
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(graphs))
        losses = []
        for b in range(n_batches):
            idx = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            view_a = [graphs[i] for i in idx]
            view_b = [augment(fg, cfg.augment, rng, featurizer) for fg in view_a]
            loss, grads = loss_gradients(params, GraphBatch(view_a), GraphBatch(view_b), cfg.temperature)
            sgd_step(params, grads, cfg.lr)
            losses.append(loss)
        history.append(float(np.mean(losses)))
        log.debug("epoch %d loss %.5f", epoch + 1, history[-1])
    return params.rounded(), history
