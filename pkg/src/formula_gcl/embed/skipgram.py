"""Skip-gram with negative sampling over subword-augmented input vectors.

The input vector of a center token is its own row plus the mean of its
character n-gram bucket rows.  For a (center, context) pair with sampled
negatives the loss is::

    -log sigmoid(u_ctx . v) - sum_neg log sigmoid(-u_neg . v)

and every pair triggers one plain SGD step.  Walks are visited in a fresh
random order each epoch.  The inner loop is compiled with
numba; it draws from numba's own seeded generator so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .table import EmbeddingTable
from .vocab import Vocabulary, unigram_distribution


@dataclass(frozen=True)
class TokenEmbedConfig:
    dim: int = 100
    window: int = 2
    negatives: int = 5
    epochs: int = 5
    lr: float = 0.05
    n_min: int = 3
    n_max: int = 5
    buckets: int = 2**15
    min_count: int = 1
    walks_per_node: int = 10
    walk_len: int = 5
    power: float = 0.75


@numba.njit(cache=True)
def _log_sigmoid(x):
    if x >= 0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


@numba.njit(cache=True)
def _center_vector(w_in, bkt, center, subs, v):
    d = w_in.shape[1]
    k = subs.shape[0]
    for q in range(d):
        v[q] = 0.0
    for s in subs:
        for q in range(d):
            v[q] += bkt[s, q]
    for q in range(d):
        v[q] = w_in[center, q] + (v[q] / k if k > 0 else 0.0)


@numba.njit(cache=True, fastmath=True)
def _pair_core(w_out, v, ctx, negs, lr, step_v):
    """Update output rows for one example; writes -lr * dLoss/dv into ``step_v``."""
    d = v.shape[0]
    step_v[:] = 0.0
    loss = 0.0
    for j in range(negs.shape[0] + 1):
        if j == 0:
            t = ctx
            label = 1.0
        else:
            t = negs[j - 1]
            label = 0.0
        score = 0.0
        for q in range(d):
            score += w_out[t, q] * v[q]
        if label == 1.0:
            loss -= _log_sigmoid(score)
        else:
            loss -= _log_sigmoid(-score)
        g = lr * (label - 1.0 / (1.0 + np.exp(-score)))
        for q in range(d):
            step_v[q] += g * w_out[t, q]
            w_out[t, q] += g * v[q]
    return loss


@numba.njit(cache=True)
def _apply_input_step(w_in, bkt, center, subs, step):
    d = w_in.shape[1]
    k = subs.shape[0]
    for q in range(d):
        w_in[center, q] += step[q]
    for s in subs:
        for q in range(d):
            bkt[s, q] += step[q] / k


@numba.njit(cache=True)
def _pair_step(w_in, w_out, bkt, center, subs, ctx, negs, lr):
    """One SGD step on a single (center, context, negatives) example; returns its loss."""
    v = np.zeros(w_in.shape[1])
    _center_vector(w_in, bkt, center, subs, v)
    step = np.zeros(v.shape[0])
    loss = _pair_core(w_out, v, ctx, negs, lr, step)
    _apply_input_step(w_in, bkt, center, subs, step)
    return loss


@numba.njit(cache=True)
def _train(w_in, w_out, bkt, tokens, offsets, sub_ptr, sub_idx, v_gain, neg_table, window, negatives, epochs, lr0, seed):
    np.random.seed(seed)
    d = w_in.shape[1]
    n_vocab = w_in.shape[0]
    n_walks = offsets.shape[0] - 1
    total = max(tokens.shape[0] * epochs, 1)
    processed = 0
    history = np.zeros(epochs)
    negs = np.zeros(negatives, dtype=np.int64)
    step = np.zeros(d)
    acc = np.zeros(d)
    v = np.zeros(d)
    for epoch in range(epochs):
        loss_sum = 0.0
        pairs = 0
        # walks of one formula are adjacent in the input; visit them in random order
        for w in np.random.permutation(n_walks):
            start = offsets[w]
            stop = offsets[w + 1]
            if stop - start < 2:
                processed += stop - start
                continue
            for i in range(start, stop):
                lr = lr0 * max(1.0 - processed / total, 1e-4)
                processed += 1
                center = tokens[i]
                subs = sub_idx[sub_ptr[center] : sub_ptr[center + 1]]
                # Input-side writes are deferred to the end of this center's pairs;
                # v is advanced in step so each pair sees exactly the sequentially
                # updated vector.
                _center_vector(w_in, bkt, center, subs, v)
                acc[:] = 0.0
                lo = max(start, i - window)
                hi = min(stop, i + window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    ctx = tokens[j]
                    m = 0
                    while m < negatives:
                        cand = neg_table[np.random.randint(0, neg_table.shape[0])]
                        if cand != ctx:
                            negs[m] = cand
                            m += 1
                        elif n_vocab == 1:
                            break
                    loss_sum += _pair_core(w_out, v, ctx, negs[:m], lr, step)
                    pairs += 1
                    gain = v_gain[center]
                    for q in range(d):
                        acc[q] += step[q]
                        v[q] += gain * step[q]
                _apply_input_step(w_in, bkt, center, subs, acc)
        history[epoch] = loss_sum / max(pairs, 1)
    return history


def pair_loss_and_grads(w_in, w_out, bkt, center: int, subs, ctx: int, negs):
    """Loss of one example and its analytic gradients (float64, no update).

    Returns ``(loss, g_in_row, g_out_rows, g_bucket_rows)`` where ``g_out_rows``
    maps output-row index to gradient and ``g_bucket_rows`` maps bucket index.
    """
    subs = list(subs)
    v = np.asarray(w_in[center], dtype=np.float64).copy()
    if subs:
        v += np.asarray(bkt[subs], dtype=np.float64).mean(axis=0)
    targets = [(ctx, 1.0)] + [(t, 0.0) for t in negs]
    loss = 0.0
    g_v = np.zeros_like(v)
    g_out: dict[int, np.ndarray] = {}
    for t, label in targets:
        u = np.asarray(w_out[t], dtype=np.float64)
        score = float(u @ v)
        sign = 1.0 if label == 1.0 else -1.0
        loss += np.logaddexp(0.0, -sign * score)
        dscore = 1.0 / (1.0 + np.exp(-score)) - label
        g_v += dscore * u
        g_out[t] = g_out.get(t, 0.0) + dscore * v
    g_bkt: dict[int, np.ndarray] = {}
    for s in subs:
        g_bkt[s] = g_bkt.get(s, 0.0) + g_v / len(subs)
    return loss, g_v, g_out, g_bkt


def sgd_pair_step(w_in, w_out, bkt, center: int, subs, ctx: int, negs, lr: float) -> float:
    """Apply the compiled training step to one example in place."""
    return _pair_step(
        w_in, w_out, bkt, int(center), np.asarray(subs, dtype=np.int64), int(ctx),
        np.asarray(negs, dtype=np.int64), float(lr),
    )


def negative_table(vocab: Vocabulary, power: float = 0.75, size: int = 1_000_000) -> np.ndarray:
    """Lookup table where token ids appear in proportion to the powered unigram distribution."""
    cum = np.cumsum(unigram_distribution(vocab, power))
    positions = (np.arange(size) + 0.5) / size
    return np.minimum(np.searchsorted(cum, positions, side="right"), len(vocab) - 1).astype(np.int64)


def init_table(vocab: Vocabulary, cfg: TokenEmbedConfig, rng: np.random.Generator) -> EmbeddingTable:
    bound = 0.5 / cfg.dim
    w_in = rng.uniform(-bound, bound, size=(len(vocab), cfg.dim))
    bkt = rng.uniform(-bound, bound, size=(cfg.buckets, cfg.dim))
    w_out = np.zeros((len(vocab), cfg.dim))
    return EmbeddingTable(vocab, w_in, w_out, bkt, n_min=cfg.n_min, n_max=cfg.n_max)


def train_token_embeddings(
    walks, vocab: Vocabulary, cfg: TokenEmbedConfig, rng: np.random.Generator
) -> tuple[EmbeddingTable, np.ndarray]:
    """Train on walk windows; returns the float32-rounded table and per-epoch mean pair loss."""
    table = init_table(vocab, cfg, rng)
    kernel_seed = int(rng.integers(2**31 - 1))

    seqs = [[vocab.index[t] for t in walk if t in vocab.index] for walk in walks]
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    offsets = np.zeros(len(seqs) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    tokens = np.fromiter((t for s in seqs for t in s), dtype=np.int64, count=int(offsets[-1]))

    sub_lists = [table.subword_ids(t) for t in vocab.tokens]
    sub_ptr = np.zeros(len(vocab) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in sub_lists], out=sub_ptr[1:])
    sub_idx = np.fromiter((b for s in sub_lists for b in s), dtype=np.int64, count=int(sub_ptr[-1]))
    # growth of v per unit input step: own row plus (sum of squared bucket multiplicities) / k^2
    v_gain = np.ones(len(vocab))
    for t, subs in enumerate(sub_lists):
        if subs:
            _, mult = np.unique(subs, return_counts=True)
            v_gain[t] += float((mult**2).sum()) / len(subs) ** 2
    neg_table = negative_table(vocab, cfg.power)

    history = np.zeros(0)
    if cfg.epochs > 0:
        history = _train(
            table.input, table.output, table.buckets, tokens, offsets, sub_ptr, sub_idx, v_gain, neg_table,
            cfg.window, cfg.negatives, cfg.epochs, cfg.lr, kernel_seed,
        )
    table.input = table.input.astype(np.float32)
    table.output = table.output.astype(np.float32)
    table.buckets = table.buckets.astype(np.float32)
    return table, history
