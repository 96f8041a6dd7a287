"""Mean-aggregation message-passing encoder with hand-written backpropagation.

Per layer, for every node v::

    h_v' = relu(W_self h_v + W_nbr mean_{u ~ v} h_u + W_edge mean_{e ~ v} f_e + b)

where ``u ~ v`` ranges over in- and out-neighbours and ``e ~ v`` over incident
edges (each edge contributes its other endpoint, so both means share one
degree).  The graph embedding is the L2-normalized mean of the final node
states.  A batch of graphs is processed as one block-diagonal graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .embed.featurize import FeaturedGraph
from .errors import DimensionMismatch

DEFAULT_DIMS = (100, 128, 128)


@dataclass
class Layer:
    w_self: np.ndarray  # (d_out, d_in)
    w_nbr: np.ndarray  # (d_out, d_in)
    w_edge: np.ndarray  # (d_out, d_e)
    b: np.ndarray  # (d_out,)

    FIELDS = ("w_self", "w_nbr", "w_edge", "b")

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, f) for f in self.FIELDS]


@dataclass
class EncoderParams:
    layers: list[Layer]

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0].w_self.shape[1],) + tuple(l.w_self.shape[0] for l in self.layers)

    @property
    def edge_dim(self) -> int:
        return self.layers[0].w_edge.shape[1]

    def arrays(self) -> list[np.ndarray]:
        return [a for layer in self.layers for a in layer.arrays()]

    def copy(self) -> EncoderParams:
        return EncoderParams([Layer(*(a.copy() for a in l.arrays())) for l in self.layers])

    def rounded(self) -> EncoderParams:
        """Same parameters rounded through float32, as stored in checkpoints."""
        return EncoderParams(
            [Layer(*(a.astype(np.float32).astype(np.float64) for a in l.arrays())) for l in self.layers]
        )


def init_params(rng: np.random.Generator, dims=DEFAULT_DIMS, edge_dim: int = 16) -> EncoderParams:
    """Glorot-uniform weight matrices, zero biases."""

    def glorot(fan_out, fan_in):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    layers = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        layers.append(Layer(glorot(d_out, d_in), glorot(d_out, d_in), glorot(d_out, edge_dim), np.zeros(d_out)))
    return EncoderParams(layers)


class GraphBatch:
    """Block-diagonal packing of featured graphs with sparse averaging operators."""

    def __init__(self, graphs: list[FeaturedGraph]):
        self.n_graphs = len(graphs)
        node_counts = np.array([fg.graph.n_nodes for fg in graphs], dtype=np.int64)
        edge_counts = np.array([fg.graph.n_edges for fg in graphs], dtype=np.int64)
        node_off = np.concatenate([[0], np.cumsum(node_counts)])
        n = int(node_off[-1])
        m = int(edge_counts.sum())
        self.x = np.concatenate([fg.node_features for fg in graphs], axis=0) if n else np.zeros((0, 0))
        d_e = graphs[0].edge_features.shape[1] if graphs else 0
        self.e = (
            np.concatenate([fg.edge_features for fg in graphs], axis=0).reshape(m, d_e)
            if m
            else np.zeros((0, d_e))
        )
        src = np.empty(m, dtype=np.int64)
        dst = np.empty(m, dtype=np.int64)
        pos = 0
        for fg, off in zip(graphs, node_off[:-1]):
            for s, d, _ in fg.graph.edges:
                src[pos] = s + off
                dst[pos] = d + off
                pos += 1
        deg = np.bincount(src, minlength=n) + np.bincount(dst, minlength=n)
        inv = np.divide(1.0, deg, out=np.zeros(n), where=deg > 0)
        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        self.nbr_mean = sp.csr_matrix((inv[rows], (rows, cols)), shape=(n, n))
        edge_ids = np.concatenate([np.arange(m), np.arange(m)])
        self.edge_mean = sp.csr_matrix((inv[rows], (rows, edge_ids)), shape=(n, m))
        graph_of = np.repeat(np.arange(self.n_graphs), node_counts)
        self.pool = sp.csr_matrix(
            (1.0 / node_counts[graph_of], (graph_of, np.arange(n))), shape=(self.n_graphs, n)
        )


def _check_dims(params: EncoderParams, batch: GraphBatch):
    if batch.x.shape[1] != params.dims[0]:
        raise DimensionMismatch(f"node features have dim {batch.x.shape[1]}, encoder expects {params.dims[0]}")
    if batch.e.shape[1] != params.edge_dim:
        raise DimensionMismatch(f"edge features have dim {batch.e.shape[1]}, encoder expects {params.edge_dim}")


def _normalize(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(g, axis=1)
    z = np.empty_like(g)
    ok = norms > 0
    z[ok] = g[ok] / norms[ok, None]
    # an all-zero readout (e.g. every feature masked, all ReLUs off) maps to a fixed unit vector
    z[~ok] = 1.0 / np.sqrt(g.shape[1])
    return z, norms


def forward(params: EncoderParams, batch: GraphBatch):
    """Return unit embeddings (G x d_L) and the cache needed by :func:`backward`."""
    _check_dims(params, batch)
    h = batch.x
    edge_agg = batch.edge_mean @ batch.e
    cache = []
    for layer in params.layers:
        nbr = batch.nbr_mean @ h
        pre = h @ layer.w_self.T + nbr @ layer.w_nbr.T + edge_agg @ layer.w_edge.T + layer.b
        cache.append((h, nbr, pre))
        h = np.maximum(pre, 0.0)
    g = batch.pool @ h
    z, norms = _normalize(g)
    return z, (cache, edge_agg, z, norms)


def backward(params: EncoderParams, batch: GraphBatch, cache, dz: np.ndarray) -> EncoderParams:
    """Gradients of a scalar loss w.r.t. all parameters given dLoss/dz."""
    layer_cache, edge_agg, z, norms = cache
    ok = norms > 0
    dg = np.zeros_like(dz)
    proj = np.sum(z * dz, axis=1, keepdims=True)
    dg[ok] = (dz[ok] - z[ok] * proj[ok]) / norms[ok, None]
    dh = batch.pool.T @ dg
    grads = [None] * len(params.layers)
    for idx in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[idx]
        h_in, nbr, pre = layer_cache[idx]
        dpre = dh * (pre > 0)  # relu'(0) taken as 0
        grads[idx] = Layer(dpre.T @ h_in, dpre.T @ nbr, dpre.T @ edge_agg, dpre.sum(axis=0))
        if idx > 0:
            dh = dpre @ layer.w_self + batch.nbr_mean.T @ (dpre @ layer.w_nbr)
    return EncoderParams(grads)


def encode_batch(params: EncoderParams, graphs: list[FeaturedGraph]) -> np.ndarray:
    z, _ = forward(params, GraphBatch(graphs))
    return z


def encode(params: EncoderParams, fg: FeaturedGraph) -> np.ndarray:
    return encode_batch(params, [fg])[0]


def baseline_embed(fg: FeaturedGraph) -> np.ndarray:
    """Untrained baseline: normalized mean of node feature rows."""
    z, _ = _normalize(fg.node_features.mean(axis=0, keepdims=True))
    return z[0]
