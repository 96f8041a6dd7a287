from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..formula.graph import MathGraph
from .table import EmbeddingTable

EDGE_DIM = 16


@dataclass(frozen=True, eq=False)
class FeaturedGraph:
    """A graph with one feature row per node and one per edge (same order as ``graph.edges``)."""

    graph: MathGraph
    node_features: np.ndarray
    edge_features: np.ndarray

    def __post_init__(self):
        if self.node_features.shape[0] != self.graph.n_nodes:
            raise ValueError("node feature rows do not match node count")
        if self.edge_features.shape[0] != self.graph.n_edges:
            raise ValueError("edge feature rows do not match edge count")


class Featurizer:
    """Memoizes token vectors so repeated labels are embedded once."""

    def __init__(self, table: EmbeddingTable, edge_dim: int = EDGE_DIM):
        if edge_dim > table.dim:
            raise ValueError(f"edge_dim {edge_dim} exceeds embedding dim {table.dim}")
        self.table = table
        self.edge_dim = edge_dim
        self._nodes: dict[str, np.ndarray] = {}
        self._edges: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.table.dim

    def node_vector(self, label: str) -> np.ndarray:
        vec = self._nodes.get(label)
        if vec is None:
            vec = self._nodes[label] = self.table.token_vector(label)
        return vec

    def edge_vector(self, label: str) -> np.ndarray:
        vec = self._edges.get(label)
        if vec is None:
            vec = self._edges[label] = self.table.token_vector(label)[: self.edge_dim].copy()
        return vec

    def __call__(self, g: MathGraph) -> FeaturedGraph:
        x = np.array([self.node_vector(label) for label in g.labels], dtype=np.float64)
        if g.n_edges:
            e = np.array([self.edge_vector(label) for _, _, label in g.edges], dtype=np.float64)
        else:
            e = np.zeros((0, self.edge_dim))
        return FeaturedGraph(g, x.reshape(g.n_nodes, self.dim), e)


def featurize(g: MathGraph, table: EmbeddingTable, edge_dim: int = EDGE_DIM) -> FeaturedGraph:
    return Featurizer(table, edge_dim)(g)
