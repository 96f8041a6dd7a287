"""Random-walk path sampling over formula graphs."""

from __future__ import annotations

import numpy as np

from ..formula.graph import MathGraph


def sample_walks(g: MathGraph, walks_per_node: int, max_len: int, rng: np.random.Generator) -> list[list[str]]:
    """Start ``walks_per_node`` walks at every node, following out-edges uniformly.

    A walk is ``[node, edge, node, edge, ...]`` and stops after ``max_len``
    node visits or at a node without outgoing edges.
    """
    if walks_per_node < 1 or max_len < 1:
        raise ValueError("walks_per_node and max_len must be >= 1")
    out = g.out_edges
    n = g.n_nodes
    # draw all step variates up front; one row per walk
    u = rng.random((n * walks_per_node, max(max_len - 1, 1)))
    walks = []
    row = 0
    for start in range(n):
        for _ in range(walks_per_node):
            v = start
            walk = [g.labels[v]]
            for step in range(max_len - 1):
                choices = out[v]
                if not choices:
                    break
                edge_label, v = choices[int(u[row, step] * len(choices))]
                walk.append(edge_label)
                walk.append(g.labels[v])
            walks.append(walk)
            row += 1
    return walks


def corpus_walks(graphs, walks_per_node: int, max_len: int, rng: np.random.Generator) -> list[list[str]]:
    walks = []
    for g in graphs:
        walks.extend(sample_walks(g, walks_per_node, max_len, rng))
    return walks
