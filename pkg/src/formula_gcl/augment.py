"""Graph augmentations for contrastive training.

``VarSub`` (variable substitution) renames variable and number nodes while
keeping every edge, edge label, operator and the root in place.  The generic
strategies drop nodes or edges, or zero out node / edge feature rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .embed.featurize import FeaturedGraph, Featurizer
from .errors import IncompleteMap, InputError, PoolTooSmall
from .formula.graph import MathGraph

VAR_SUB = "VarSub"
NODE_DROP = "NodeDrop"
EDGE_DROP = "EdgeDrop"
NODE_FEATURE_MASK = "NodeFeatureMask"
EDGE_FEATURE_MASK = "EdgeFeatureMask"
RANDOM = "Random"
IDENTITY = "Identity"

GENERIC_STRATEGIES = (NODE_DROP, EDGE_DROP, NODE_FEATURE_MASK, EDGE_FEATURE_MASK)
STRATEGIES = (VAR_SUB,) + GENERIC_STRATEGIES + (RANDOM, IDENTITY)

CONSISTENT = "Consistent"
PER_NODE = "PerNode"

DEFAULT_VAR_POOL = tuple("abcdefghijklmnopqrstuvwxyz")
DEFAULT_NUM_POOL = tuple(str(i) for i in range(10))


@dataclass(frozen=True)
class AugmentConfig:
    strategy: str = VAR_SUB
    ratio: float = 0.2
    var_pool: tuple[str, ...] = DEFAULT_VAR_POOL
    num_pool: tuple[str, ...] = DEFAULT_NUM_POOL
    substitution_mode: str = CONSISTENT

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InputError(f"unknown augmentation strategy {self.strategy!r}")
        if not 0.0 <= self.ratio <= 1.0:
            raise InputError(f"ratio must lie in [0, 1], got {self.ratio}")
        if self.substitution_mode not in (CONSISTENT, PER_NODE):
            raise InputError(f"unknown substitution mode {self.substitution_mode!r}")
        if self.strategy == VAR_SUB and (not self.var_pool or not self.num_pool):
            raise InputError("variable substitution needs non-empty pools")
        object.__setattr__(self, "var_pool", tuple(self.var_pool))
        object.__setattr__(self, "num_pool", tuple(self.num_pool))


@dataclass
class SubstitutionMap:
    variables: dict[str, str] = field(default_factory=dict)
    numbers: dict[str, str] = field(default_factory=dict)
    mode: str = CONSISTENT
    # PerNode mode only: node id -> replacement lexeme for that single node
    nodes: dict[int, str] = field(default_factory=dict)

    def inverse(self) -> SubstitutionMap:
        if self.mode != CONSISTENT:
            raise InputError("only consistent substitutions are invertible")
        return SubstitutionMap(
            {v: k for k, v in self.variables.items()},
            {v: k for k, v in self.numbers.items()},
        )


def _is_number(atom: str) -> bool:
    return atom[:1].isdigit()


def _split_lexeme(lexeme: str) -> tuple[str, ...]:
    # OPT folds simple subscripts into the variable label: "x_i" -> ("x", "i")
    return tuple(lexeme.split("_", 1))


def symbol_atoms(g: MathGraph) -> tuple[list[str], list[str]]:
    """Distinct variable and number atoms of ``g`` in sorted order."""
    variables, numbers = set(), set()
    for label in g.labels:
        prefix, lexeme = label.split("!", 1)
        if prefix == "V":
            for atom in _split_lexeme(lexeme):
                (numbers if _is_number(atom) else variables).add(atom)
        elif prefix == "N":
            numbers.add(lexeme)
    return sorted(variables), sorted(numbers)


def _injective_draw(atoms: list[str], pool: tuple[str, ...], rng, what: str) -> dict[str, str]:
    if not atoms:
        return {}
    if len(atoms) > len(pool):
        raise PoolTooSmall(f"{len(atoms)} distinct {what} but only {len(pool)} replacements in pool")
    pool_arr = np.array(pool, dtype=object)
    for _ in range(100):
        picks = rng.choice(len(pool), size=len(atoms), replace=False)
        mapping = dict(zip(atoms, pool_arr[picks].tolist()))
        if all(mapping[a] != a for a in atoms) or len(pool) == 1:
            return mapping
    # practically unreachable; repair remaining fixed points deterministically
    used = set(mapping.values())
    for a in atoms:
        if mapping[a] != a:
            continue
        spare = [p for p in pool if p not in used and p != a]
        if spare:
            used.discard(a)
            mapping[a] = spare[0]
            used.add(spare[0])
            continue
        for b in atoms:
            if b != a and mapping[b] != a and mapping[a] != b:
                mapping[a], mapping[b] = mapping[b], mapping[a]
                break
    return mapping


def sample_substitution(g: MathGraph, cfg: AugmentConfig, rng: np.random.Generator) -> SubstitutionMap:
    variables, numbers = symbol_atoms(g)
    if cfg.substitution_mode == CONSISTENT:
        return SubstitutionMap(
            _injective_draw(variables, cfg.var_pool, rng, "variables"),
            _injective_draw(numbers, cfg.num_pool, rng, "numbers"),
        )
    nodes = {}
    for i, label in enumerate(g.labels):
        prefix, lexeme = label.split("!", 1)
        if prefix not in ("V", "N"):
            continue
        parts = []
        for atom in (_split_lexeme(lexeme) if prefix == "V" else (lexeme,)):
            pool = cfg.num_pool if _is_number(atom) else cfg.var_pool
            choices = [p for p in pool if p != atom] or list(pool)
            parts.append(choices[rng.integers(len(choices))])
        nodes[i] = "_".join(parts)
    return SubstitutionMap(mode=PER_NODE, nodes=nodes)


def apply_substitution(g: MathGraph, m: SubstitutionMap) -> MathGraph:
    """Rewrite variable / number lexemes; ids, edges, root and operators are untouched."""
    labels = list(g.labels)
    for i, label in enumerate(labels):
        prefix, lexeme = label.split("!", 1)
        if prefix not in ("V", "N"):
            continue
        if m.mode == PER_NODE:
            if i in m.nodes:
                labels[i] = f"{prefix}!{m.nodes[i]}"
            continue
        if prefix == "N":
            labels[i] = "N!" + m.numbers.get(lexeme, lexeme)
            continue
        parts = []
        for atom in _split_lexeme(lexeme):
            if _is_number(atom):
                parts.append(m.numbers.get(atom, atom))
            elif atom in m.variables:
                parts.append(m.variables[atom])
            else:
                raise IncompleteMap(f"no replacement for variable {atom!r}")
        labels[i] = "V!" + "_".join(parts)
    return g.relabel(labels)


def _count(ratio: float, n: int) -> int:
    # guard against 0.29 * 100 == 28.999999999999996
    return int(math.floor(ratio * n + 1e-9))


def _keep_nodes(g: MathGraph, keep: np.ndarray) -> tuple[MathGraph, np.ndarray]:
    remap = -np.ones(g.n_nodes, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    edge_keep = [j for j, (s, d, _) in enumerate(g.edges) if remap[s] >= 0 and remap[d] >= 0]
    edges = tuple((int(remap[g.edges[j][0]]), int(remap[g.edges[j][1]]), g.edges[j][2]) for j in edge_keep)
    labels = tuple(g.labels[i] for i in keep)
    return MathGraph(g.layout, labels, edges, int(remap[g.root])), np.asarray(edge_keep, dtype=np.int64)


def node_drop(g, ratio: float, rng: np.random.Generator):
    """Remove ``min(floor(ratio*|V|), |V|-1)`` uniformly chosen non-root nodes.

    Accepts a MathGraph or a FeaturedGraph and returns the same type.
    """
    fg = g if isinstance(g, FeaturedGraph) else None
    graph = fg.graph if fg is not None else g
    n = graph.n_nodes
    k = min(_count(ratio, n), n - 1)
    if k <= 0:
        return g
    candidates = np.array([i for i in range(n) if i != graph.root], dtype=np.int64)
    dropped = rng.choice(candidates, size=k, replace=False)
    keep = np.setdiff1d(np.arange(n), dropped)
    new_graph, edge_keep = _keep_nodes(graph, keep)
    if fg is None:
        return new_graph
    return FeaturedGraph(new_graph, fg.node_features[keep], fg.edge_features[edge_keep])


def edge_drop(g, ratio: float, rng: np.random.Generator):
    """Remove ``floor(ratio*|E|)`` uniformly chosen edges; nodes stay."""
    fg = g if isinstance(g, FeaturedGraph) else None
    graph = fg.graph if fg is not None else g
    k = _count(ratio, graph.n_edges)
    if k <= 0:
        return g
    dropped = rng.choice(graph.n_edges, size=k, replace=False)
    keep = np.setdiff1d(np.arange(graph.n_edges), dropped)
    new_graph = MathGraph(graph.layout, graph.labels, tuple(graph.edges[j] for j in keep), graph.root)
    if fg is None:
        return new_graph
    return FeaturedGraph(new_graph, fg.node_features, fg.edge_features[keep])


def node_feature_mask(fg: FeaturedGraph, ratio: float, rng: np.random.Generator) -> FeaturedGraph:
    k = _count(ratio, fg.graph.n_nodes)
    if k <= 0:
        return fg
    rows = rng.choice(fg.graph.n_nodes, size=k, replace=False)
    x = fg.node_features.copy()
    x[rows] = 0.0
    return replace(fg, node_features=x)


def edge_feature_mask(fg: FeaturedGraph, ratio: float, rng: np.random.Generator) -> FeaturedGraph:
    k = _count(ratio, fg.graph.n_edges)
    if k <= 0:
        return fg
    rows = rng.choice(fg.graph.n_edges, size=k, replace=False)
    e = fg.edge_features.copy()
    e[rows] = 0.0
    return replace(fg, edge_features=e)


def variable_substitution(
    fg: FeaturedGraph, cfg: AugmentConfig, rng: np.random.Generator, featurizer: Featurizer
) -> FeaturedGraph:
    mapping = sample_substitution(fg.graph, cfg, rng)
    graph = apply_substitution(fg.graph, mapping)
    x = fg.node_features
    changed = [i for i, (a, b) in enumerate(zip(fg.graph.labels, graph.labels)) if a != b]
    if changed:
        x = x.copy()
        for i in changed:
            x[i] = featurizer.node_vector(graph.labels[i])
    return FeaturedGraph(graph, x, fg.edge_features)


def augment(
    fg: FeaturedGraph,
    cfg: AugmentConfig,
    rng: np.random.Generator,
    featurizer: Featurizer | None = None,
) -> FeaturedGraph:
    strategy = cfg.strategy
    if strategy == RANDOM:
        strategy = random_strategy_choice(rng)
    if strategy == IDENTITY:
        return fg
    if strategy == VAR_SUB:
        if featurizer is None:
            raise InputError("variable substitution needs a featurizer to embed new labels")
        return variable_substitution(fg, cfg, rng, featurizer)
    if strategy == NODE_DROP:
        return node_drop(fg, cfg.ratio, rng)
    if strategy == EDGE_DROP:
        return edge_drop(fg, cfg.ratio, rng)
    if strategy == NODE_FEATURE_MASK:
        return node_feature_mask(fg, cfg.ratio, rng)
    return edge_feature_mask(fg, cfg.ratio, rng)


def random_strategy_choice(rng: np.random.Generator) -> str:
    """The draw ``augment`` makes for the Random strategy (exposed for frequency checks)."""
    return GENERIC_STRATEGIES[int(rng.integers(len(GENERIC_STRATEGIES)))]


__all__ = [
    "AugmentConfig",
    "CONSISTENT",
    "GENERIC_STRATEGIES",
    "PER_NODE",
    "STRATEGIES",
    "SubstitutionMap",
    "apply_substitution",
    "augment",
    "edge_drop",
    "edge_feature_mask",
    "node_drop",
    "node_feature_mask",
    "sample_substitution",
    "symbol_atoms",
]
