"""Symbol layout trees (SLT) and operator trees (OPT) built from parsed formulas."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .parser import (
    BINARY_OP,
    FRACTION,
    GROUP,
    IMPLICIT,
    NUMBER,
    SCRIPT,
    SQRT,
    UNARY_FUNC,
    VARIABLE,
    Ast,
)

SLT = "SLT"
OPT = "OPT"
LAYOUTS = (SLT, OPT)

NODE_KINDS = {
    "V": "Variable",
    "N": "Number",
    "O": "Operator",
    "F": "Function",
    "S": "Structure",
}

SLT_EDGE_LABELS = ("NEXT", "SUP", "SUB", "OVER", "UNDER", "WITHIN")

OP_NAMES = {"+": "add", "-": "minus", "*": "times", IMPLICIT: "times"}


def node_kind(label: str) -> str:
    return NODE_KINDS[label.split("!", 1)[0]]


@dataclass(frozen=True)
class MathGraph:
    """Labeled directed graph with dense node ids.

    Built graphs are rooted trees; augmented ones may be forests.
    """

    layout: str
    labels: tuple[str, ...]
    edges: tuple[tuple[int, int, str], ...]
    root: int

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def node_kinds(self) -> tuple[str, ...]:
        return tuple(node_kind(label) for label in self.labels)

    @cached_property
    def out_edges(self) -> tuple[tuple[tuple[str, int], ...], ...]:
        out: list[list[tuple[str, int]]] = [[] for _ in self.labels]
        for src, dst, label in self.edges:
            out[src].append((label, dst))
        return tuple(tuple(x) for x in out)

    def is_tree(self) -> bool:
        n = self.n_nodes
        if n == 0 or not 0 <= self.root < n or len(self.edges) != n - 1:
            return False
        indegree = [0] * n
        for _, dst, _ in self.edges:
            indegree[dst] += 1
        if indegree[self.root] != 0:
            return False
        if any(d != 1 for i, d in enumerate(indegree) if i != self.root):
            return False
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            for _, child in self.out_edges[queue.popleft()]:
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
        return len(seen) == n

    def relabel(self, labels) -> MathGraph:
        labels = tuple(labels)
        if len(labels) != self.n_nodes:
            raise ValueError("label count does not match node count")
        return MathGraph(self.layout, labels, self.edges, self.root)


class _Builder:
    def __init__(self):
        self.labels: list[str] = []
        self.edges: list[tuple[int, int, str]] = []

    def node(self, label: str) -> int:
        self.labels.append(label)
        return len(self.labels) - 1

    def edge(self, src: int, dst: int, label: str):
        self.edges.append((src, dst, label))

    def graph(self, layout: str, root: int) -> MathGraph:
        return MathGraph(layout, tuple(self.labels), tuple(self.edges), root)


def _symbol_label(node: Ast) -> str:
    if node.kind == VARIABLE:
        return "V!" + node.lexeme
    return "N!" + node.lexeme


def build_slt(ast: Ast) -> MathGraph:
    """Symbol layout tree: baselines become NEXT chains, scripts and stacks hang off them."""
    b = _Builder()

    def baseline(node: Ast) -> list[int]:
        kind = node.kind
        if kind in (VARIABLE, NUMBER):
            return [b.node(_symbol_label(node))]
        if kind == BINARY_OP:
            left = baseline(node.children[0])
            middle = [] if node.lexeme == IMPLICIT else [b.node("O!" + OP_NAMES[node.lexeme])]
            return left + middle + baseline(node.children[1])
        if kind == GROUP:
            lp = b.node("S!lparen")
            inner = baseline(node.children[0])
            return [lp] + inner + [b.node("S!rparen")]
        if kind == UNARY_FUNC:
            fn = b.node("F!" + node.lexeme.lstrip("\\"))
            lp = b.node("S!lparen")
            inner = baseline(node.children[0])
            return [fn, lp] + inner + [b.node("S!rparen")]
        if kind == FRACTION:
            frac = b.node("S!frac")
            b.edge(frac, chain(node.children[0]), "OVER")
            b.edge(frac, chain(node.children[1]), "UNDER")
            return [frac]
        if kind == SQRT:
            root = b.node("S!sqrt")
            b.edge(root, chain(node.children[0]), "WITHIN")
            return [root]
        if kind == SCRIPT:
            symbols = baseline(node.base)
            # scripts attach to the last symbol written before them
            anchor = symbols[-1]
            if node.sup is not None:
                b.edge(anchor, chain(node.sup), "SUP")
            if node.sub is not None:
                b.edge(anchor, chain(node.sub), "SUB")
            return symbols
        raise ValueError(f"unknown node kind {kind!r}")

    def chain(node: Ast) -> int:
        symbols = baseline(node)
        for a, c in zip(symbols, symbols[1:]):
            b.edge(a, c, "NEXT")
        return symbols[0]

    root = chain(ast)
    return b.graph(SLT, root)


def build_opt(ast: Ast) -> MathGraph:
    """Operator tree: operators internal, operands attached by positional ARGi edges."""
    b = _Builder()

    def visit(node: Ast) -> int:
        kind = node.kind
        if kind in (VARIABLE, NUMBER):
            return b.node(_symbol_label(node))
        if kind == GROUP:
            return visit(node.children[0])
        if kind == SCRIPT and node.sub is not None and _foldable_subscript(node):
            label = f"V!{node.base.lexeme}_{node.sub.lexeme}"
            if node.sup is None:
                return b.node(label)
            pow_node = b.node("O!pow")
            b.edge(pow_node, b.node(label), "ARG0")
            b.edge(pow_node, visit(node.sup), "ARG1")
            return pow_node
        if kind == SCRIPT:
            base = node.base
            if node.sub is not None:
                # only variable subscripts fold into labels; others stay operators
                op = b.node("O!subscript")
                b.edge(op, visit(base), "ARG0")
                b.edge(op, visit(node.sub), "ARG1")
                if node.sup is None:
                    return op
                pow_node = b.node("O!pow")
                b.edge(pow_node, op, "ARG0")
                b.edge(pow_node, visit(node.sup), "ARG1")
                return pow_node
            pow_node = b.node("O!pow")
            b.edge(pow_node, visit(base), "ARG0")
            b.edge(pow_node, visit(node.sup), "ARG1")
            return pow_node
        if kind == BINARY_OP:
            label = "O!" + OP_NAMES[node.lexeme]
        elif kind == UNARY_FUNC:
            label = "F!" + node.lexeme.lstrip("\\")
        elif kind == FRACTION:
            label = "S!frac"
        elif kind == SQRT:
            label = "S!sqrt"
        else:
            raise ValueError(f"unknown node kind {kind!r}")
        me = b.node(label)
        for i, child in enumerate(node.children):
            b.edge(me, visit(child), f"ARG{i}")
        return me

    root = visit(ast)
    return b.graph(OPT, root)


def _foldable_subscript(node: Ast) -> bool:
    return node.base.kind == VARIABLE and node.sub.kind in (VARIABLE, NUMBER)


def build_graph(ast: Ast, layout: str) -> MathGraph:
    layout = layout.upper()
    if layout == SLT:
        return build_slt(ast)
    if layout == OPT:
        return build_opt(ast)
    raise ValueError(f"unknown layout {layout!r}")


def graph_signature(g: MathGraph, labels: bool = True) -> str:
    """Canonical serialization: depth-first from the root, children sorted by
    edge label then child signature.

    With ``labels=False`` node labels are replaced by their node kind, giving a
    topology signature that ignores variable and number identities.  Nodes not
    reachable from the root (possible after augmentation) are appended as
    further components in id order.
    """
    out_edges = g.out_edges
    seen: set[int] = set()

    def sig(v: int) -> str:
        seen.add(v)
        head = g.labels[v] if labels else node_kind(g.labels[v])[0]
        parts = sorted(
            (edge_label, sig(child)) for edge_label, child in out_edges[v] if child not in seen
        )
        if not parts:
            return head
        return head + "[" + ",".join(f"{e}:{s}" for e, s in parts) + "]"

    components = [sig(g.root)] if g.n_nodes else []
    indegree = [0] * g.n_nodes
    for _, dst, _ in g.edges:
        indegree[dst] += 1
    for v in range(g.n_nodes):
        if v not in seen and indegree[v] == 0:
            components.append(sig(v))
    for v in range(g.n_nodes):
        if v not in seen:
            components.append(sig(v))
    return f"{g.layout}:" + "|".join(components)


def format_graph(g: MathGraph) -> str:
    """Human-readable listing used by the ``parse`` subcommand."""
    lines = [f"signature {graph_signature(g)}", f"root {g.root}", f"nodes {g.n_nodes}"]
    lines += [f"  {i} {label}" for i, label in enumerate(g.labels)]
    lines.append(f"edges {g.n_edges}")
    lines += [f"  {src} -{label}-> {dst}" for src, dst, label in g.edges]
    return "\n".join(lines)


__all__ = [
    "LAYOUTS",
    "MathGraph",
    "OPT",
    "SLT",
    "build_graph",
    "build_opt",
    "build_slt",
    "format_graph",
    "graph_signature",
    "node_kind",
]
