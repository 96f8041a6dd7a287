from .corpus import load_corpus, read_records, write_records
from .graph import (
    LAYOUTS,
    OPT,
    SLT,
    MathGraph,
    build_graph,
    build_opt,
    build_slt,
    format_graph,
    graph_signature,
    node_kind,
)
from .parser import Ast, parse_formula, tokenize, unparse, walk

__all__ = [
    "Ast",
    "LAYOUTS",
    "MathGraph",
    "OPT",
    "SLT",
    "build_graph",
    "build_opt",
    "build_slt",
    "format_graph",
    "graph_signature",
    "load_corpus",
    "node_kind",
    "parse_formula",
    "read_records",
    "tokenize",
    "unparse",
    "walk",
    "write_records",
]
