"""Desk-scale synthetic retrieval benchmark.

Each base formula becomes a query.  Its relevant documents are consistent
renamings of its variables and numbers (score 3); near-misses with one
operator swapped get score 1; a few documents from other groups are judged
non-relevant (score 0); distractors pad the corpus and stay unjudged.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..formula.corpus import write_records
from ..formula.parser import (
    BINARY_OP,
    FUNCTIONS,
    GROUP,
    IMPLICIT,
    NUMBER,
    UNARY_FUNC,
    VARIABLE,
    Ast,
    binop,
    num,
    parse_formula,
    script,
    unparse,
    var,
    walk,
)
from .metrics import write_qrels

LETTERS = tuple("abcdefghijklmnopqrstuvwxyz")
DIGITS = tuple(str(i) for i in range(10))


@dataclass(frozen=True)
class SynthConfig:
    bases: int = 200
    variants_per_base: int = 4
    near_misses_per_base: int = 1
    total: int = 1000
    max_depth: int = 4
    zeros_per_query: int = 5
    min_symbols: int = 3
    max_symbols: int = 14


@dataclass
class Benchmark:
    corpus: list[tuple[str, str]]
    queries: list[tuple[str, str]]
    qrels: dict[str, dict[str, int]]


def _group(node: Ast) -> Ast:
    return Ast(GROUP, "()", (node,))


def _is_additive(node: Ast) -> bool:
    return node.kind == BINARY_OP and node.lexeme in ("+", "-")


def _is_product(node: Ast) -> bool:
    return node.kind == BINARY_OP and node.lexeme in ("*", IMPLICIT)


class _Generator:
    def __init__(self, rng: np.random.Generator, max_depth: int):
        self.rng = rng
        self.max_depth = max_depth

    def pick(self, items):
        return items[int(self.rng.integers(len(items)))]

    def formula(self) -> Ast:
        k = int(self.rng.integers(1, 4))
        self.letters = list(self.rng.choice(LETTERS, size=k, replace=False))
        return self.expr(0)

    def leaf(self) -> Ast:
        if self.rng.random() < 0.72:
            return var(self.pick(self.letters))
        return num(self.pick(DIGITS[1:]))

    def atom(self, depth: int) -> Ast:
        """Something that may carry a script without extra parentheses."""
        r = self.rng.random()
        if depth >= self.max_depth - 1 or r < 0.7:
            return self.leaf()
        if r < 0.85:
            return _group(self.expr(depth + 1))
        return Ast(UNARY_FUNC, self.pick(FUNCTIONS), (self.expr(depth + 1),))

    def expr(self, depth: int) -> Ast:
        if depth >= self.max_depth or (depth > 0 and self.rng.random() < 0.3):
            return self.leaf()
        r = self.rng.random()
        if r < 0.5:
            op = self.pick(["+", "+", "-", "*", IMPLICIT, IMPLICIT])
            left, right = self.expr(depth + 1), self.expr(depth + 1)
            if op in ("+", "-"):
                right = _group(right) if _is_additive(right) else right
            else:
                left = _group(left) if _is_additive(left) else left
                right = _group(right) if (_is_additive(right) or _is_product(right)) else right
            return binop(op, left, right)
        if r < 0.64:
            return script(self.atom(depth + 1), sup=self.expr(min(depth + 2, self.max_depth)))
        if r < 0.69:
            return script(var(self.pick(self.letters)), sub=self.pick([var(self.pick(self.letters)), num(self.pick(DIGITS))]))
        if r < 0.79:
            return Ast("Fraction", "\\frac", (self.expr(depth + 1), self.expr(depth + 1)))
        if r < 0.86:
            return Ast("Sqrt", "\\sqrt", (self.expr(depth + 1),))
        return Ast(UNARY_FUNC, self.pick(FUNCTIONS), (self.expr(depth + 1),))


def _canonical(ast: Ast) -> Ast:
    return parse_formula(unparse(ast))


def _symbols(ast: Ast) -> list[Ast]:
    return [n for n in walk(ast) if n.kind in (VARIABLE, NUMBER)]


def alpha_key(ast: Ast) -> str:
    """Text with variables and numbers renamed by first appearance; equal keys = alpha-equivalent."""
    names: dict[tuple[str, str], str] = {}

    def rename(node: Ast) -> Ast:
        if node.kind in (VARIABLE, NUMBER):
            key = (node.kind, node.lexeme)
            if key not in names:
                names[key] = ("v" if node.kind == VARIABLE else "n") + str(len(names))
            return Ast(node.kind, names[key])
        return Ast(node.kind, node.lexeme, tuple(rename(c) for c in node.children))

    return unparse(rename(ast))


def rename_symbols(ast: Ast, var_map: dict[str, str], num_map: dict[str, str]) -> Ast:
    if ast.kind == VARIABLE:
        return var(var_map.get(ast.lexeme, ast.lexeme))
    if ast.kind == NUMBER:
        return num(num_map.get(ast.lexeme, ast.lexeme))
    return Ast(ast.kind, ast.lexeme, tuple(rename_symbols(c, var_map, num_map) for c in ast.children))


def _fresh_map(rng, names: list[str], pool) -> dict[str, str]:
    while True:
        picks = rng.choice(len(pool), size=len(names), replace=False)
        mapping = {n: pool[p] for n, p in zip(names, picks)}
        if all(mapping[n] != n for n in names):
            return mapping


def alpha_rename(ast: Ast, rng: np.random.Generator) -> Ast:
    """Consistent injective renaming with every variable and number changed."""
    variables = sorted({n.lexeme for n in _symbols(ast) if n.kind == VARIABLE})
    numbers = sorted({n.lexeme for n in _symbols(ast) if n.kind == NUMBER})
    return rename_symbols(ast, _fresh_map(rng, variables, LETTERS), _fresh_map(rng, numbers, DIGITS))


_OP_SWAPS = {"+": ["-"], "-": ["+"], "*": ["+", "-"], IMPLICIT: ["+", "-"]}


def near_miss(ast: Ast, rng: np.random.Generator) -> Ast:
    """Change exactly one binary operator or function name."""
    sites = [n for n in walk(ast) if n.kind in (BINARY_OP, UNARY_FUNC)]
    target = sites[int(rng.integers(len(sites)))]
    if target.kind == BINARY_OP:
        choices = _OP_SWAPS[target.lexeme]
    else:
        choices = [f for f in FUNCTIONS if f != target.lexeme]
    new_lexeme = choices[int(rng.integers(len(choices)))]
    done = False

    def swap(node: Ast) -> Ast:
        nonlocal done
        if node is target and not done:
            done = True
            return Ast(node.kind, new_lexeme, node.children)
        return Ast(node.kind, node.lexeme, tuple(swap(c) for c in node.children))

    return _canonical(swap(ast))


def _usable(ast: Ast, cfg: SynthConfig) -> bool:
    symbols = _symbols(ast)
    return (
        cfg.min_symbols <= len(symbols) <= cfg.max_symbols
        and any(n.kind == VARIABLE for n in symbols)
        and any(n.kind in (BINARY_OP, UNARY_FUNC) for n in walk(ast))
    )


def generate_synthetic_benchmark(cfg: SynthConfig, rng: np.random.Generator) -> Benchmark:
    per_base = cfg.variants_per_base + cfg.near_misses_per_base
    if min(cfg.bases, cfg.variants_per_base, cfg.total) < 1 or cfg.near_misses_per_base < 0:
        raise InputError("bases, variants_per_base and total must be >= 1")
    if cfg.bases * per_base > cfg.total:
        raise InputError(f"{cfg.bases} bases x {per_base} documents exceed corpus size {cfg.total}")
    gen = _Generator(rng, cfg.max_depth)
    seen_keys: set[str] = set()

    def fresh_formula() -> Ast:
        for _ in range(10_000):
            ast = _canonical(gen.formula())
            key = alpha_key(ast)
            if _usable(ast, cfg) and key not in seen_keys:
                seen_keys.add(key)
                return ast
        raise InputError("could not generate enough distinct formulas; relax the size limits")

    bases = [fresh_formula() for _ in range(cfg.bases)]
    docs: list[tuple[int, str, int]] = []  # (base index or -1, latex, score)
    for b, base in enumerate(bases):
        texts = {unparse(base)}
        made = 0
        while made < cfg.variants_per_base:
            text = unparse(alpha_rename(base, rng))
            if text not in texts:
                texts.add(text)
                docs.append((b, text, 3))
                made += 1
        made = 0
        for _ in range(1000):
            if made == cfg.near_misses_per_base:
                break
            miss = near_miss(base, rng)
            key, text = alpha_key(miss), unparse(miss)
            if key not in seen_keys and text not in texts:
                texts.add(text)
                docs.append((b, text, 1))
                made += 1
    while len(docs) < cfg.total:
        docs.append((-1, unparse(fresh_formula()), 0))

    order = rng.permutation(len(docs))
    width = len(str(len(docs)))
    corpus, group_of = [], {}
    qrels: dict[str, dict[str, int]] = {f"q{b + 1:03d}": {} for b in range(cfg.bases)}
    for pos, d in enumerate(order):
        b, text, score = docs[d]
        doc_id = f"f{pos + 1:0{width}d}"
        corpus.append((doc_id, text))
        group_of[doc_id] = b
        if b >= 0:
            qrels[f"q{b + 1:03d}"][doc_id] = score
    all_ids = [doc_id for doc_id, _ in corpus]
    for b in range(cfg.bases):
        qid = f"q{b + 1:03d}"
        others = [d for d in all_ids if group_of[d] != b]
        k = min(cfg.zeros_per_query, len(others))
        for idx in sorted(rng.choice(len(others), size=k, replace=False)):
            qrels[qid][others[idx]] = 0
        qrels[qid] = dict(sorted(qrels[qid].items()))
    queries = [(f"q{b + 1:03d}", unparse(base)) for b, base in enumerate(bases)]
    return Benchmark(corpus, queries, qrels)


def write_benchmark(bench: Benchmark, directory, seed: int | None = None) -> tuple[Path, Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header = f"synthetic benchmark, seed={seed}" if seed is not None else None
    paths = (directory / "corpus.jsonl", directory / "queries.jsonl", directory / "qrels.txt")
    write_records(bench.corpus, paths[0], header)
    write_records(bench.queries, paths[1], header)
    write_qrels(bench.qrels, paths[2])
    return paths
