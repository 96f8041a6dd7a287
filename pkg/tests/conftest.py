from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from formula_gcl.embed import Featurizer, TokenEmbedConfig, build_vocab, corpus_walks, train_token_embeddings
from formula_gcl.evalbench import SynthConfig, generate_synthetic_benchmark
from formula_gcl.formula import build_graph, parse_formula

settings.register_profile("repo", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

SMALL_FORMULAS = [
    "x+y",
    "x^{2}+1",
    "\\frac{a}{b+c}",
    "\\sqrt{x} y",
    "\\sin(\\alpha)+\\cos(\\beta)",
    "a_{i} b_{2}",
    "(x-1)*(x+1)",
    "e^{x y}",
    "2 \\pi r",
    "\\log(n)-\\exp(t_{0})",
    "z",
    "\\frac{1}{2} m v^{2}",
]


@pytest.fixture(scope="session")
def small_table():
    """Token table trained briefly on a handful of formulas in both layouts."""
    rng = np.random.default_rng(11)
    graphs = [build_graph(parse_formula(t), layout) for t in SMALL_FORMULAS for layout in ("SLT", "OPT")]
    walks = corpus_walks(graphs, 4, 5, rng)
    cfg = TokenEmbedConfig(epochs=2, buckets=2**10)
    table, _ = train_token_embeddings(walks, build_vocab(walks), cfg, rng)
    return table


@pytest.fixture(scope="session")
def small_featurizer(small_table):
    return Featurizer(small_table)


@pytest.fixture(scope="session")
def tiny_benchmark():
    return generate_synthetic_benchmark(SynthConfig(bases=12, variants_per_base=2, total=48), np.random.default_rng(3))
