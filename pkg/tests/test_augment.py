from collections import Counter

import numpy as np
import pytest
from grammar import formulas
from hypothesis import given
from hypothesis import strategies as st

from formula_gcl.augment import (
    CONSISTENT,
    GENERIC_STRATEGIES,
    PER_NODE,
    AugmentConfig,
    SubstitutionMap,
    apply_substitution,
    augment,
    edge_drop,
    edge_feature_mask,
    node_drop,
    node_feature_mask,
    random_strategy_choice,
    sample_substitution,
)
from formula_gcl.errors import IncompleteMap, InputError, PoolTooSmall
from formula_gcl.formula import MathGraph, build_graph, graph_signature, parse_formula
from formula_gcl.formula.parser import GREEK, LATIN


def graph(text, layout="SLT"):
    return build_graph(parse_formula(text), layout)


def chain(labels):
    edges = tuple((i, i + 1, "NEXT") for i in range(len(labels) - 1))
    return MathGraph("SLT", tuple(labels), edges, 0)


def test_single_variable_never_maps_to_itself():
    cfg = AugmentConfig(var_pool=("x", "y"))
    for seed in range(50):
        m = sample_substitution(graph("x"), cfg, np.random.default_rng(seed))
        assert m.variables == {"x": "y"}


def test_pool_too_small():
    with pytest.raises(PoolTooSmall):
        sample_substitution(graph("x+y"), AugmentConfig(var_pool=("z",)), np.random.default_rng(0))


def test_injective_over_many_seeds():
    cfg = AugmentConfig(var_pool=("a", "b", "c"))
    g = graph("x+y")
    for seed in range(1000):
        m = sample_substitution(g, cfg, np.random.default_rng(seed))
        assert set(m.variables) == {"x", "y"}
        assert len(set(m.variables.values())) == 2
        assert set(m.variables.values()) <= {"a", "b", "c"}


def test_numbers_injective_and_changed():
    m = sample_substitution(graph("2 x+3+2"), AugmentConfig(), np.random.default_rng(4))
    assert set(m.numbers) == {"2", "3"}
    assert m.numbers["2"] != "2" and m.numbers["3"] != "3"
    assert m.numbers["2"] != m.numbers["3"]


def test_apply_relabels_only_symbols():
    g = chain(["V!x", "O!add", "V!x", "V!y"])
    out = apply_substitution(g, SubstitutionMap({"x": "a", "y": "b"}))
    assert out.labels == ("V!a", "O!add", "V!a", "V!b")
    assert out.edges == g.edges and out.root == g.root


def test_apply_numbers():
    out = apply_substitution(chain(["N!2"]), SubstitutionMap(numbers={"2": "7"}))
    assert out.labels == ("N!7",)


def test_empty_map_on_operator_graph():
    g = chain(["O!add", "S!lparen"])
    assert apply_substitution(g, SubstitutionMap()) == g


def test_incomplete_map():
    with pytest.raises(IncompleteMap):
        apply_substitution(chain(["V!x", "V!y"]), SubstitutionMap({"x": "a"}))


def test_folded_subscript_label_is_renamed_atomwise():
    g = graph("x_{i}+x_{2}", "OPT")
    out = apply_substitution(g, SubstitutionMap({"x": "a", "i": "j"}, {"2": "5"}))
    assert sorted(out.labels) == ["O!add", "V!a_5", "V!a_j"]


def test_per_node_mode_relabels_each_occurrence():
    g = graph("x+x+x")
    cfg = AugmentConfig(substitution_mode=PER_NODE)
    m = sample_substitution(g, cfg, np.random.default_rng(1))
    assert m.mode == PER_NODE
    out = apply_substitution(g, m)
    assert graph_signature(out, labels=False) == graph_signature(g, labels=False)
    assert all(lab != "V!x" for lab in out.labels if lab.startswith("V!"))
    with pytest.raises(InputError):
        m.inverse()


def test_node_drop_counts():
    g = chain(["V!a", "V!b", "V!c", "V!d", "V!e"])
    out = node_drop(g, 0.2, np.random.default_rng(0))
    assert out.n_nodes == 4 and out.n_edges < 4
    assert out.labels[out.root] == "V!a"
    single = chain(["V!a"])
    assert node_drop(single, 0.9, np.random.default_rng(0)) == single
    assert node_drop(g, 0.0, np.random.default_rng(0)) == g
    assert node_drop(g, 1.0, np.random.default_rng(0)).n_nodes == 1


def test_edge_drop_counts():
    g = chain(["V!a", "V!b", "V!c", "V!d", "V!e"])
    assert edge_drop(g, 0.25, np.random.default_rng(0)).n_edges == 3
    out = edge_drop(g, 1.0, np.random.default_rng(0))
    assert out.n_edges == 0 and out.labels == g.labels
    assert edge_drop(g, 0.0, np.random.default_rng(0)) == g


def test_node_feature_mask(small_featurizer):
    fg = small_featurizer(graph("a+b+c+d+e"))  # 9 nodes
    fg10 = small_featurizer(chain([f"V!{c}" for c in "abcdefghij"]))
    out = node_feature_mask(fg10, 0.2, np.random.default_rng(3))
    norms = np.linalg.norm(out.node_features, axis=1)
    assert (norms == 0).sum() == 2
    kept = norms > 0
    assert np.array_equal(out.node_features[kept], fg10.node_features[kept])
    assert out.graph is fg10.graph
    assert node_feature_mask(fg, 0.0, np.random.default_rng(0)) is fg


def test_edge_feature_mask(small_featurizer):
    fg = small_featurizer(chain([f"V!{c}" for c in "abcdefghijk"]))  # 10 edges
    out = edge_feature_mask(fg, 0.2, np.random.default_rng(3))
    norms = np.linalg.norm(out.edge_features, axis=1)
    assert (norms == 0).sum() == 2
    assert np.array_equal(out.edge_features[norms > 0], fg.edge_features[norms > 0])
    assert np.array_equal(out.node_features, fg.node_features)
    assert edge_feature_mask(fg, 0.0, np.random.default_rng(0)) is fg


def test_identity_augmentation(small_featurizer):
    fg = small_featurizer(graph("x+y"))
    assert augment(fg, AugmentConfig(strategy="Identity"), np.random.default_rng(0)) is fg


def test_varsub_refeaturizes_changed_nodes(small_featurizer):
    fg = small_featurizer(graph("x+y^{2}"))
    out = augment(fg, AugmentConfig(), np.random.default_rng(0), small_featurizer)
    assert graph_signature(out.graph, labels=False) == graph_signature(fg.graph, labels=False)
    for i, (a, b) in enumerate(zip(fg.graph.labels, out.graph.labels)):
        if a == b:
            assert np.array_equal(out.node_features[i], fg.node_features[i])
        else:
            assert np.array_equal(out.node_features[i], small_featurizer.node_vector(b))
    assert np.array_equal(out.edge_features, fg.edge_features)


def test_varsub_requires_featurizer(small_featurizer):
    with pytest.raises(InputError):
        augment(small_featurizer(graph("x")), AugmentConfig(), np.random.default_rng(0))


def test_random_strategy_frequencies():
    rng = np.random.default_rng(2024)
    counts = Counter(random_strategy_choice(rng) for _ in range(10_000))
    assert set(counts) == set(GENERIC_STRATEGIES)
    for strategy in GENERIC_STRATEGIES:
        assert abs(counts[strategy] / 10_000 - 0.25) <= 0.02


def test_config_validation():
    with pytest.raises(InputError):
        AugmentConfig(strategy="Shuffle")
    with pytest.raises(InputError):
        AugmentConfig(ratio=1.5)
    with pytest.raises(InputError):
        AugmentConfig(var_pool=())
    with pytest.raises(InputError):
        AugmentConfig(substitution_mode="Sometimes")


WIDE = AugmentConfig(var_pool=LATIN + GREEK, num_pool=tuple(str(i) for i in range(1000)))


@given(formulas(), st.sampled_from(["SLT", "OPT"]), st.integers(0, 2**32 - 1))
def test_varsub_preserves_topology_and_inverts(text, layout, seed):
    g = graph(text, layout)
    m = sample_substitution(g, WIDE, np.random.default_rng(seed))
    out = apply_substitution(g, m)
    assert out.n_nodes == g.n_nodes and out.root == g.root
    assert out.edges == g.edges
    assert out.node_kinds == g.node_kinds
    for a, b in zip(g.labels, out.labels):
        if a != b:
            assert a[0] in "VN"
    assert apply_substitution(out, m.inverse()) == g


@given(formulas(), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_drop_counts_exact(text, ratio, seed):
    g = graph(text)
    k = min(int(np.floor(ratio * g.n_nodes + 1e-9)), g.n_nodes - 1)
    dropped = node_drop(g, ratio, np.random.default_rng(seed))
    assert dropped.n_nodes == g.n_nodes - k
    assert dropped.labels[dropped.root] == g.labels[g.root]
    assert edge_drop(g, ratio, np.random.default_rng(seed)).n_edges == g.n_edges - int(
        np.floor(ratio * g.n_edges + 1e-9)
    )


def test_determinism(small_featurizer):
    fg = small_featurizer(graph("a+b*c-\\frac{d}{2}"))
    for strategy in ("VarSub", "NodeDrop", "EdgeDrop", "NodeFeatureMask", "EdgeFeatureMask", "Random"):
        cfg = AugmentConfig(strategy=strategy, ratio=0.3)
        a = augment(fg, cfg, np.random.default_rng(9), small_featurizer)
        b = augment(fg, cfg, np.random.default_rng(9), small_featurizer)
        assert a.graph == b.graph
        assert np.array_equal(a.node_features, b.node_features)
        assert np.array_equal(a.edge_features, b.edge_features)
    assert CONSISTENT == AugmentConfig().substitution_mode
