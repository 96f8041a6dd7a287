import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from formula_gcl.embed import EmbeddingTable, Vocabulary, featurize, load_table, save_table, table_bytes
from formula_gcl.embed.subword import char_ngrams, fnv1a, ngram_buckets
from formula_gcl.errors import CorruptFile, VersionMismatch
from formula_gcl.formula import MathGraph, build_graph, parse_formula


def make_table(rng, tokens=("V!x", "V!y", "NEXT"), dim=8, buckets=64):
    vocab = Vocabulary(list(tokens), [3] * len(tokens))
    return EmbeddingTable(
        vocab,
        rng.normal(size=(len(tokens), dim)).astype(np.float32),
        rng.normal(size=(len(tokens), dim)).astype(np.float32),
        rng.normal(size=(buckets, dim)).astype(np.float32),
        seed=5,
    )


def test_fnv1a_reference_values():
    # published 32-bit FNV-1a test vectors
    assert fnv1a(b"") == 0x811C9DC5
    assert fnv1a(b"a") == 0xE40C292C
    assert fnv1a(b"foobar") == 0xBF9CF968


def test_char_ngrams():
    assert char_ngrams("ab", 3, 5) == ["<ab", "ab>"]
    assert char_ngrams("x", 3, 5) == []
    assert "<V!x>" not in char_ngrams("V!x", 3, 5)


def test_in_vocab_with_zero_buckets_is_token_row():
    table = make_table(np.random.default_rng(0))
    table.buckets[:] = 0
    assert np.array_equal(table.token_vector("V!x"), table.input[0].astype(np.float64))


def test_oov_shares_subword_part():
    table = make_table(np.random.default_rng(0))
    ids = table.subword_ids("V!x")
    expected = table.buckets[list(ids)].astype(np.float64).mean(axis=0)
    # the OOV variant sees only the bucket mean; the in-vocab token adds its row
    assert np.allclose(table.token_vector("V!x") - table.input[0], expected)
    twin = make_table(np.random.default_rng(0), tokens=("V!y", "NEXT", "O!add"))
    assert np.allclose(twin.token_vector("V!x"), expected)


def test_oov_short_token_is_zero():
    table = make_table(np.random.default_rng(0))
    assert not table.token_vector("q").any()


@given(st.text(max_size=12))
def test_token_vector_total_and_finite(token):
    table = make_table(np.random.default_rng(1))
    vec = table.token_vector(token)
    assert vec.shape == (8,) and np.isfinite(vec).all()
    assert np.array_equal(vec, table.token_vector(token))


def test_round_trip(tmp_path):
    table = make_table(np.random.default_rng(2))
    save_table(table, tmp_path / "t.ftem")
    loaded = load_table(tmp_path / "t.ftem")
    assert loaded.vocab.tokens == table.vocab.tokens and loaded.vocab.counts == table.vocab.counts
    for name in ("input", "output", "buckets"):
        assert np.array_equal(getattr(loaded, name), getattr(table, name))
    assert loaded.seed == 5
    assert table_bytes(loaded) == table_bytes(table)


def test_truncated_and_version(tmp_path):
    table = make_table(np.random.default_rng(2))
    raw = table_bytes(table)
    (tmp_path / "short.ftem").write_bytes(raw[:-3])
    with pytest.raises(CorruptFile):
        load_table(tmp_path / "short.ftem")
    bumped = raw[:4] + (99).to_bytes(4, "little") + raw[8:]
    (tmp_path / "v.ftem").write_bytes(bumped)
    with pytest.raises(VersionMismatch):
        load_table(tmp_path / "v.ftem")
    (tmp_path / "junk.ftem").write_bytes(b"nope" + raw[4:])
    with pytest.raises(CorruptFile):
        load_table(tmp_path / "junk.ftem")


def test_featurize_shapes_and_sharing(small_table):
    g = build_graph(parse_formula("x+x"), "SLT")
    fg = featurize(g, small_table)
    assert fg.node_features.shape == (3, 100)
    assert fg.edge_features.shape == (2, 16)
    assert np.array_equal(fg.node_features[0], fg.node_features[2])
    assert np.array_equal(fg.edge_features[0], small_table.token_vector("NEXT")[:16])


def test_featurize_edgeless(small_table):
    fg = featurize(MathGraph("SLT", ("V!x",), (), 0), small_table)
    assert fg.edge_features.shape == (0, 16)


def test_substitution_changes_only_renamed_rows(small_table):
    from formula_gcl.augment import SubstitutionMap, apply_substitution

    g = build_graph(parse_formula("x+y*x"), "SLT")
    h = apply_substitution(g, SubstitutionMap({"x": "z", "y": "y"}))
    a, b = featurize(g, small_table), featurize(h, small_table)
    for i, (la, lb) in enumerate(zip(g.labels, h.labels)):
        assert np.array_equal(a.node_features[i], b.node_features[i]) == (la == lb)
    assert np.array_equal(a.edge_features, b.edge_features)
