import numpy as np
import pytest

from formula_gcl.checkpoint import Checkpoint
from formula_gcl.encoder import init_params
from formula_gcl.errors import CorruptFile, InputError, ProvenanceMismatch, ZeroVector
from formula_gcl.formula import parse_formula
from formula_gcl.retrieval import (
    Embedder,
    FormulaIndex,
    RankedList,
    build_index,
    cosine,
    load_index,
    query,
    query_many,
    read_run,
    save_index,
    write_run,
)

from conftest import SMALL_FORMULAS


def test_cosine_examples():
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 1], [2, 2]) == pytest.approx(1.0, abs=1e-12)
    assert cosine([1, 0], [-1, 0]) == -1.0
    with pytest.raises(ZeroVector):
        cosine([0, 0], [1, 0])


@pytest.fixture(scope="module")
def corpus():
    return [(f"f{i:02d}", parse_formula(t)) for i, t in enumerate(SMALL_FORMULAS)]


@pytest.fixture(scope="module")
def gcl_embedder(small_table):
    params = init_params(np.random.default_rng(0), (100, 32, 24), 16).rounded()
    return Embedder(small_table, "SLT", Checkpoint(params, {"seed": 0}, []))


def test_index_shapes(corpus, small_table, gcl_embedder):
    assert build_index(corpus, gcl_embedder).vectors.shape == (len(corpus), 24)
    assert build_index(corpus, Embedder(small_table, "OPT")).vectors.shape == (len(corpus), 100)


@pytest.mark.parametrize("layout", ["SLT", "OPT"])
def test_self_retrieval(corpus, small_table, layout):
    params = init_params(np.random.default_rng(1), (100, 32, 32), 16).rounded()
    embedder = Embedder(small_table, layout, Checkpoint(params, {}, []))
    index = build_index(corpus, embedder)
    for fid, ast in corpus:
        results = query(index, embedder, ast, k=len(corpus)).results
        top = results[0][1]
        assert top == pytest.approx(1.0, abs=1e-6)
        tied = [d for d, s in results if s == top]
        assert fid in tied
        row = index.vectors[index.ids.index(fid)]
        for d in tied:
            assert np.array_equal(index.vectors[index.ids.index(d)], row)


def test_k_cap_and_validation(corpus, gcl_embedder):
    index = build_index(corpus, gcl_embedder)
    assert len(query(index, gcl_embedder, "x+y", k=3).results) == 3
    assert len(query(index, gcl_embedder, "x+y", k=10_000).results) == len(corpus)
    with pytest.raises(InputError):
        query(index, gcl_embedder, "x+y", k=0)


def test_ties_break_by_ascending_id():
    index = FormulaIndex(["b", "c", "a"], np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]), {})
    assert [d for d, _ in index.search(np.array([1.0, 0.0]), 3)] == ["a", "b", "c"]
    index = FormulaIndex(["b", "a", "c"], np.array([[1.0, 0.0], [0.6, 0.8], [2.0, 0.0]]), {})
    assert [d for d, _ in index.search(np.array([1.0, 0.0]), 3)] == ["b", "c", "a"]


def test_provenance_mismatch(corpus, small_table, gcl_embedder):
    index = build_index(corpus, gcl_embedder)
    with pytest.raises(ProvenanceMismatch):
        query(index, Embedder(small_table, "SLT"), "x")
    with pytest.raises(ProvenanceMismatch):
        query(index, Embedder(small_table, "OPT", gcl_embedder.checkpoint), "x")


def test_index_file_round_trip(tmp_path, corpus, gcl_embedder):
    index = build_index(corpus, gcl_embedder)
    save_index(index, tmp_path / "a.fidx")
    loaded = load_index(tmp_path / "a.fidx")
    assert loaded.ids == index.ids and loaded.provenance == index.provenance
    assert np.array_equal(loaded.vectors, index.vectors)
    a = query(index, gcl_embedder, "x^{2}")
    b = query(loaded, gcl_embedder, "x^{2}")
    assert a == b
    (tmp_path / "t.fidx").write_bytes((tmp_path / "a.fidx").read_bytes()[:-3])
    with pytest.raises(CorruptFile):
        load_index(tmp_path / "t.fidx")


def test_run_file_round_trip(tmp_path, corpus, gcl_embedder):
    index = build_index(corpus, gcl_embedder)
    runs = query_many(index, gcl_embedder, [("q1", parse_formula("x+y")), ("q2", parse_formula("z"))], k=5)
    write_run(runs, "tag", tmp_path / "run.txt")
    lines = (tmp_path / "run.txt").read_text().splitlines()
    assert len(lines) == 10
    assert lines[0].split()[1] == "Q0" and lines[0].split()[3] == "1" and lines[0].split()[5] == "tag"
    back = read_run(tmp_path / "run.txt")
    assert [back[r.query_id] for r in runs] == runs


def test_empty_ranking_round_trip(tmp_path):
    write_run([RankedList("q", [("d1", 0.5)])], "t", tmp_path / "r.txt")
    assert read_run(tmp_path / "r.txt")["q"].results == [("d1", 0.5)]
