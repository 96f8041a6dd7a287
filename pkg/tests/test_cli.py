import pytest

from formula_gcl.cli import main

SMALL = [
    "--bases", "6", "--variants-per-base", "2", "--total", "30",
    "--dim", "16", "--buckets", "1024", "--walks-per-node", "3", "--token-epochs", "2",
    "--hidden", "16", "--epochs", "3", "--batch-size", "8",
]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def work(tmp_path):
    return ["--work-dir", str(tmp_path)]


def pipeline(capsys, work, layout="slt", seed="0"):
    base = [*work, *SMALL, "--layout", layout, "--seed", seed]
    for cmd in ("synth", "train-tokens", "train-gcl", "index"):
        code, _, err = run(capsys, cmd, *base)
        assert code == 0, err
    return base


def test_parse_prints_graph(capsys):
    code, out, _ = run(capsys, "parse", "x+y", "--layout", "opt")
    assert code == 0
    assert "nodes 3" in out and "0 -ARG0-> 1" in out and "0 -ARG1-> 2" in out


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "parse", "x+")
    assert code == 2 and "error" in err


def test_full_pipeline(capsys, tmp_path, work):
    base = pipeline(capsys, work)
    lines = (tmp_path / "gcl-slt.loss.csv").read_text().splitlines()
    assert lines[0] == "# seed=0" and lines[1] == "epoch,loss" and len(lines) == 2 + 3
    assert len((tmp_path / "tokens-slt.loss.csv").read_text().splitlines()) == 2 + 2

    code, out, _ = run(capsys, "query", *base, "x^{2}+1", "--k", "4")
    assert code == 0 and len(out.splitlines()) == 4 and out.startswith("1 ")

    code, out, _ = run(capsys, "query", *base)
    run_file = out.strip()
    assert code == 0 and run_file.endswith("run-slt-gcl.txt")
    code, out, _ = run(capsys, "eval", *base, run_file, "--per-query")
    assert code == 0
    assert out.splitlines()[-1].startswith("bpref full ")
    assert len(out.splitlines()) == 1 + 6


def test_training_and_query_are_byte_identical(capsys, tmp_path):
    outputs = []
    for name in ("a", "b"):
        base = pipeline(capsys, ["--work-dir", str(tmp_path / name)], layout="opt", seed="4")
        code, out, _ = run(capsys, "query", *base, "\\frac{a}{b}")
        outputs.append(out)
    assert outputs[0] == outputs[1]
    for f in ("corpus.jsonl", "qrels.txt", "tokens-opt.ftem", "gcl-opt.ckpt", "gcl-opt.loss.csv", "index-opt-gcl.fidx"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_provenance_mismatch_exit_code(capsys, work):
    base = pipeline(capsys, work)
    code, _, _ = run(capsys, "train-gcl", *base, "--seed", "1")
    assert code == 0
    code, _, err = run(capsys, "query", *base, "--seed", "1", "x")
    assert code == 3 and "provenance" in err


def test_baseline_encoder(capsys, work):
    base = pipeline(capsys, work)
    code, _, _ = run(capsys, "index", *base, "--encoder", "baseline")
    assert code == 0
    code, out, _ = run(capsys, "query", *base, "--encoder", "baseline", "x+y", "--k", "2")
    assert code == 0 and len(out.splitlines()) == 2


def test_bad_inputs(capsys, tmp_path, work):
    assert run(capsys, "train-tokens", *work)[0] == 1  # no corpus yet
    base = pipeline(capsys, work)
    assert run(capsys, "eval", *base, "--setting", "bogus", str(tmp_path / "x"))[0] == 2
    assert run(capsys, "train-gcl", *base, "--batch-size", "1")[0] == 2
    assert run(capsys, "train-gcl", *base, "--epochs", "many")[0] == 2
    cfg = tmp_path / "run.cfg"
    cfg.write_text("no_such_key = 3\n")
    assert run(capsys, "synth", *work, "--config", str(cfg))[0] == 2


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"work_dir = {tmp_path / 'w'}\nbases = 4\nvariants_per_base = 1\ntotal = 12\n")
    assert run(capsys, "synth", "--config", str(cfg))[0] == 0
    assert len((tmp_path / "w" / "corpus.jsonl").read_text().splitlines()) >= 12


def test_bench(capsys, tmp_path, work):
    pipeline(capsys, work)
    code, out, err = run(
        capsys, "bench", *work, *SMALL, "--epochs", "1", "--layouts", "slt", "--strategies", "VarSub,Baseline",
        "--batch-sizes", "8", "--seeds", "2",
    )
    assert code == 0, err
    assert len((tmp_path / "results.csv").read_text().splitlines()) == 1 + 2 * 2 * 2
    assert (tmp_path / "heatmap-slt-full.txt").exists() and (tmp_path / "heatmap-slt-partial.csv").exists()
