"""Command-line pipeline: parse, synth, train-tokens, train-gcl, index, query, eval, bench.

All stages read one ``key = value`` config file (``--config``); any key can be
overridden with ``--key=value``.  Artifacts land in ``work_dir``.

Exit codes: 0 success, 1 I/O error, 2 invalid input or config, 3 provenance
or version mismatch.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .augment import AugmentConfig
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .embed import (
    EDGE_DIM,
    Featurizer,
    TokenEmbedConfig,
    build_vocab,
    corpus_walks,
    load_table,
    save_table,
    train_token_embeddings,
)
from .errors import InputError, MismatchError
from .evalbench import (
    ExperimentGrid,
    RelevanceSetting,
    SynthConfig,
    evaluate,
    generate_synthetic_benchmark,
    load_qrels,
    render_heatmap,
    run_experiment,
    write_benchmark,
    write_results,
)
from .formula import build_graph, format_graph, load_corpus, parse_formula
from .gcl import TrainConfig, train_gcl
from .retrieval import Embedder, build_index, load_index, query, query_many, read_run, save_index, write_run

log = logging.getLogger("formula_gcl")

# key -> (type, default); paths left empty resolve inside work_dir
KEYS: dict[str, tuple[type, object]] = {
    "seed": (int, 0),
    "work_dir": (str, "work"),
    "corpus": (str, ""),
    "queries": (str, ""),
    "qrels": (str, ""),
    "layout": (str, "slt"),
    "encoder": (str, "gcl"),
    # token embeddings
    "dim": (int, 100),
    "window": (int, 2),
    "negatives": (int, 5),
    "token_epochs": (int, 5),
    "token_lr": (float, 0.05),
    "n_min": (int, 3),
    "n_max": (int, 5),
    "buckets": (int, 2**15),
    "min_count": (int, 1),
    "walks_per_node": (int, 10),
    "walk_len": (int, 5),
    # contrastive training
    "batch_size": (int, 32),
    "temperature": (float, 0.5),
    "epochs": (int, 5),
    "lr": (float, 0.01),
    "hidden": (int, 128),
    "edge_dim": (int, EDGE_DIM),
    "augmentation": (str, "VarSub"),
    "ratio": (float, 0.2),
    "substitution_mode": (str, "Consistent"),
    # retrieval and evaluation
    "k": (int, 1000),
    "setting": (str, "full"),
    # experiment grid
    "layouts": (str, "slt,opt"),
    "strategies": (str, "VarSub,NodeDrop,EdgeDrop,NodeFeatureMask,EdgeFeatureMask,Random,Baseline"),
    "batch_sizes": (str, "16,32,64,128"),
    "seeds": (int, 5),
    # synthetic benchmark
    "bases": (int, 200),
    "variants_per_base": (int, 4),
    "near_misses_per_base": (int, 1),
    "total": (int, 1000),
    "max_depth": (int, 4),
    "zeros_per_query": (int, 5),
}


@dataclass
class RunConfig:
    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def work(self) -> Path:
        return Path(self.values["work_dir"])

    def path(self, key: str, default_name: str) -> Path:
        value = self.values[key]
        return Path(value) if value else self.work / default_name

    @property
    def layout_name(self) -> str:
        layout = self.values["layout"].upper()
        if layout not in ("SLT", "OPT"):
            raise InputError(f"unknown layout {self.values['layout']!r} (use slt or opt)")
        return layout

    def token_config(self) -> TokenEmbedConfig:
        v = self.values
        return TokenEmbedConfig(
            dim=v["dim"], window=v["window"], negatives=v["negatives"], epochs=v["token_epochs"],
            lr=v["token_lr"], n_min=v["n_min"], n_max=v["n_max"], buckets=v["buckets"],
            min_count=v["min_count"], walks_per_node=v["walks_per_node"], walk_len=v["walk_len"],
        )

    def train_config(self) -> TrainConfig:
        v = self.values
        augment = AugmentConfig(strategy=v["augmentation"], ratio=v["ratio"], substitution_mode=v["substitution_mode"])
        return TrainConfig(
            batch_size=v["batch_size"], temperature=v["temperature"], epochs=v["epochs"], lr=v["lr"],
            seed=v["seed"], dims=(v["dim"], v["hidden"], v["hidden"]), augment=augment,
        )

    def synth_config(self) -> SynthConfig:
        v = self.values
        return SynthConfig(
            bases=v["bases"], variants_per_base=v["variants_per_base"],
            near_misses_per_base=v["near_misses_per_base"], total=v["total"], max_depth=v["max_depth"],
            zeros_per_query=v["zeros_per_query"],
        )

    def grid(self) -> ExperimentGrid:
        v = self.values
        return ExperimentGrid(
            layouts=tuple(x.upper() for x in _split(v["layouts"])),
            strategies=tuple(_split(v["strategies"])),
            batch_sizes=tuple(int(x) for x in _split(v["batch_sizes"])),
            seeds=v["seeds"],
            grid_seed=v["seed"],
        )


def _split(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _convert(key: str, raw: str):
    typ = KEYS[key][0]
    try:
        return typ(raw)
    except ValueError:
        raise InputError(f"config key {key!r}: cannot read {raw!r} as {typ.__name__}") from None


def load_config(path, overrides: dict[str, str]) -> RunConfig:
    values = {k: default for k, (_, default) in KEYS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            parser.read_string("[run]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise InputError(f"{path}: {exc}") from exc
        for key, raw in parser["run"].items():
            if key not in KEYS:
                raise InputError(f"{path}: unknown config key {key!r}")
            values[key] = _convert(key, raw)
    for key, raw in overrides.items():
        values[key] = _convert(key, raw)
    return RunConfig(values)


# ---------------------------------------------------------------- artifacts


def _token_path(cfg: RunConfig) -> Path:
    return cfg.work / f"tokens-{cfg.layout_name.lower()}.ftem"


def _checkpoint_path(cfg: RunConfig) -> Path:
    return cfg.work / f"gcl-{cfg.layout_name.lower()}.ckpt"


def _index_path(cfg: RunConfig) -> Path:
    return cfg.work / f"index-{cfg.layout_name.lower()}-{cfg.encoder}.fidx"


def _embedder(cfg: RunConfig) -> Embedder:
    table = load_table(_token_path(cfg))
    if cfg.encoder == "baseline":
        return Embedder(table, cfg.layout_name, None, edge_dim=cfg.edge_dim)
    if cfg.encoder != "gcl":
        raise InputError(f"unknown encoder {cfg.encoder!r} (use gcl or baseline)")
    return Embedder(table, cfg.layout_name, load_checkpoint(_checkpoint_path(cfg)))


def _write_history(path: Path, history, seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# seed={seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(history, start=1):
            writer.writerow([epoch, repr(float(loss))])


# ---------------------------------------------------------------- commands


def cmd_parse(args, cfg: RunConfig) -> int:
    g = build_graph(parse_formula(args.formula), cfg.layout_name)
    print(format_graph(g))
    return 0


def cmd_synth(args, cfg: RunConfig) -> int:
    bench = generate_synthetic_benchmark(cfg.synth_config(), np.random.default_rng(cfg.seed))
    for path in write_benchmark(bench, cfg.work, seed=cfg.seed):
        print(path)
    return 0


def cmd_train_tokens(args, cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.path("corpus", "corpus.jsonl"))
    tcfg = cfg.token_config()
    rng = np.random.default_rng(cfg.seed)
    graphs = [build_graph(ast, cfg.layout_name) for _, ast in corpus]
    walks = corpus_walks(graphs, tcfg.walks_per_node, tcfg.walk_len, rng)
    table, history = train_token_embeddings(walks, build_vocab(walks, tcfg.min_count), tcfg, rng)
    table.seed = cfg.seed
    cfg.work.mkdir(parents=True, exist_ok=True)
    out = _token_path(cfg)
    save_table(table, out)
    _write_history(out.with_suffix(".loss.csv"), history, cfg.seed)
    final = f"{history[-1]:.6f}" if len(history) else "n/a"
    print(f"wrote {out} (vocab {len(table.vocab)}, final loss {final})")
    return 0


def cmd_train_gcl(args, cfg: RunConfig) -> int:
    tcfg = cfg.train_config()
    corpus = load_corpus(cfg.path("corpus", "corpus.jsonl"))
    featurizer = Featurizer(load_table(_token_path(cfg)), cfg.edge_dim)
    graphs = [featurizer(build_graph(ast, cfg.layout_name)) for _, ast in corpus]
    params, history = train_gcl(graphs, featurizer, tcfg)
    echo = {
        "layout": cfg.layout_name,
        "seed": tcfg.seed,
        "batch_size": tcfg.batch_size,
        "temperature": tcfg.temperature,
        "epochs": tcfg.epochs,
        "lr": tcfg.lr,
        "augmentation": tcfg.augment.strategy,
        "ratio": tcfg.augment.ratio,
        "substitution_mode": tcfg.augment.substitution_mode,
    }
    out = _checkpoint_path(cfg)
    save_checkpoint(Checkpoint(params, echo, [float(x) for x in history]), out)
    _write_history(out.with_suffix(".loss.csv"), history, tcfg.seed)
    final = f"{history[-1]:.6f}" if history else "n/a"
    print(f"wrote {out} (final loss {final})")
    return 0


def cmd_index(args, cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.path("corpus", "corpus.jsonl"))
    index = build_index(corpus, _embedder(cfg))
    out = _index_path(cfg)
    save_index(index, out)
    print(f"wrote {out} ({len(index)} formulas, dim {index.dim})")
    return 0


def cmd_query(args, cfg: RunConfig) -> int:
    index = load_index(_index_path(cfg))
    embedder = _embedder(cfg)
    if args.formula is not None:
        ranking = query(index, embedder, args.formula, k=cfg.k)
        for rank, (doc, score) in enumerate(ranking.results, start=1):
            print(f"{rank} {doc} {score:.6f}")
        return 0
    queries = load_corpus(cfg.path("queries", "queries.jsonl"))
    rankings = query_many(index, embedder, queries, k=cfg.k)
    out = cfg.work / f"run-{cfg.layout_name.lower()}-{cfg.encoder}.txt"
    write_run(rankings, f"{cfg.encoder}-{cfg.layout_name.lower()}-s{cfg.seed}", out)
    print(out)
    return 0


def cmd_eval(args, cfg: RunConfig) -> int:
    setting = RelevanceSetting.parse(cfg.setting)
    qrels = load_qrels(cfg.path("qrels", "qrels.txt"))
    rankings = list(read_run(args.run).values())
    mean, per_query, skipped = evaluate(rankings, qrels, setting)
    if args.per_query:
        for qid in sorted(per_query):
            print(f"{qid} {per_query[qid]:.4f}")
    if skipped:
        print(f"skipped {len(skipped)} queries without relevant judgments", file=sys.stderr)
    print(f"bpref {setting.value} {mean:.4f}")
    return 0


def cmd_bench(args, cfg: RunConfig) -> int:
    grid = cfg.grid()
    corpus = load_corpus(cfg.path("corpus", "corpus.jsonl"))
    queries = load_corpus(cfg.path("queries", "queries.jsonl"))
    qrels = load_qrels(cfg.path("qrels", "qrels.txt"))
    tcfg = cfg.train_config()
    rows = run_experiment(grid, corpus, queries, qrels, cfg.token_config(), tcfg)
    cfg.work.mkdir(parents=True, exist_ok=True)
    write_results(rows, cfg.work / "results.csv")
    print(cfg.work / "results.csv")
    for layout in grid.layouts:
        for setting in RelevanceSetting:
            text, table = render_heatmap(rows, layout, setting, list(grid.strategies), list(grid.batch_sizes))
            stem = cfg.work / f"heatmap-{layout.lower()}-{setting.value}"
            stem.with_suffix(".txt").write_text(text, encoding="utf-8")
            stem.with_suffix(".csv").write_text(table, encoding="utf-8")
            print(text)
    return 0


COMMANDS = {
    "parse": cmd_parse,
    "synth": cmd_synth,
    "train-tokens": cmd_train_tokens,
    "train-gcl": cmd_train_gcl,
    "index": cmd_index,
    "query": cmd_query,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("-v", "--verbose", action="store_true")
    group = common.add_argument_group("config overrides")
    for key, (typ, default) in KEYS.items():
        flags = [f"--{key}"] + ([f"--{key.replace('_', '-')}"] if "_" in key else [])
        group.add_argument(*flags, dest=key, default=argparse.SUPPRESS, metavar=typ.__name__.upper(),
                           help=f"default {default!r}")

    parser = argparse.ArgumentParser(prog="formula-gcl", description="Formula retrieval with contrastive graph embeddings.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", parents=[common], help="print the graph of one formula")
    p.add_argument("formula")
    sub.add_parser("synth", parents=[common], help="write a synthetic benchmark")
    sub.add_parser("train-tokens", parents=[common], help="train token embeddings")
    sub.add_parser("train-gcl", parents=[common], help="train the contrastive encoder")
    sub.add_parser("index", parents=[common], help="embed and index the corpus")
    p = sub.add_parser("query", parents=[common], help="rank the index for one formula, or for the queries file")
    p.add_argument("formula", nargs="?")
    p = sub.add_parser("eval", parents=[common], help="bpref of a run file")
    p.add_argument("run")
    p.add_argument("--per-query", action="store_true")
    sub.add_parser("bench", parents=[common], help="run the augmentation x batch-size grid")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {k: getattr(args, k) for k in KEYS if hasattr(args, k)}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](args, cfg)
    except MismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
