"""Augmentation x batch-size experiment grid and its heat-map rendering."""

from __future__ import annotations

import csv
import io
import logging
import zlib
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..augment import GENERIC_STRATEGIES, VAR_SUB
from ..checkpoint import Checkpoint
from ..embed import Featurizer, TokenEmbedConfig, build_vocab, corpus_walks, train_token_embeddings
from ..errors import FormulaGclError, InputError, MissingCell
from ..formula.graph import build_graph
from ..formula.parser import Ast
from ..gcl import TrainConfig, train_gcl
from ..retrieval import Embedder, build_index, query_many
from .metrics import RelevanceSetting, evaluate

log = logging.getLogger(__name__)

BASELINE = "Baseline"
DEFAULT_STRATEGIES = (VAR_SUB,) + GENERIC_STRATEGIES + ("Random", BASELINE)
RESULT_HEADER = ("layout", "setting", "augmentation", "batch_size", "seed", "bpref")
SETTINGS = (RelevanceSetting.FULL, RelevanceSetting.PARTIAL)


@dataclass(frozen=True)
class ExperimentGrid:
    layouts: tuple[str, ...] = ("SLT", "OPT")
    strategies: tuple[str, ...] = DEFAULT_STRATEGIES
    batch_sizes: tuple[int, ...] = (16, 32, 64, 128)
    seeds: int = 5
    grid_seed: int = 0

    def __post_init__(self):
        if not self.layouts or not self.strategies or not self.batch_sizes:
            raise InputError("experiment grid axes must be non-empty")
        if self.seeds < 1:
            raise InputError("experiment grid needs at least one seed")


def _stable(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


def layout_seed(grid_seed: int, layout: str) -> int:
    return int(np.random.SeedSequence([grid_seed, _stable(layout)]).generate_state(1)[0])


def cell_seed(grid_seed: int, layout: str, strategy: str, batch_size: int, replicate: int) -> int:
    """Seed of one grid cell, independent of grid order or which other cells run."""
    entropy = [grid_seed, _stable(layout), _stable(strategy), batch_size, replicate]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass
class LayoutContext:
    """Everything shared by the cells of one layout: trained token table and featured corpus."""

    layout: str
    corpus: list[tuple[str, Ast]]
    queries: list[tuple[str, Ast]]
    featurizer: Featurizer
    graphs: list = field(default_factory=list)
    token_history: np.ndarray | None = None

    @classmethod
    def build(cls, layout, corpus, queries, token_cfg: TokenEmbedConfig, seed: int, edge_dim: int = 16):
        rng = np.random.default_rng(seed)
        graphs = [build_graph(ast, layout) for _, ast in corpus]
        walks = corpus_walks(graphs, token_cfg.walks_per_node, token_cfg.walk_len, rng)
        table, history = train_token_embeddings(walks, build_vocab(walks, token_cfg.min_count), token_cfg, rng)
        table.seed = seed
        featurizer = Featurizer(table, edge_dim)
        return cls(layout, corpus, queries, featurizer, [featurizer(g) for g in graphs], history)


def evaluate_embedder(ctx: LayoutContext, embedder: Embedder, qrels) -> dict[RelevanceSetting, float]:
    index = build_index(ctx.corpus, embedder)
    rankings = query_many(index, embedder, ctx.queries, k=len(index))
    return {s: evaluate(rankings, qrels, s)[0] for s in SETTINGS}


def run_cell(ctx: LayoutContext, strategy: str, batch_size: int, seed: int, train_cfg: TrainConfig, qrels):
    """Train (unless Baseline), index the corpus, run all queries, score both settings."""
    if strategy == BASELINE:
        embedder = Embedder(ctx.featurizer.table, ctx.layout, None, edge_dim=ctx.featurizer.edge_dim)
        return evaluate_embedder(ctx, embedder, qrels)
    cfg = replace(train_cfg, batch_size=batch_size, seed=seed, augment=replace(train_cfg.augment, strategy=strategy))
    params, history = train_gcl(ctx.graphs, ctx.featurizer, cfg)
    ckpt = Checkpoint(params, {"strategy": strategy, "batch_size": batch_size, "seed": seed}, history)
    return evaluate_embedder(ctx, Embedder(ctx.featurizer.table, ctx.layout, ckpt), qrels)


def run_experiment(
    grid: ExperimentGrid,
    corpus: list[tuple[str, Ast]],
    queries: list[tuple[str, Ast]],
    qrels,
    token_cfg: TokenEmbedConfig | None = None,
    train_cfg: TrainConfig | None = None,
    contexts: dict[str, LayoutContext] | None = None,
) -> list[dict]:
    """One result row per (layout, strategy, batch size, replicate, setting)."""
    token_cfg = token_cfg or TokenEmbedConfig()
    train_cfg = train_cfg or TrainConfig()
    contexts = dict(contexts or {})
    rows = []
    for layout in grid.layouts:
        if layout not in contexts:
            log.info("training token embeddings for %s", layout)
            contexts[layout] = LayoutContext.build(
                layout, corpus, queries, token_cfg, layout_seed(grid.grid_seed, layout)
            )
        ctx = contexts[layout]
        baseline_scores = None
        for strategy in grid.strategies:
            for batch_size in grid.batch_sizes:
                for rep in range(grid.seeds):
                    seed = cell_seed(grid.grid_seed, layout, strategy, batch_size, rep)
                    try:
                        if strategy == BASELINE:
                            # no training: identical for every batch size and replicate
                            if baseline_scores is None:
                                baseline_scores = run_cell(ctx, strategy, batch_size, seed, train_cfg, qrels)
                            scores = baseline_scores
                        else:
                            scores = run_cell(ctx, strategy, batch_size, seed, train_cfg, qrels)
                    except FormulaGclError as exc:
                        raise type(exc)(
                            f"cell layout={layout} strategy={strategy} batch_size={batch_size} seed={seed}: {exc}"
                        ) from exc
                    log.info("%s %s N=%d rep=%d full=%.4f partial=%.4f", layout, strategy, batch_size, rep,
                             scores[RelevanceSetting.FULL], scores[RelevanceSetting.PARTIAL])
                    for setting in SETTINGS:
                        rows.append(
                            {
                                "layout": layout,
                                "setting": setting.value,
                                "augmentation": strategy,
                                "batch_size": batch_size,
                                "seed": seed,
                                "bpref": float(scores[setting]),
                            }
                        )
    return rows


def summarize(rows) -> dict[tuple[str, str, str, int], dict]:
    """Mean and sample standard deviation of bpref per cell across seeds."""
    cells: dict[tuple[str, str, str, int], list[float]] = {}
    for r in rows:
        cells.setdefault((r["layout"], r["setting"], r["augmentation"], int(r["batch_size"])), []).append(
            float(r["bpref"])
        )
    out = {}
    for key, values in cells.items():
        arr = np.asarray(values)
        out[key] = {
            "mean": float(arr.mean()),
            "std": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
            "n": len(arr),
        }
    return out


def results_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    for r in rows:
        writer.writerow([r["layout"], r["setting"], r["augmentation"], r["batch_size"], r["seed"], repr(r["bpref"])])
    return buf.getvalue()


def write_results(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_csv(rows))


def read_results(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_HEADER:
            raise InputError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            dict(r, batch_size=int(r["batch_size"]), seed=int(r["seed"]), bpref=float(r["bpref"])) for r in reader
        ]


HEATMAP_HEADER = ("layout", "setting", "augmentation", "batch_size", "mean_bpref", "std_bpref")


def render_heatmap(rows, layout: str, setting, strategies=None, batch_sizes=None) -> tuple[str, str]:
    """Strategies x batch sizes grid of mean bpref (3 decimals) plus a CSV sidecar."""
    setting = RelevanceSetting.parse(setting).value
    summary = summarize(rows)
    present = [k for k in summary if k[0] == layout and k[1] == setting]
    if strategies is None:
        strategies = list(dict.fromkeys(k[2] for k in present))
    if batch_sizes is None:
        batch_sizes = sorted({k[3] for k in present})
    if not strategies or not batch_sizes:
        raise MissingCell(f"no results for layout={layout} setting={setting}")
    width = max(len(s) for s in strategies)
    lines = [f"bpref ({layout}, {setting} relevance)", " " * width + "".join(f"{b:>9d}" for b in batch_sizes)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEATMAP_HEADER)
    for strategy in strategies:
        cells = []
        for b in batch_sizes:
            cell = summary.get((layout, setting, strategy, int(b)))
            if cell is None:
                raise MissingCell(f"missing cell layout={layout} setting={setting} augmentation={strategy} batch_size={b}")
            cells.append(f"{cell['mean']:9.3f}")
            writer.writerow([layout, setting, strategy, b, f"{cell['mean']:.3f}", f"{cell['std']:.3f}"])
        lines.append(f"{strategy:<{width}}" + "".join(cells))
    return "\n".join(lines) + "\n", buf.getvalue()


def grid_to_dict(grid: ExperimentGrid) -> dict:
    return asdict(grid)
