"""Formula index and cosine-similarity search.

Index file layout (little-endian)::

    magic b"FIDX" | u32 version | u32 dim | u32 count | u32 provenance length
    | provenance (UTF-8 JSON) | per row: u32 id length + UTF-8 id | float32 rows
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .checkpoint import Checkpoint, checkpoint_id
from .embed.featurize import Featurizer
from .embed.table import EmbeddingTable, table_id
from .encoder import baseline_embed, encode_batch
from .errors import CorruptFile, InputError, MalformedLine, ProvenanceMismatch, VersionMismatch, ZeroVector
from .formula.graph import build_graph
from .formula.parser import Ast, parse_formula

INDEX_MAGIC = b"FIDX"
INDEX_VERSION = 1


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine of a zero vector is undefined")
    return float(u @ v / (nu * nv))


class Embedder:
    """Turns parsed formulas into index vectors under one fixed provenance.

    ``checkpoint=None`` selects the untrained mean-of-token-vectors baseline.
    Embeddings are rounded through float32, the precision of index files, so
    freshly computed vectors compare bit-exactly with stored rows.
    """

    def __init__(self, table: EmbeddingTable, layout: str, checkpoint: Checkpoint | None = None, edge_dim: int | None = None):
        self.layout = layout.upper()
        self.checkpoint = checkpoint
        if edge_dim is None:
            edge_dim = checkpoint.params.edge_dim if checkpoint is not None else 16
        self.featurizer = Featurizer(table, edge_dim)
        self.provenance = {
            "checkpoint": checkpoint_id(checkpoint) if checkpoint is not None else "baseline",
            "table": table_id(table),
            "layout": self.layout,
        }

    @property
    def dim(self) -> int:
        if self.checkpoint is None:
            return self.featurizer.dim
        return self.checkpoint.params.dims[-1]

    def embed_many(self, asts: list[Ast], chunk: int = 256) -> np.ndarray:
        out = np.zeros((len(asts), self.dim))
        for start in range(0, len(asts), chunk):
            fgs = [self.featurizer(build_graph(a, self.layout)) for a in asts[start : start + chunk]]
            if self.checkpoint is None:
                vecs = np.array([baseline_embed(fg) for fg in fgs])
            else:
                vecs = encode_batch(self.checkpoint.params, fgs)
            out[start : start + len(fgs)] = vecs
        return out.astype(np.float32).astype(np.float64)

    def embed(self, ast: Ast) -> np.ndarray:
        return self.embed_many([ast])[0]


@dataclass
class FormulaIndex:
    ids: list[str]
    vectors: np.ndarray  # (count, dim), float32-representable
    provenance: dict

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise InputError("index ids must be unique")
        self._norms = np.linalg.norm(self.vectors, axis=1)
        # rank of each id in ascending order, for the tie-break
        self._id_rank = np.empty(len(self.ids), dtype=np.int64)
        self._id_rank[np.argsort(np.array(self.ids, dtype=object), kind="stable")] = np.arange(len(self.ids))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def scores(self, q: np.ndarray) -> np.ndarray:
        return self.vectors @ q / (self._norms * np.linalg.norm(q))

    def search(self, q: np.ndarray, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise InputError("k must be >= 1")
        scores = self.scores(q)
        order = np.lexsort((self._id_rank, -scores))[: min(k, len(self.ids))]
        return [(self.ids[i], float(scores[i])) for i in order]


@dataclass
class RankedList:
    query_id: str
    results: list[tuple[str, float]]

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.results]


def build_index(corpus: list[tuple[str, Ast]], embedder: Embedder) -> FormulaIndex:
    ids = [fid for fid, _ in corpus]
    try:
        vectors = embedder.embed_many([ast for _, ast in corpus])
    except InputError as exc:
        raise InputError(f"while embedding corpus: {exc}") from exc
    return FormulaIndex(ids, vectors, dict(embedder.provenance))


def query(index: FormulaIndex, embedder: Embedder, formula, k: int = 1000, query_id: str = "q") -> RankedList:
    """Rank the index against one formula (LaTeX text or parsed Ast)."""
    if embedder.provenance != index.provenance:
        raise ProvenanceMismatch(f"query provenance {embedder.provenance} does not match index {index.provenance}")
    ast = parse_formula(formula) if isinstance(formula, str) else formula
    return RankedList(query_id, index.search(embedder.embed(ast), k))


def query_many(index: FormulaIndex, embedder: Embedder, queries: list[tuple[str, Ast]], k: int = 1000) -> list[RankedList]:
    if embedder.provenance != index.provenance:
        raise ProvenanceMismatch(f"query provenance {embedder.provenance} does not match index {index.provenance}")
    vectors = embedder.embed_many([ast for _, ast in queries])
    return [RankedList(qid, index.search(vec, k)) for (qid, _), vec in zip(queries, vectors)]


def save_index(index: FormulaIndex, path) -> None:
    prov = json.dumps(index.provenance, sort_keys=True).encode("utf-8")
    parts = [INDEX_MAGIC, struct.pack("<IIII", INDEX_VERSION, index.dim, len(index), len(prov)), prov]
    for fid in index.ids:
        raw = fid.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)) + raw)
    parts.append(np.ascontiguousarray(index.vectors, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_index(path) -> FormulaIndex:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != INDEX_MAGIC or len(data) < 20:
        raise CorruptFile(f"{path}: not an index file")
    version, dim, count, plen = struct.unpack_from("<IIII", data, 4)
    if version != INDEX_VERSION:
        raise VersionMismatch(f"{path}: index version {version}, expected {INDEX_VERSION}")
    pos = 20
    try:
        provenance = json.loads(data[pos : pos + plen].decode("utf-8"))
        pos += plen
        ids = []
        for _ in range(count):
            (n,) = struct.unpack_from("<I", data, pos)
            ids.append(data[pos + 4 : pos + 4 + n].decode("utf-8"))
            pos += 4 + n
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"{path}: damaged header") from exc
    if len(data) != pos + 4 * dim * count:
        raise CorruptFile(f"{path}: expected {pos + 4 * dim * count} bytes, found {len(data)}")
    vectors = np.frombuffer(data, dtype="<f4", count=dim * count, offset=pos).reshape(count, dim).astype(np.float64)
    return FormulaIndex(ids, vectors, provenance)


def write_run(rankings: list[RankedList], tag: str, path) -> None:
    """TREC run format: ``qid Q0 docid rank score tag``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ranking in rankings:
            for rank, (doc, score) in enumerate(ranking.results, start=1):
                fh.write(f"{ranking.query_id} Q0 {doc} {rank} {score!r} {tag}\n")


def read_run(path) -> dict[str, RankedList]:
    """Parse a run file; results are re-sorted by the rank column."""
    raw: dict[str, list[tuple[int, str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 6:
                raise MalformedLine(path, lineno, f"expected 6 fields, found {len(fields)}")
            qid, _, doc, rank, score, _ = fields
            try:
                raw.setdefault(qid, []).append((int(rank), doc, float(score)))
            except ValueError as exc:
                raise MalformedLine(path, lineno, str(exc)) from exc
    return {
        qid: RankedList(qid, [(doc, score) for _, doc, score in sorted(rows, key=lambda r: r[0])])
        for qid, rows in raw.items()
    }
