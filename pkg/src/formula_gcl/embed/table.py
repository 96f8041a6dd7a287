"""Token embedding table with subword buckets, plus its binary file format.

File layout (little-endian)::

    magic b"FTEM" | u32 version | u32 dim | u32 vocab size | u32 buckets
    | u32 n_min | u32 n_max | u64 seed
    vocab block: per token, u32 byte length, UTF-8 bytes, u64 count
    float32 matrices, row-major: input (V x d), output (V x d), buckets (B x d)
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CorruptFile, VersionMismatch
from .subword import ngram_buckets
from .vocab import Vocabulary

MAGIC = b"FTEM"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIIIQ")


@dataclass
class EmbeddingTable:
    vocab: Vocabulary
    input: np.ndarray
    output: np.ndarray
    buckets: np.ndarray
    n_min: int = 3
    n_max: int = 5
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.input.shape[1]

    @property
    def n_buckets(self) -> int:
        return self.buckets.shape[0]

    def subword_ids(self, token: str) -> tuple[int, ...]:
        return ngram_buckets(token, self.n_min, self.n_max, self.n_buckets)

    def token_vector(self, token: str) -> np.ndarray:
        """Token row plus the mean of its n-gram bucket rows (bucket mean alone if OOV)."""
        ids = self.subword_ids(token)
        vec = np.zeros(self.dim, dtype=np.float64)
        if ids:
            vec += self.buckets[list(ids)].astype(np.float64).mean(axis=0)
        idx = self.vocab.index.get(token)
        if idx is not None:
            vec += self.input[idx]
        return vec


def token_vector(table: EmbeddingTable, token: str) -> np.ndarray:
    return table.token_vector(token)


def table_bytes(table: EmbeddingTable) -> bytes:
    parts = [
        _HEADER.pack(
            MAGIC, VERSION, table.dim, len(table.vocab), table.n_buckets,
            table.n_min, table.n_max, table.seed,
        )
    ]
    for token, count in zip(table.vocab.tokens, table.vocab.counts):
        raw = token.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)) + raw + struct.pack("<Q", count))
    for mat in (table.input, table.output, table.buckets):
        parts.append(np.ascontiguousarray(mat, dtype="<f4").tobytes())
    return b"".join(parts)


def table_id(table: EmbeddingTable) -> str:
    # tables are not mutated after training, so the digest is memoized on the instance
    digest = table.__dict__.get("_digest")
    if digest is None:
        digest = table.__dict__["_digest"] = hashlib.sha256(table_bytes(table)).hexdigest()[:16]
    return digest


def save_table(table: EmbeddingTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(table_bytes(table))


def load_table(path) -> EmbeddingTable:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise CorruptFile(f"{path}: truncated header")
    magic, version, dim, n_vocab, n_buckets, n_min, n_max, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptFile(f"{path}: not an embedding table")
    if version != VERSION:
        raise VersionMismatch(f"{path}: table version {version}, expected {VERSION}")
    pos = _HEADER.size
    tokens, counts = [], []
    try:
        for _ in range(n_vocab):
            (length,) = struct.unpack_from("<I", data, pos)
            pos += 4
            tokens.append(data[pos : pos + length].decode("utf-8"))
            pos += length
            (count,) = struct.unpack_from("<Q", data, pos)
            counts.append(count)
            pos += 8
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptFile(f"{path}: damaged vocabulary block") from exc
    sizes = (n_vocab * dim, n_vocab * dim, n_buckets * dim)
    if len(data) != pos + 4 * sum(sizes):
        raise CorruptFile(f"{path}: expected {pos + 4 * sum(sizes)} bytes, found {len(data)}")
    mats = []
    for size, rows in zip(sizes, (n_vocab, n_vocab, n_buckets)):
        mats.append(np.frombuffer(data, dtype="<f4", count=size, offset=pos).reshape(rows, dim).astype(np.float32))
        pos += 4 * size
    return EmbeddingTable(Vocabulary(tokens, counts), *mats, n_min=n_min, n_max=n_max, seed=seed)
