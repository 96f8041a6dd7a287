"""Encoder checkpoints.

Layout (little-endian)::

    magic b"FGCL" | u32 version | u32 layer count L | (L+1) x u32 dims | u32 edge dim
    | u32 metadata length | metadata (UTF-8 JSON: config echo, loss history)
    | float32 matrices per layer: w_self, w_nbr, w_edge, b
    | u32 CRC32 of everything before it
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .encoder import EncoderParams, Layer
from .errors import CorruptCheckpoint, VersionMismatch

MAGIC = b"FGCL"
VERSION = 1


@dataclass
class Checkpoint:
    params: EncoderParams
    config: dict = field(default_factory=dict)
    history: list[float] = field(default_factory=list)
    version: int = VERSION


def checkpoint_bytes(ckpt: Checkpoint) -> bytes:
    params = ckpt.params
    dims = params.dims
    meta = json.dumps({"config": ckpt.config, "history": ckpt.history}, sort_keys=True, separators=(",", ":"))
    raw_meta = meta.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<II", ckpt.version, len(params.layers)),
        struct.pack(f"<{len(dims)}I", *dims),
        struct.pack("<II", params.edge_dim, len(raw_meta)),
        raw_meta,
    ]
    for arr in params.arrays():
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def checkpoint_id(ckpt: Checkpoint) -> str:
    return hashlib.sha256(checkpoint_bytes(ckpt)).hexdigest()[:16]


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(ckpt))


def parse_checkpoint(data: bytes, source="<bytes>") -> Checkpoint:
    if len(data) < 16 or data[:4] != MAGIC:
        raise CorruptCheckpoint(f"{source}: not a checkpoint file")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    version, n_layers = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise VersionMismatch(f"{source}: checkpoint version {version}, expected {VERSION}")
    if zlib.crc32(body) != crc:
        raise CorruptCheckpoint(f"{source}: checksum mismatch (truncated or damaged)")
    pos = 12
    dims = struct.unpack_from(f"<{n_layers + 1}I", data, pos)
    pos += 4 * (n_layers + 1)
    edge_dim, meta_len = struct.unpack_from("<II", data, pos)
    pos += 8
    meta = json.loads(data[pos : pos + meta_len].decode("utf-8"))
    pos += meta_len
    layers = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        arrays = []
        for shape in ((d_out, d_in), (d_out, d_in), (d_out, edge_dim), (d_out,)):
            count = int(np.prod(shape))
            arr = np.frombuffer(data, dtype="<f4", count=count, offset=pos).reshape(shape)
            arrays.append(arr.astype(np.float64))
            pos += 4 * count
        layers.append(Layer(*arrays))
    if pos != len(body):
        raise CorruptCheckpoint(f"{source}: {len(body) - pos} unexpected trailing bytes")
    return Checkpoint(EncoderParams(layers), meta["config"], meta["history"], version)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        return parse_checkpoint(fh.read(), path)
