import numpy as np
import pytest

from formula_gcl.checkpoint import Checkpoint, checkpoint_bytes, checkpoint_id, load_checkpoint, save_checkpoint
from formula_gcl.encoder import init_params
from formula_gcl.errors import CorruptCheckpoint, VersionMismatch


@pytest.fixture
def ckpt():
    params = init_params(np.random.default_rng(0), (6, 5, 4), 3).rounded()
    return Checkpoint(params, {"seed": 0, "lr": 0.01}, [1.5, 1.25])


def test_round_trip_is_bit_exact(tmp_path, ckpt):
    save_checkpoint(ckpt, tmp_path / "a.ckpt")
    loaded = load_checkpoint(tmp_path / "a.ckpt")
    assert loaded.config == ckpt.config and loaded.history == ckpt.history
    for a, b in zip(loaded.params.arrays(), ckpt.params.arrays()):
        assert np.array_equal(a, b)
    save_checkpoint(loaded, tmp_path / "b.ckpt")
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()
    assert checkpoint_id(loaded) == checkpoint_id(ckpt)


def test_truncated(tmp_path, ckpt):
    (tmp_path / "t.ckpt").write_bytes(checkpoint_bytes(ckpt)[:-10])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(tmp_path / "t.ckpt")


def test_flipped_byte_fails_checksum(tmp_path, ckpt):
    raw = bytearray(checkpoint_bytes(ckpt))
    raw[len(raw) // 2] ^= 0xFF
    (tmp_path / "f.ckpt").write_bytes(bytes(raw))
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(tmp_path / "f.ckpt")


def test_version_mismatch(tmp_path, ckpt):
    ckpt.version = 7
    save_checkpoint(ckpt, tmp_path / "v.ckpt")
    with pytest.raises(VersionMismatch):
        load_checkpoint(tmp_path / "v.ckpt")
