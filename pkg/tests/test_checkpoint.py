"""Checkpoint container round-trip and corruption tests."""

import numpy as np
import pytest

from jamsense.errors import ParseError
from jamsense.nn.checkpoint import (
    load_checkpoint,
    load_model,
    save_checkpoint,
    save_model,
)
from jamsense.nn.model import ArchConfig, build_mhdnn, forward_windows

from conftest import make_window


def test_round_trip(tmp_path, rng):
    arrays = {"a": rng.normal(size=(3, 4)), "b": rng.normal(size=7)}
    path = tmp_path / "x.ckpt"
    save_checkpoint(path, "mhdnn", {"note": 1}, arrays)
    model_type, meta, loaded = load_checkpoint(path)
    assert model_type == "mhdnn"
    assert meta == {"note": 1}
    for name in arrays:
        assert np.array_equal(loaded[name], arrays[name])


def test_checksum_detects_corruption(tmp_path, rng):
    path = tmp_path / "x.ckpt"
    save_checkpoint(path, "mhdnn", {}, {"a": rng.normal(size=16)})
    raw = bytearray(path.read_bytes())
    raw[-3] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ParseError):
        load_checkpoint(path)


def test_truncated_file(tmp_path, rng):
    path = tmp_path / "x.ckpt"
    save_checkpoint(path, "mhdnn", {}, {"a": rng.normal(size=16)})
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(ParseError):
        load_checkpoint(path)


def test_model_round_trip_preserves_outputs(tmp_path, rng):
    model = build_mhdnn(ArchConfig(variant="attention", w=50), seed=4)
    path = tmp_path / "m.ckpt"
    save_model(path, model)
    loaded, norm_stats = load_model(path)
    windows = [make_window(rng, w=50) for _ in range(3)]
    assert np.array_equal(
        forward_windows(model, windows), forward_windows(loaded, windows)
    )
    assert loaded.cfg == model.cfg
