"""Checkpoint container: JSON header + little-endian float64 parameter block.

Layout: 8-byte little-endian header length, UTF-8 JSON header, raw block.
The header carries a version, a model type tag, arbitrary metadata, a
named-tensor offset table (byte offsets into the block) and a SHA-256
checksum of the block. The same container stores baseline classifiers
under their own type tags.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from ..errors import ParseError

FORMAT_VERSION = 1


def save_checkpoint(path, model_type, meta, named_arrays):
    tensors = []
    chunks = []
    offset = 0
    for name in sorted(named_arrays):
        arr = np.ascontiguousarray(named_arrays[name], dtype="<f8")
        tensors.append({"name": name, "offset": offset, "shape": list(arr.shape)})
        chunks.append(arr.tobytes())
        offset += arr.nbytes
    block = b"".join(chunks)
    header = {
        "version": FORMAT_VERSION,
        "type": model_type,
        "meta": meta,
        "tensors": tensors,
        "checksum": hashlib.sha256(block).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(block)


def load_checkpoint(path):
    """Returns (model_type, meta, {name: array}) after validation."""
    with open(path, "rb") as fh:
        raw_len = fh.read(8)
        if len(raw_len) != 8:
            raise ParseError("truncated checkpoint header length")
        (header_len,) = struct.unpack("<Q", raw_len)
        header_bytes = fh.read(header_len)
        if len(header_bytes) != header_len:
            raise ParseError("truncated checkpoint header")
        try:
            header = json.loads(header_bytes.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"bad checkpoint header: {exc}") from exc
        block = fh.read()
    if header.get("version") != FORMAT_VERSION:
        raise ParseError(f"unsupported checkpoint version {header.get('version')}")
    if hashlib.sha256(block).hexdigest() != header["checksum"]:
        raise ParseError("checkpoint checksum mismatch")
    arrays = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + count * 8
        if end > len(block):
            raise ParseError(f"tensor {entry['name']} overruns parameter block")
        arrays[entry["name"]] = (
            np.frombuffer(block[start:end], dtype="<f8").reshape(shape).copy()
        )
    return header["type"], header["meta"], arrays


def save_model(path, model, norm_stats=None):
    from .model import Model  # local import to avoid a cycle

    assert isinstance(model, Model)
    meta = {
        "arch": model.cfg.to_dict(),
        "seed": model.seed,
        "norm_stats": norm_stats.to_dict() if norm_stats is not None else None,
    }
    save_checkpoint(path, "mhdnn", meta, model.named_parameters())


def load_model(path):
    """Returns (Model, norm_stats_dict_or_None)."""
    from .model import ArchConfig, Model

    model_type, meta, arrays = load_checkpoint(path)
    if model_type != "mhdnn":
        raise ParseError(f"expected an mhdnn checkpoint, found {model_type!r}")
    model = Model(ArchConfig.from_dict(meta["arch"]), seed=meta["seed"])
    params = model.named_parameters()
    if set(params) != set(arrays):
        raise ParseError("checkpoint tensor names do not match the architecture")
    for name, arr in arrays.items():
        if params[name].shape != arr.shape:
            raise ParseError(f"tensor {name} has shape {arr.shape}, expected {params[name].shape}")
        params[name][...] = arr
    return model, meta.get("norm_stats")
