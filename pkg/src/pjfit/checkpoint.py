"""Binary checkpoint format.

Layout (all integers little-endian u32):

    magic "PJF1" | version | config-JSON length + bytes |
    tensor count | per tensor: name length + UTF-8 name, rank, dims...,
    row-major float32 values

Training math runs in float64; checkpoints narrow to float32 on save and
widen on load, so round-trips are bit-exact at 32-bit precision. Loading
validates magic, version, and every tensor name and shape against the
parameter layout implied by the embedded config.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from pjfit.config import ModelConfig, model_config_from_dict, model_config_to_dict
from pjfit.numerics import ParamStore

MAGIC = b"PJF1"
VERSION = 1


class CheckpointError(ValueError):
    pass


class BadMagicError(CheckpointError):
    pass


class UnsupportedVersionError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


def save_checkpoint(store: ParamStore, cfg: ModelConfig, path) -> None:
    config_bytes = json.dumps({"model": model_config_to_dict(cfg)},
                              sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", VERSION),
              struct.pack("<I", len(config_bytes)), config_bytes,
              struct.pack("<I", len(store))]
    for name, p in store.items():
        name_bytes = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(struct.pack("<I", 2))
        chunks.append(struct.pack("<II", *p.value.shape))
        chunks.append(np.ascontiguousarray(p.value, dtype="<f4").tobytes())
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(b"".join(chunks))
    os.replace(tmp, path)


class _Reader:
    def __init__(self, blob: bytes, path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int, context: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedCheckpointError(
                f"{self.path}: file ends inside {context} "
                f"(needed {n} bytes at offset {self.pos})")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, context: str) -> int:
        return struct.unpack("<I", self.take(4, context))[0]


def load_checkpoint(path, expected: ModelConfig | None = None) -> tuple[ParamStore, ModelConfig]:
    """Read a checkpoint; optionally insist it matches an expected config."""
    reader = _Reader(Path(path).read_bytes(), path)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = reader.u32("version")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported format version {version}")
    config_len = reader.u32("config length")
    try:
        config_doc = json.loads(reader.take(config_len, "config").decode("utf-8"))
        cfg = model_config_from_dict(config_doc["model"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: invalid embedded config: {exc}") from exc

    from pjfit.training import param_spec  # deferred: avoids a module cycle

    if expected is not None:
        ours, theirs = param_spec(expected), param_spec(cfg)
        if ours != theirs:
            diff = next(((a, b) for a, b in zip(ours, theirs) if a != b),
                        (ours[min(len(theirs), len(ours) - 1)] if len(ours) != len(theirs) else None, None))
            raise CheckpointShapeError(
                f"{path}: checkpoint config does not match expected config "
                f"(first difference: {diff[1]} vs expected {diff[0]})")

    spec = param_spec(cfg)
    count = reader.u32("tensor count")
    if count != len(spec):
        raise CheckpointShapeError(
            f"{path}: {count} tensors stored, config implies {len(spec)}")
    store = ParamStore()
    for expected_name, rows, cols in spec:
        name_len = reader.u32(f"name length of {expected_name!r}")
        name = reader.take(name_len, f"name of {expected_name!r}").decode("utf-8")
        if name != expected_name:
            raise CheckpointShapeError(
                f"{path}: tensor {name!r} where config expects {expected_name!r}")
        rank = reader.u32(f"rank of {name!r}")
        if rank != 2:
            raise CheckpointShapeError(f"{path}: tensor {name!r} has rank {rank}, expected 2")
        dims = struct.unpack("<II", reader.take(8, f"dims of {name!r}"))
        if dims != (rows, cols):
            raise CheckpointShapeError(
                f"{path}: tensor {name!r} has shape {dims}, config implies {(rows, cols)}")
        raw = reader.take(rows * cols * 4, f"values of tensor {name!r}")
        values = np.frombuffer(raw, dtype="<f4").reshape(rows, cols).astype(np.float64)
        store.add(name, values)
    if reader.pos != len(reader.blob):
        raise CheckpointError(f"{path}: {len(reader.blob) - reader.pos} trailing bytes")
    return store, cfg
