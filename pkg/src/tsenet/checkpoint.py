"""Binary checkpoint files.

Layout (all integers little-endian)::

    b"TSE1"  uint32 version
    uint64 n  + n bytes   UTF-8 config text
    uint64 iteration
    uint32 count of arrays, then per array:
        uint16 name length + name bytes
        uint32 ndim, ndim x uint64 dims
        prod(dims) x float64 (little-endian)

Arrays are written in a fixed order: W_1, b_1, ..., then ADAM moments,
ADAM scalars, data-generator state and metric summaries.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .network import NetworkParams
from .optimizer import AdamState

MAGIC = b"TSE1"
VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    config: ExperimentConfig
    params: NetworkParams
    adam: AdamState
    iteration: int = 0
    data_state: np.ndarray = field(default_factory=lambda: np.zeros(0))
    summary: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_bytes(self) -> bytes:
        arrays = []
        for i, a in enumerate(self.params.arrays()):
            arrays.append((f"{'W' if i % 2 == 0 else 'b'}{i // 2 + 1}", a))
        arrays += [(f"adam.m{i}", a) for i, a in enumerate(self.adam.m)]
        arrays += [(f"adam.v{i}", a) for i, a in enumerate(self.adam.v)]
        clip = np.nan if self.adam.clip_norm is None else self.adam.clip_norm
        arrays.append(("adam.scalars", np.array([self.adam.step, self.adam.rate, self.adam.beta1,
                                                 self.adam.beta2, self.adam.epsilon, clip])))
        arrays.append(("data_state", self.data_state))
        arrays.append(("summary", self.summary))

        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(struct.pack("<I", VERSION))
        text = self.config.to_text().encode("utf-8")
        buf.write(struct.pack("<Q", len(text)))
        buf.write(text)
        buf.write(struct.pack("<Q", self.iteration))
        buf.write(struct.pack("<I", len(arrays)))
        for name, a in arrays:
            a = np.ascontiguousarray(a, dtype="<f8")
            raw = name.encode("ascii")
            buf.write(struct.pack("<H", len(raw)))
            buf.write(raw)
            buf.write(struct.pack("<I", a.ndim))
            buf.write(struct.pack(f"<{a.ndim}Q", *a.shape))
            buf.write(a.tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        view = memoryview(data)
        pos = 0

        def take(n):
            nonlocal pos
            if pos + n > len(view):
                raise CheckpointError("truncated checkpoint")
            chunk = view[pos:pos + n]
            pos += n
            return chunk

        if bytes(take(4)) != MAGIC:
            raise CheckpointError("not a TSE checkpoint (bad magic)")
        (version,) = struct.unpack("<I", take(4))
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (n,) = struct.unpack("<Q", take(8))
        config = ExperimentConfig.from_text(bytes(take(n)).decode("utf-8"))
        (iteration,) = struct.unpack("<Q", take(8))
        (count,) = struct.unpack("<I", take(4))
        arrays = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", take(2))
            name = bytes(take(nlen)).decode("ascii")
            (ndim,) = struct.unpack("<I", take(4))
            shape = struct.unpack(f"<{ndim}Q", take(8 * ndim))
            size = int(np.prod(shape, dtype=np.int64))
            arrays[name] = np.frombuffer(take(8 * size), dtype="<f8").astype(float).reshape(shape)
        if pos != len(view):
            raise CheckpointError("trailing bytes after checkpoint")

        depth = config.depth
        param_arrays = []
        for l in range(1, depth + 1):
            param_arrays += [arrays[f"W{l}"], arrays[f"b{l}"]]
        params = NetworkParams(param_arrays[0::2], param_arrays[1::2], tuple("tanh" for _ in range(depth)))
        step, rate, b1, b2, eps, clip = arrays["adam.scalars"]
        adam = AdamState(
            m=[arrays[f"adam.m{i}"] for i in range(2 * depth)],
            v=[arrays[f"adam.v{i}"] for i in range(2 * depth)],
            step=int(step), rate=float(rate), beta1=float(b1), beta2=float(b2), epsilon=float(eps),
            clip_norm=None if np.isnan(clip) else float(clip),
        )
        return cls(config, params, adam, iteration, arrays["data_state"], arrays["summary"])

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Checkpoint":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())
