"""Reader and writer for the big-endian IDX files MNIST ships in."""

from __future__ import annotations

import gzip
import os
import struct

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


def _read_bytes(path) -> bytes:
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def _parse(raw: bytes, magic: int, ndim: int, path) -> np.ndarray:
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IdxFormatError(f"{path}: truncated header, expected {header} bytes, got {len(raw)}")
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise IdxFormatError(f"{path}: bad magic number 0x{found:08x}, expected 0x{magic:08x}")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    expected = header + int(np.prod(dims))
    if len(raw) != expected:
        raise IdxFormatError(f"{path}: truncated or oversized file, expected {expected} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=header).reshape(dims)


def read_idx_images(path) -> np.ndarray:
    return _parse(_read_bytes(path), IMAGES_MAGIC, 3, path)


def read_idx_labels(path) -> np.ndarray:
    return _parse(_read_bytes(path), LABELS_MAGIC, 1, path)


def load_mnist(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Images as float64 in [0, 1] with shape (n, 28, 28), and uint8 labels."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(f"count mismatch: {images.shape[0]} images but {labels.shape[0]} labels")
    if labels.size and labels.max() > 9:
        raise IdxFormatError(f"{labels_path}: label {labels.max()} outside 0..9")
    return images.astype(float) / 255.0, labels


def write_idx_images(path, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">4I", IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">2I", LABELS_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


def find_mnist(directory) -> dict[str, tuple[str, str]]:
    """Locate the standard MNIST file pairs (plain or gzipped) under ``directory``."""
    names = {
        "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    }
    found = {}
    for split, pair in names.items():
        paths = []
        for name in pair:
            for candidate in (name, name + ".gz", name.replace("-idx", ".idx")):
                p = os.path.join(directory, candidate)
                if os.path.exists(p):
                    paths.append(p)
                    break
        if len(paths) == 2:
            found[split] = tuple(paths)
    return found
