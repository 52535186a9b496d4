from __future__ import annotations

import numpy as np


def write_pgm(path, frame: np.ndarray) -> None:
    """Binary PGM (P5), maxval 255, pixel = round(value * 255)."""
    frame = np.asarray(frame, dtype=float)
    if frame.ndim == 1:
        frame = frame[None, :]
    pixels = np.rint(np.clip(frame, 0.0, 1.0) * 255).astype(np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(t) for t in tokens[1:])
    pixels = np.frombuffer(data, dtype=np.uint8, offset=pos + 1, count=w * h)
    return pixels.reshape(h, w).astype(float) / maxval
