"""Bilinear affine warping of frames about the image center."""

from __future__ import annotations

import numpy as np

from .camera import CameraState, affine_matrix


def _inverse_2x2(m: np.ndarray) -> np.ndarray:
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    inv = np.empty_like(m)
    inv[..., 0, 0] = m[..., 1, 1] / det
    inv[..., 0, 1] = -m[..., 0, 1] / det
    inv[..., 1, 0] = -m[..., 1, 0] / det
    inv[..., 1, 1] = m[..., 0, 0] / det
    return inv


def bilinear_sample(src: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Sample ``src`` at fractional (row, col) coordinates, zero outside the frame.

    ``src`` is one frame (H, W), sampled at coordinate arrays of any shape,
    or a stack (T, H, W) sampled at coordinates of shape (T, H', W').
    """
    h, w = src.shape[-2:]
    r0 = np.floor(rows).astype(int)
    c0 = np.floor(cols).astype(int)
    fr = rows - r0
    fc = cols - c0
    if src.ndim == 2:
        flat = src.reshape(-1)
        gather = lambda idx: flat[idx]
    else:
        flat = src.reshape(src.shape[0], -1)
        frame = np.arange(src.shape[0]).reshape((-1,) + (1,) * (rows.ndim - 1))
        gather = lambda idx: flat[frame, idx]

    out = np.zeros(np.broadcast_shapes(rows.shape, cols.shape))
    for dr, dc, wt in ((0, 0, (1 - fr) * (1 - fc)), (0, 1, (1 - fr) * fc),
                       (1, 0, fr * (1 - fc)), (1, 1, fr * fc)):
        r = r0 + dr
        c = c0 + dc
        inside = (r >= 0) & (r < h) & (c >= 0) & (c < w)
        vals = gather(np.where(inside, r * w + c, 0))
        out += np.where(inside, vals, 0.0) * wt
    return out


def source_coordinates(cameras: np.ndarray, shape: tuple[int, int]):
    """Source (row, col) sampled by every output pixel for each camera.

    ``cameras`` has shape (..., 6); returns two arrays of shape (..., H, W).
    """
    h, w = shape
    cr, cc = (h - 1) / 2.0, (w - 1) / 2.0
    cams = np.asarray(cameras, dtype=float)
    inv = _inverse_2x2(affine_matrix(cams))[..., None, None, :, :]
    rr, ccs = np.meshgrid(np.arange(h) - cr, np.arange(w) - cc, indexing="ij")
    src_r = inv[..., 0, 0] * rr + inv[..., 0, 1] * ccs + cr - cams[..., 1, None, None]
    src_c = inv[..., 1, 0] * rr + inv[..., 1, 1] * ccs + cc - cams[..., 0, None, None]
    return src_r, src_c


def warp_affine(src: np.ndarray, camera: CameraState | np.ndarray) -> np.ndarray:
    """Apply the camera's affine transform to one frame.

    Output pixel p samples the source at ``A^-1 (p - center) + center - offset``
    with bilinear interpolation and zero padding.
    """
    cam = camera.as_array() if isinstance(camera, CameraState) else np.asarray(camera, dtype=float)
    src = np.asarray(src, dtype=float)
    rows, cols = source_coordinates(cam, src.shape)
    return bilinear_sample(src, rows, cols)


def warp_frames(src: np.ndarray, cameras: np.ndarray) -> np.ndarray:
    """Warp one source frame (H, W) or a stack (T, H, W) by T cameras (T, 6)."""
    src = np.asarray(src, dtype=float)
    cams = np.asarray(cameras, dtype=float)
    rows, cols = source_coordinates(cams, src.shape[-2:])
    return bilinear_sample(src, rows, cols)
