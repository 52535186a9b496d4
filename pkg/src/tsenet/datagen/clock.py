"""Two-handed clock scene viewed through a shaky, noisy camera."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraState
from .warp import source_coordinates

LONG_PERIOD = 400
SHORT_PERIOD = 2000
LONG_LENGTH, SHORT_LENGTH = 0.45, 0.28
LONG_WIDTH, SHORT_WIDTH = 1.5, 2.5


@dataclass(frozen=True)
class ClockState:
    """Hand angles in radians, counter-clockwise from the +column axis."""

    long_angle: float = 0.0
    short_angle: float = 0.0
    frame_index: int = 0

    @property
    def alpha(self) -> float:
        return self.long_angle - self.short_angle


def advance_clock(state: ClockState) -> ClockState:
    """Both hands turn clockwise: the long one per 400 frames, the short one per 2000."""
    return ClockState(
        long_angle=state.long_angle - 2 * math.pi / LONG_PERIOD,
        short_angle=state.short_angle - 2 * math.pi / SHORT_PERIOD,
        frame_index=state.frame_index + 1,
    )


def clock_angles(state: ClockState, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Hand angles for ``state`` and the following ``steps - 1`` frames.

    Computed from the frame offset rather than by accumulation so long
    movies do not drift.
    """
    k = np.arange(steps, dtype=float)
    return (state.long_angle - 2 * np.pi * k / LONG_PERIOD,
            state.short_angle - 2 * np.pi * k / SHORT_PERIOD)


def _segment_coverage(rows, cols, angle, length, width):
    """Anti-aliased coverage of a hand drawn from the origin at ``angle``."""
    ux = np.cos(angle)[..., None, None]
    uy = -np.sin(angle)[..., None, None]
    along = np.clip(rows * uy + cols * ux, 0.0, length)
    dist = np.hypot(rows - along * uy, cols - along * ux)
    return np.clip(width / 2.0 + 0.5 - dist, 0.0, 1.0)


def _hands_at(rows, cols, long_angle, short_angle, size):
    long_a = np.asarray(long_angle, dtype=float)
    short_a = np.asarray(short_angle, dtype=float)
    return np.maximum(
        _segment_coverage(rows, cols, long_a, LONG_LENGTH * size, LONG_WIDTH),
        _segment_coverage(rows, cols, short_a, SHORT_LENGTH * size, SHORT_WIDTH),
    )


def _check_resolution(resolution):
    h, w = resolution
    if h < 8 or w < 8:
        raise ValueError("resolution must be at least 8x8")
    return h, w


def render_hands(long_angle, short_angle, resolution: tuple[int, int]) -> np.ndarray:
    """Noise-free clock in the steady frame; angles may be arrays of length T."""
    h, w = _check_resolution(resolution)
    rows, cols = np.meshgrid(np.arange(h) - (h - 1) / 2.0, np.arange(w) - (w - 1) / 2.0, indexing="ij")
    return _hands_at(rows, cols, long_angle, short_angle, min(h, w))


def add_pixel_noise(frames: np.ndarray, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    if noise_std > 0:
        frames = frames + noise_std * rng.standard_normal(frames.shape)
    return np.clip(frames, 0.0, 1.0)


def render_clock_frames(long_angles, short_angles, cameras, resolution, noise_std=0.0, rng=None) -> np.ndarray:
    """Clock frames seen through ``cameras`` (T, 6); returns (T, H, W).

    The scene is analytic, so instead of rendering a steady frame and
    resampling it, coverage is evaluated directly at the source coordinates
    the affine warp would sample.  Same geometry, no interpolation blur.
    """
    h, w = _check_resolution(resolution)
    src_r, src_c = source_coordinates(cameras, (h, w))
    rows = src_r - (h - 1) / 2.0
    cols = src_c - (w - 1) / 2.0
    frames = _hands_at(rows, cols, long_angles, short_angles, min(h, w))
    if noise_std > 0 and rng is None:
        raise ValueError("an rng is required for pixel noise")
    return add_pixel_noise(frames, noise_std, rng)


def render_clock(state: ClockState, camera: CameraState, resolution: tuple[int, int],
                 noise_std: float = 0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    return render_clock_frames(state.long_angle, state.short_angle, camera.as_array(),
                               resolution, noise_std, rng)
