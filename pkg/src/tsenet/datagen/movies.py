"""Movie clips for training and evaluation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .camera import CameraState, CameraWalkParams, camera_trajectory, sample_stationary
from .clock import ClockState, clock_angles, render_clock_frames, add_pixel_noise
from .warp import warp_frames


@dataclass
class MovieClip:
    frames: np.ndarray  # (T, H, W), values in [0, 1]
    ground_truth: np.ndarray  # clock: alpha per frame; MNIST: label per frame
    seed: object = None
    source_id: int | None = None
    cameras: np.ndarray | None = None

    def flat(self) -> np.ndarray:
        return self.frames.reshape(self.frames.shape[0], -1)


def clip_rng(*key: int) -> np.random.Generator:
    """Generator keyed on a tuple of nonnegative ints, e.g. (seed, iteration, clip)."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


class ClockMovie:
    """An endless clock movie that can be cut into consecutive segments.

    The movie state (hand angles and camera) is carried between segments;
    each segment draws its randomness from a generator the caller supplies,
    so a segment is a pure function of (state, rng).
    """

    def __init__(self, camera_params: CameraWalkParams, resolution=(28, 28),
                 clock: ClockState | None = None, camera: CameraState | None = None,
                 rng: np.random.Generator | None = None):
        self.camera_params = camera_params
        self.resolution = tuple(resolution)
        self.clock = clock or ClockState()
        if camera is None:
            camera = sample_stationary(camera_params, rng) if rng is not None else camera_params.mean_state
        self.camera = camera

    def state_array(self) -> np.ndarray:
        return np.concatenate([[self.clock.long_angle, self.clock.short_angle, self.clock.frame_index],
                               self.camera.as_array()])

    def load_state_array(self, values) -> None:
        v = np.asarray(values, dtype=float)
        self.clock = ClockState(float(v[0]), float(v[1]), int(v[2]))
        self.camera = CameraState.from_array(v[3:9])

    def next_segment(self, frames: int, rng: np.random.Generator) -> MovieClip:
        if frames < 2:
            raise ValueError("a clip needs at least 2 frames")
        # first frame uses the current camera, later ones continue the walk
        walk = camera_trajectory(self.camera, self.camera_params, frames, rng)
        cameras = np.vstack([self.camera.as_array(), walk[:-1]])
        long_a, short_a = clock_angles(self.clock, frames)
        images = render_clock_frames(long_a, short_a, cameras, self.resolution,
                                     self.camera_params.pixel_noise_std, rng)
        clip = MovieClip(frames=images, ground_truth=long_a - short_a,
                         source_id=self.clock.frame_index, cameras=cameras)
        self.clock = ClockState(float(long_a[-1] - 2 * np.pi / 400),
                                float(short_a[-1] - 2 * np.pi / 2000),
                                self.clock.frame_index + frames)
        self.camera = CameraState.from_array(walk[-1])
        return clip


def make_clock_clip(start_state: ClockState, camera_params: CameraWalkParams, frames: int,
                    resolution=(28, 28), seed: int = 0) -> MovieClip:
    """Clock movie whose camera starts at a draw from the walk's stationary law."""
    rng = clip_rng(seed)
    movie = ClockMovie(camera_params, resolution, clock=start_state, rng=rng)
    clip = movie.next_segment(frames, rng)
    clip.seed = seed
    return clip


def make_mnist_clip(image: np.ndarray, camera_params: CameraWalkParams, frames: int,
                    seed=0, label: int = -1, source_id: int | None = None) -> MovieClip:
    """Shaky-camera movie of one still image; the camera starts at the mean."""
    if frames < 2:
        raise ValueError("a clip needs at least 2 frames")
    rng = clip_rng(*np.atleast_1d(seed))
    start = camera_params.mean_state
    walk = camera_trajectory(start, camera_params, frames - 1, rng)
    cameras = np.vstack([start.as_array(), walk])
    images = warp_frames(np.broadcast_to(image, (frames,) + image.shape), cameras)
    images = add_pixel_noise(images, camera_params.pixel_noise_std, rng)
    return MovieClip(frames=images, ground_truth=np.full(frames, label), seed=seed,
                     source_id=source_id, cameras=cameras)


def make_mnist_batch(images: np.ndarray, indices, camera_params: CameraWalkParams, frames: int,
                     batch_seed: tuple[int, ...], workers: int = 1):
    """Concatenate one clip per source image.

    Clip i is seeded with ``batch_seed + (i,)`` so the result does not depend
    on ``workers``.  Returns ``(frames (n*T, H*W), clip_starts)``.
    """
    indices = list(indices)

    def one(i):
        src = indices[i]
        return make_mnist_clip(images[src], camera_params, frames, seed=tuple(batch_seed) + (i,),
                               source_id=src).flat()

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            clips = list(pool.map(one, range(len(indices))))
    else:
        clips = [one(i) for i in range(len(indices))]
    starts = np.arange(len(indices)) * frames
    return np.vstack(clips), starts


def downsample(frame: np.ndarray, block: int = 4) -> np.ndarray:
    """Means of ``block`` x ``block`` pixel clusters in raster order.

    Accepts one frame (H, W) or a stack (..., H, W); returns (..., H*W/block**2).
    """
    frame = np.asarray(frame, dtype=float)
    h, w = frame.shape[-2:]
    if h % block or w % block:
        raise ValueError(f"frame {h}x{w} is not divisible into {block}x{block} blocks")
    lead = frame.shape[:-2]
    blocks = frame.reshape(lead + (h // block, block, w // block, block))
    return blocks.mean(axis=(-3, -1)).reshape(lead + (-1,))


def downsample_4x4(frame: np.ndarray) -> np.ndarray:
    return downsample(frame, 4)
