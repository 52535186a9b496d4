"""Shaky-camera model: a mean-reverting random walk over affine parameters."""

from __future__ import annotations

from dataclasses import astuple, dataclass, field

import numpy as np
from scipy.signal import lfilter

COORDS = ("x_offset", "y_offset", "log_scale", "rotation", "shear", "log_aspect")


@dataclass(frozen=True)
class CameraState:
    x_offset: float = 0.0
    y_offset: float = 0.0
    log_scale: float = 0.0
    rotation: float = 0.0
    shear: float = 0.0
    log_aspect: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, values) -> "CameraState":
        return cls(*(float(v) for v in values))

    def matrix(self) -> np.ndarray:
        return affine_matrix(self.as_array())


@dataclass(frozen=True)
class CameraWalkParams:
    """Per-coordinate stationary std and time constant (frames), in COORDS order."""

    stationary_std: tuple[float, ...] = (0.0,) * 6
    time_constant: tuple[float, ...] = (24.0,) * 6
    pixel_noise_std: float = 0.0
    mean_state: CameraState = field(default_factory=CameraState)

    def __post_init__(self):
        if len(self.stationary_std) != 6 or len(self.time_constant) != 6:
            raise ValueError("need one std and one time constant per camera coordinate")
        if any(t < 1 for t in self.time_constant):
            raise ValueError("time constants must be >= 1 frame")
        if any(s < 0 for s in self.stationary_std) or self.pixel_noise_std < 0:
            raise ValueError("standard deviations must be nonnegative")

    @classmethod
    def build(cls, *, position=0.0, log_scale=0.0, rotation=0.0, shear=0.0, log_aspect=0.0,
              time_constant=24.0, pixel_noise=0.0) -> "CameraWalkParams":
        return cls(
            stationary_std=(position, position, log_scale, rotation, shear, log_aspect),
            time_constant=(float(time_constant),) * 6,
            pixel_noise_std=pixel_noise,
        )

    def decay(self) -> np.ndarray:
        return 1.0 - 1.0 / np.asarray(self.time_constant, dtype=float)

    def innovation_std(self) -> np.ndarray:
        # makes the stationary std of the AR(1) recurrence exactly stationary_std
        phi = self.decay()
        return np.asarray(self.stationary_std, dtype=float) * np.sqrt(1.0 - phi * phi)


def clock_walk_defaults(pixel_noise: float = 0.08) -> CameraWalkParams:
    return CameraWalkParams.build(position=1.5, log_scale=0.06, rotation=0.12, pixel_noise=pixel_noise)


def mnist_walk_defaults(pixel_noise: float = 0.08) -> CameraWalkParams:
    return CameraWalkParams.build(position=1.5, log_scale=0.06, rotation=0.12, shear=0.08,
                                  log_aspect=0.05, pixel_noise=pixel_noise)


def camera_walk_step(state: CameraState, params: CameraWalkParams, rng: np.random.Generator) -> CameraState:
    """p <- p + (mu - p)/tau + s * eta for every coordinate."""
    p = state.as_array()
    mu = params.mean_state.as_array()
    tau = np.asarray(params.time_constant, dtype=float)
    eta = rng.standard_normal(6)
    return CameraState.from_array(p + (mu - p) / tau + params.innovation_std() * eta)


def camera_trajectory(start: CameraState, params: CameraWalkParams, steps: int,
                      rng: np.random.Generator) -> np.ndarray:
    """States after 1..steps walk steps, shape (steps, 6).

    Consumes the generator exactly like ``steps`` calls of
    :func:`camera_walk_step` and gives the same values up to rounding.
    """
    mu = params.mean_state.as_array()
    phi = params.decay()
    noise = rng.standard_normal((steps, 6)) * params.innovation_std()
    out = np.empty((steps, 6))
    offset0 = start.as_array() - mu
    for j in range(6):
        y, _ = lfilter([1.0], [1.0, -phi[j]], noise[:, j], zi=[phi[j] * offset0[j]])
        out[:, j] = y + mu[j]
    return out


def sample_stationary(params: CameraWalkParams, rng: np.random.Generator) -> CameraState:
    mu = params.mean_state.as_array()
    return CameraState.from_array(mu + np.asarray(params.stationary_std) * rng.standard_normal(6))


def affine_matrix(camera) -> np.ndarray:
    """rotation @ shear @ diag(scale*aspect, scale/aspect) in (row, col) coordinates.

    ``camera`` is a 6-vector in COORDS order or an array of shape (..., 6);
    the result has shape (..., 2, 2).
    """
    c = np.asarray(camera, dtype=float)
    scale = np.exp(c[..., 2])
    aspect = np.exp(c[..., 5])
    th, sh = c[..., 3], c[..., 4]
    cos, sin = np.cos(th), np.sin(th)
    sr, sc = scale * aspect, scale / aspect
    # R = [[cos, -sin], [sin, cos]], S = [[1, sh], [0, 1]], D = diag(sr, sc)
    m = np.empty(c.shape[:-1] + (2, 2))
    m[..., 0, 0] = cos * sr
    m[..., 0, 1] = (cos * sh - sin) * sc
    m[..., 1, 0] = sin * sr
    m[..., 1, 1] = (sin * sh + cos) * sc
    return m
