"""Temporal-smoothing and log-det entropy objectives and their adjoints.

Both terms are functions of the activation trace only.  Each ``*_adjoints``
function returns the objective value together with the derivative of that
value with respect to every activation; :func:`tse_step_gradient` combines
them and pushes the result through :func:`tsenet.network.backward`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import ActivationTrace, NetworkParams, backward, forward
from .numerics import NotPositiveDefiniteError, cholesky, covariance, inverse_from_cholesky, logdet_from_cholesky


class DegenerateCovarianceError(RuntimeError):
    def __init__(self, layer: int, jitter: float):
        super().__init__(f"degenerate layer covariance in layer {layer} (jitter {jitter:g})")
        self.layer = layer
        self.jitter = jitter


@dataclass
class ObjectiveConfig:
    c: Sequence[float]
    d: Sequence[float]
    jitter: float = 1e-6

    def __post_init__(self):
        if len(self.c) != len(self.d):
            raise ValueError("c and d must have one entry per layer")
        if any(v < 0 for v in self.c) or any(v < 0 for v in self.d):
            raise ValueError("layer weights must be nonnegative")
        if not self.jitter > 0:
            raise ValueError("jitter must be positive")

    @classmethod
    def doubling(cls, depth: int, d: float = 10.0, jitter: float = 1e-6) -> "ObjectiveConfig":
        """c_l = 2**(l-1) and a constant d_l, as used for the clock network."""
        return cls(c=[2.0**l for l in range(depth)], d=[d] * depth, jitter=jitter)


@dataclass
class ObjectiveValue:
    f_ts: float
    f_e: float
    f_total: float
    per_layer_ts: list[float] = field(default_factory=list)
    per_layer_logdet: list[float] = field(default_factory=list)


def _pair_mask(frames: int, clip_starts: np.ndarray) -> np.ndarray:
    """Boolean mask over successive-frame pairs (t-1, t) that lie in one clip."""
    mask = np.ones(frames - 1, dtype=bool)
    starts = clip_starts[clip_starts > 0]
    mask[starts - 1] = False
    return mask


def clip_lengths(frames: int, clip_starts: np.ndarray) -> np.ndarray:
    return np.diff(np.append(clip_starts, frames))


def ts_value_and_adjoints(trace: ActivationTrace, c: Sequence[float]):
    """Sum of c_l-weighted squared frame-to-frame changes within each clip.

    Returns ``(value, per_layer_values, adjoints)``.
    """
    if len(c) != len(trace.layers):
        raise ValueError("one c coefficient per layer is required")
    frames = trace.frames
    if frames < 2 or np.any(clip_lengths(frames, trace.clip_starts) < 2):
        raise ValueError("clip too short for temporal differencing")
    mask = _pair_mask(frames, trace.clip_starts)[:, None]

    per_layer, adjoints = [], []
    for cl, a in zip(c, trace.layers):
        diff = np.where(mask, a[1:] - a[:-1], 0.0)
        per_layer.append(float(cl * np.sum(diff * diff)))
        g = np.zeros_like(a)
        g[1:] += 2.0 * cl * diff
        g[:-1] -= 2.0 * cl * diff
        adjoints.append(g)
    return float(sum(per_layer)), per_layer, adjoints


def entropy_value_and_adjoints(trace: ActivationTrace, d: Sequence[float], jitter: float):
    """Sum of d_l-weighted log-determinants of each layer's jittered covariance.

    All frames in the trace, across clips, are pooled into one covariance per
    layer.  With C the jittered covariance and x_t the centered activation,
    the adjoint of frame t is ``d_l * 2/(T-1) * C^{-1} x_t``; the dependence
    through the batch mean drops out because the centered rows sum to zero.

    Returns ``(value, per_layer_logdets, adjoints)``.
    """
    if len(d) != len(trace.layers):
        raise ValueError("one d coefficient per layer is required")
    frames = trace.frames
    if frames < 2:
        raise ValueError("insufficient samples")

    value, logdets, adjoints = 0.0, [], []
    for l, (dl, a) in enumerate(zip(d, trace.layers), start=1):
        est = covariance(a)
        try:
            factor = cholesky(est.matrix, jitter)
        except NotPositiveDefiniteError as exc:
            raise DegenerateCovarianceError(l, jitter) from exc
        logdet = logdet_from_cholesky(factor)
        logdets.append(logdet)
        if dl == 0:
            adjoints.append(np.zeros_like(a))
            continue
        value += dl * logdet
        inv = inverse_from_cholesky(factor)
        adjoints.append((2.0 * dl / (frames - 1)) * (a - est.mean) @ inv)
    return float(value), logdets, adjoints


def tse_value(trace: ActivationTrace, config: ObjectiveConfig) -> ObjectiveValue:
    f_ts, per_ts, _ = ts_value_and_adjoints(trace, config.c)
    f_e, logdets, _ = entropy_value_and_adjoints(trace, config.d, config.jitter)
    return ObjectiveValue(f_ts, f_e, f_ts - f_e, per_ts, logdets)


def tse_step_gradient(params: NetworkParams, inputs: np.ndarray, clip_starts, config: ObjectiveConfig):
    """Value of f_TS - f_E on one batch and its gradient w.r.t. ``params``.

    The gradient is a list in :meth:`NetworkParams.arrays` order.
    """
    if len(config.c) != params.depth:
        raise ValueError(f"objective has {len(config.c)} layer weights, network has {params.depth} layers")
    trace = forward(params, inputs, clip_starts)
    f_ts, per_ts, ts_adj = ts_value_and_adjoints(trace, config.c)
    f_e, logdets, e_adj = entropy_value_and_adjoints(trace, config.d, config.jitter)
    adjoints = [gt - ge for gt, ge in zip(ts_adj, e_adj)]
    grads = backward(params, trace, adjoints)
    return ObjectiveValue(f_ts, f_e, f_ts - f_e, per_ts, logdets), grads
