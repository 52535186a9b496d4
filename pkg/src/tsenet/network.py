"""Dense feedforward network with an activation-adjoint backward pass.

The objectives in :mod:`tsenet.objective` depend on the activations of
every layer, not just the output, so :func:`backward` takes one adjoint
matrix per layer and folds them in during reverse accumulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ACTIVATIONS = ("tanh", "linear")


@dataclass(frozen=True)
class LayerSpec:
    units: int
    activation: str = "tanh"

    def __post_init__(self):
        if self.units < 1:
            raise ValueError("a layer needs at least one unit")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class NetworkParams:
    """Weights ``W_l`` of shape (N_l, N_{l-1}) and biases of length N_l."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[str, ...]

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("weights, biases and activations differ in length")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {l + 1}: weight {w.shape} / bias {b.shape}")
            if l and w.shape[1] != self.weights[l - 1].shape[0]:
                raise ValueError(f"layer {l + 1}: fan-in does not match previous layer")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def layer_sizes(self) -> list[int]:
        return [w.shape[0] for w in self.weights]

    @property
    def depth(self) -> int:
        return len(self.weights)

    def arrays(self) -> list[np.ndarray]:
        """Parameter arrays in canonical order W_1, b_1, W_2, b_2, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "NetworkParams":
        return NetworkParams(
            weights=[np.array(a, dtype=float) for a in arrays[0::2]],
            biases=[np.array(a, dtype=float) for a in arrays[1::2]],
            activations=self.activations,
        )

    def copy(self) -> "NetworkParams":
        return self.with_arrays(self.arrays())

    def size(self) -> int:
        return sum(a.size for a in self.arrays())


@dataclass
class ActivationTrace:
    """Inputs and per-layer activations for a batch of frames.

    ``layers[l]`` has shape (T, N_{l+1}).  ``clip_starts`` lists the frame
    indices at which a new clip begins; it always starts with 0.
    """

    inputs: np.ndarray
    layers: list[np.ndarray]
    clip_starts: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=int))

    @property
    def frames(self) -> int:
        return self.inputs.shape[0]


def check_clip_starts(clip_starts, frames: int) -> np.ndarray:
    starts = np.asarray([0] if clip_starts is None else clip_starts, dtype=int)
    if starts.ndim != 1 or starts.size == 0 or starts[0] != 0:
        raise ValueError("clip boundaries must start with 0")
    if np.any(np.diff(starts) <= 0) or starts[-1] >= frames:
        raise ValueError("clip boundaries must be strictly increasing and < T")
    return starts


def init_params(layer_specs: Sequence[LayerSpec], input_dim: int, seed: int) -> NetworkParams:
    """Glorot-uniform weights, zero biases."""
    if not layer_specs:
        raise ValueError("need at least one layer")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    fan_in = input_dim
    for spec in layer_specs:
        bound = np.sqrt(6.0 / (fan_in + spec.units))
        weights.append(rng.uniform(-bound, bound, size=(spec.units, fan_in)))
        biases.append(np.zeros(spec.units))
        fan_in = spec.units
    return NetworkParams(weights, biases, tuple(s.activation for s in layer_specs))


def forward(params: NetworkParams, inputs: np.ndarray, clip_starts=None) -> ActivationTrace:
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.input_dim:
        raise ValueError(f"inputs of shape {x.shape} do not match input_dim {params.input_dim}")
    starts = check_clip_starts(clip_starts, x.shape[0])
    layers = []
    a = x
    for w, b, act in zip(params.weights, params.biases, params.activations):
        z = a @ w.T + b
        a = np.tanh(z) if act == "tanh" else z
        layers.append(a)
    return ActivationTrace(inputs=x, layers=layers, clip_starts=starts)


def backward(params: NetworkParams, trace: ActivationTrace, adjoints: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Gradient of ``sum_l sum_{t,k} adjoint[l][t,k] * a_l[t,k]`` w.r.t. the parameters.

    Returns arrays in :meth:`NetworkParams.arrays` order.
    """
    if len(adjoints) != params.depth:
        raise ValueError(f"expected {params.depth} adjoint matrices, got {len(adjoints)}")
    for l, (g, a) in enumerate(zip(adjoints, trace.layers)):
        if np.shape(g) != a.shape:
            raise ValueError(f"layer {l + 1}: adjoint shape {np.shape(g)} != activation shape {a.shape}")

    grads: list[np.ndarray] = [None] * (2 * params.depth)
    carry = None
    for l in reversed(range(params.depth)):
        delta = np.asarray(adjoints[l], dtype=float)
        if carry is not None:
            delta = delta + carry
        if params.activations[l] == "tanh":
            a = trace.layers[l]
            delta = delta * (1.0 - a * a)
        below = trace.layers[l - 1] if l else trace.inputs
        grads[2 * l] = delta.T @ below
        grads[2 * l + 1] = delta.sum(axis=0)
        if l:
            carry = delta @ params.weights[l]
    return grads
