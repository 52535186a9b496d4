"""ADAM over a flat list of parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0
    rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    # global-norm clip; None disables it
    clip_norm: float | None = field(default=None)

    @classmethod
    def zeros_like(cls, arrays: Sequence[np.ndarray], **hyper) -> "AdamState":
        return cls(
            m=[np.zeros_like(a, dtype=float) for a in arrays],
            v=[np.zeros_like(a, dtype=float) for a in arrays],
            **hyper,
        )


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState):
    """One bias-corrected ADAM update.

    Returns ``(new_params, new_state)``; the inputs are left untouched.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and moments must have the same number of arrays")
    for p, g, m in zip(params, grads, state.m):
        if np.shape(p) != np.shape(g) or np.shape(p) != m.shape:
            raise ValueError(f"shape mismatch: param {np.shape(p)}, grad {np.shape(g)}, moment {m.shape}")

    grads = [np.asarray(g, dtype=float) for g in grads]
    if state.clip_norm is not None:
        norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
        if norm > state.clip_norm:
            grads = [g * (state.clip_norm / norm) for g in grads]

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**step
    corr2 = 1.0 - b2**step
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / corr1
        v_hat = v / corr2
        new_params.append(p - state.rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        new_m.append(m)
        new_v.append(v)
    new_state = AdamState(
        m=new_m, v=new_v, step=step, rate=state.rate, beta1=b1, beta2=b2,
        epsilon=state.epsilon, clip_norm=state.clip_norm,
    )
    return new_params, new_state
