"""Readout and nearest-neighbour protocols for judging a representation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np


@dataclass
class ReadoutModel:
    weights: np.ndarray  # (outputs, K)
    bias: np.ndarray  # (outputs,)

    def predict(self, reps: np.ndarray) -> np.ndarray:
        return np.asarray(reps, dtype=float) @ self.weights.T + self.bias


def fit_affine_readout(reps: np.ndarray, targets: np.ndarray, ridge: float = 1e-8) -> ReadoutModel:
    """Least-squares affine map reps -> targets via ridge-stabilized normal equations."""
    z = np.atleast_2d(np.asarray(reps, dtype=float))
    y = np.asarray(targets, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if z.shape[0] != y.shape[0]:
        raise ValueError("reps and targets differ in sample count")
    design = np.hstack([z, np.ones((z.shape[0], 1))])
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    coef = np.linalg.solve(gram, design.T @ y)
    return ReadoutModel(weights=coef[:-1].T, bias=coef[-1])


def angle_targets(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return np.column_stack([np.cos(alpha), np.sin(alpha)])


def readout_rms(model: ReadoutModel, reps: np.ndarray, alpha: np.ndarray) -> float:
    """RMS over frames and both components of prediction - (cos alpha, sin alpha)."""
    err = model.predict(reps) - angle_targets(alpha)
    return float(np.sqrt(np.mean(err * err)))


def spaced_indices(total: int, count: int, min_gap: int, seed: int) -> np.ndarray:
    """``count`` sorted random frame indices in [0, total), at least ``min_gap`` apart."""
    slack = total - (count - 1) * min_gap
    if slack < count:
        raise ValueError(f"cannot place {count} frames {min_gap} apart in {total}")
    rng = np.random.default_rng(seed)
    base = np.sort(rng.choice(slack, size=count, replace=False))
    return base + np.arange(count) * (min_gap - 1)


def knn_classify(labeled_reps: np.ndarray, labels: Sequence, queries: np.ndarray,
                 chunk: int = 1024) -> np.ndarray:
    """1-nearest-neighbour labels under Euclidean distance.

    Ties go to the lowest labeled index.
    """
    ref = np.atleast_2d(np.asarray(labeled_reps, dtype=float))
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    labels = np.asarray(labels)
    if ref.shape[0] == 0 or ref.shape[0] != labels.shape[0]:
        raise ValueError("labeled set must be nonempty with one label per row")
    if ref.shape[1] != q.shape[1]:
        raise ValueError(f"dimension mismatch: labeled K={ref.shape[1]}, query K={q.shape[1]}")
    ref_sq = np.einsum("ij,ij->i", ref, ref)
    out = np.empty(q.shape[0], dtype=labels.dtype)
    for start in range(0, q.shape[0], chunk):
        block = q[start:start + chunk]
        # expanded form may misorder near-ties; exact distances decide among
        # candidates within a rounding margin of the best
        approx = ref_sq[None, :] - 2.0 * block @ ref.T
        best = approx.min(axis=1, keepdims=True)
        margin = 1e-9 * (np.abs(best) + ref_sq.max() + np.einsum("ij,ij->i", block, block)[:, None])
        for i, row in enumerate(approx):
            cand = np.flatnonzero(row <= best[i] + margin[i])
            diff = ref[cand] - block[i]
            dist = np.einsum("ij,ij->i", diff, diff)
            out[start + i] = labels[cand[np.argmin(dist)]]
    return out


def accuracy(predicted, truth) -> float:
    return float(np.mean(np.asarray(predicted) == np.asarray(truth)))


def accuracy_sweep(representation: Callable[[np.ndarray], np.ndarray], pool_inputs: np.ndarray,
                   pool_labels: np.ndarray, sizes: Iterable[int], test_inputs: np.ndarray,
                   test_labels: np.ndarray) -> list[tuple[int, float]]:
    """1-NN test accuracy using the first n pool items as the labeled set, for each n."""
    sizes = list(sizes)
    if any(b < a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be nondecreasing")
    if sizes and sizes[-1] > len(pool_labels):
        raise ValueError(f"size {sizes[-1]} exceeds pool of {len(pool_labels)}")
    if not sizes:
        return []
    pool_reps = representation(pool_inputs[:sizes[-1]])
    test_reps = representation(test_inputs)
    return [(n, accuracy(knn_classify(pool_reps[:n], pool_labels[:n], test_reps), test_labels))
            for n in sizes]


def volatility_ratio(activations: np.ndarray, clip_starts=None) -> np.ndarray:
    """Per-unit mean squared frame-to-frame change divided by the variance."""
    a = np.asarray(activations, dtype=float)
    diff = a[1:] - a[:-1]
    if clip_starts is not None:
        starts = np.asarray(clip_starts)
        keep = np.ones(len(diff), dtype=bool)
        keep[starts[starts > 0] - 1] = False
        diff = diff[keep]
    var = a.var(axis=0, ddof=1)
    return np.mean(diff * diff, axis=0) / np.maximum(var, 1e-300)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
