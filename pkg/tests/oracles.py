"""Independent reference computations used by the tests.

Nothing here imports from tsenet; each oracle is written the slow,
obvious way.
"""

from __future__ import annotations

import math

import numpy as np


def two_pass_covariance(samples):
    n = len(samples)
    dim = len(samples[0])
    mean = [sum(s[j] for s in samples) / n for j in range(dim)]
    cov = [[0.0] * dim for _ in range(dim)]
    for s in samples:
        for i in range(dim):
            for j in range(dim):
                cov[i][j] += (s[i] - mean[i]) * (s[j] - mean[j])
    return np.array(cov) / (n - 1), np.array(mean)


def cofactor_det(m) -> float:
    m = [list(map(float, row)) for row in m]
    cache = {}

    def det(rows: tuple, cols: tuple) -> float:
        # Laplace expansion along the first remaining row, memoized on the minor
        key = (rows, cols)
        if key in cache:
            return cache[key]
        if len(rows) == 1:
            return m[rows[0]][cols[0]]
        total = 0.0
        r, rest = rows[0], rows[1:]
        for k, c in enumerate(cols):
            if m[r][c] != 0.0:
                total += (-1) ** k * m[r][c] * det(rest, cols[:k] + cols[k + 1:])
        cache[key] = total
        return total

    n = len(m)
    return det(tuple(range(n)), tuple(range(n)))


def scalar_forward(weights, biases, x, activation=math.tanh):
    """Forward pass one unit at a time with plain Python floats."""
    a = list(map(float, x))
    layers = []
    for w, b in zip(weights, biases):
        nxt = []
        for k in range(len(b)):
            z = b[k]
            for j in range(len(a)):
                z += w[k][j] * a[j]
            nxt.append(activation(z))
        layers.append(nxt)
        a = nxt
    return layers


def central_difference(f, arrays, step=1e-5):
    """Gradient of f(arrays) w.r.t. every entry of every array."""
    grads = []
    for i, a in enumerate(arrays):
        g = np.zeros_like(a, dtype=float)
        for idx in np.ndindex(a.shape):
            plus = [b.copy() for b in arrays]
            minus = [b.copy() for b in arrays]
            plus[i][idx] += step
            minus[i][idx] -= step
            g[idx] = (f(plus) - f(minus)) / (2 * step)
        grads.append(g)
    return grads


def max_relative_error(a_list, b_list, floor=1e-8) -> float:
    worst = 0.0
    for a, b in zip(a_list, b_list):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    return worst


def brute_force_1nn(labeled, labels, queries):
    out = []
    for q in queries:
        best, best_i = None, None
        for i, p in enumerate(labeled):
            d = sum((float(x) - float(y)) ** 2 for x, y in zip(p, q))
            if best is None or d < best:
                best, best_i = d, i
        out.append(labels[best_i])
    return out


def block_means(frame, block):
    h, w = len(frame), len(frame[0])
    out = []
    for br in range(0, h, block):
        for bc in range(0, w, block):
            s = 0.0
            for r in range(br, br + block):
                for c in range(bc, bc + block):
                    s += frame[r][c]
            out.append(s / (block * block))
    return out
