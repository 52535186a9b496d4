"""Dense linear algebra shared by the objective, the evaluation code and PCA.

Everything works in float64.  Positive-definite factorizations go through
LAPACK ``dpotrf`` so that a failing pivot can be reported back to the caller,
which is what the training loop uses to decide whether to retry with a
larger jitter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is not strictly positive.

    ``pivot`` is the zero-based index of the offending diagonal entry.
    """

    def __init__(self, pivot: int):
        super().__init__(f"not positive definite (pivot {pivot})")
        self.pivot = pivot


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    mean: np.ndarray
    sample_count: int


@dataclass(frozen=True)
class PCABasis:
    """Leading principal directions of a sample set.

    ``components`` has shape (dim, k); column j is the j-th eigenvector.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def project(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) @ self.components

    def reconstruct(self, z: np.ndarray) -> np.ndarray:
        return self.mean + np.asarray(z, dtype=float) @ self.components.T


def _as_samples(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        x = samples.astype(float, copy=False)
        if x.ndim == 1:
            x = x[:, None]
    else:
        rows = [np.atleast_1d(np.asarray(s, dtype=float)) for s in samples]
        if len({r.shape for r in rows}) > 1:
            raise ValueError("dimension mismatch")
        x = np.array(rows, dtype=float).reshape(len(rows), -1)
    if x.ndim != 2:
        raise ValueError("dimension mismatch")
    if x.shape[0] < 2:
        raise ValueError("insufficient samples")
    if x.shape[1] < 1:
        raise ValueError("dimension mismatch")
    return x


def covariance(samples) -> CovarianceEstimate:
    """Sample covariance with divisor ``n - 1``.

    ``samples`` is an (n, dim) array or a sequence of equal-length vectors.
    """
    x = _as_samples(samples)
    n = x.shape[0]
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    # gemm on X^T X is not guaranteed to return an exactly symmetric result
    cov = 0.5 * (cov + cov.T)
    return CovarianceEstimate(matrix=cov, mean=mean, sample_count=n)


def _check_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def cholesky(m: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """Lower Cholesky factor of ``m + jitter * I``.

    Raises :class:`NotPositiveDefiniteError` carrying the failing pivot.
    """
    m = _check_square(m)
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-9 * max(1.0, np.abs(m).max())):
        raise ValueError("matrix is not symmetric")
    a = m + jitter * np.eye(m.shape[0]) if jitter else m.copy()
    factor, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    return factor


def logdet_from_cholesky(factor: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def inverse_from_cholesky(factor: np.ndarray) -> np.ndarray:
    n = factor.shape[0]
    linv = solve_triangular(factor, np.eye(n), lower=True)
    inv = linv.T @ linv
    return 0.5 * (inv + inv.T)


def logdet_spd(m: np.ndarray, jitter: float = 0.0) -> float:
    """``log det(m + jitter * I)`` for a symmetric positive definite ``m``."""
    return logdet_from_cholesky(cholesky(m, jitter))


def spd_inverse(m: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """Symmetric inverse of ``m + jitter * I`` via its Cholesky factor."""
    return inverse_from_cholesky(cholesky(m, jitter))


def pca_fit(samples, k: int) -> PCABasis:
    """Fit the ``k`` leading principal components of ``samples``.

    The basis comes from a symmetric eigendecomposition of the sample
    covariance; components are sorted by decreasing variance and each is
    sign-normalized so its largest-magnitude entry is positive.
    """
    est = covariance(samples)
    dim = est.matrix.shape[0]
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} must lie in 1..{dim}")
    evals, evecs = np.linalg.eigh(est.matrix)
    order = np.argsort(evals)[::-1][:k]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    pivots = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    return PCABasis(mean=est.mean, components=evecs * signs, explained_variance=evals)
