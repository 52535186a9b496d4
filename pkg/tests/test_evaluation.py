import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_1nn
from tsenet.evaluation import (
    accuracy_sweep,
    angle_targets,
    fit_affine_readout,
    knn_classify,
    readout_rms,
    spaced_indices,
    volatility_ratio,
)


def test_readout_recovers_affine_targets():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(40, 5))
    w = rng.normal(size=(2, 5))
    b = np.array([0.3, -1.0])
    model = fit_affine_readout(z, z @ w.T + b)
    resid = model.predict(z) - (z @ w.T + b)
    assert np.sqrt(np.mean(resid**2)) < 1e-8


def test_readout_two_point_line():
    model = fit_affine_readout(np.array([[0.0], [1.0]]), np.array([0.0, 2.0]))
    assert model.weights[0, 0] == pytest.approx(2.0, abs=1e-6)
    assert model.bias[0] == pytest.approx(0.0, abs=1e-6)


def test_readout_residual_orthogonal_to_design():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(100, 6))
    y = rng.normal(size=(100, 2))
    resid = fit_affine_readout(z, y).predict(z) - y
    assert np.max(np.abs(z.T @ resid)) < 1e-6
    assert np.max(np.abs(resid.sum(axis=0))) < 1e-6


def test_readout_invariant_to_affine_reparameterization():
    rng = np.random.default_rng(2)
    z = rng.normal(size=(60, 4))
    y = rng.normal(size=(60, 2))
    m = rng.normal(size=(4, 4)) + 3 * np.eye(4)
    shifted = z @ m + rng.normal(size=4)
    p1 = fit_affine_readout(z, y).predict(z)
    p2 = fit_affine_readout(shifted, y).predict(shifted)
    np.testing.assert_allclose(p1, p2, atol=1e-6)


def test_rms_perfect_and_constant_predictor():
    alpha = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    z = angle_targets(alpha)
    assert readout_rms(fit_affine_readout(z, z), z, alpha) < 1e-8
    zero = fit_affine_readout(np.zeros((4, 1)), np.zeros((4, 2)))
    assert readout_rms(zero, np.zeros((4000, 1)), alpha) == pytest.approx(math.sqrt(0.5), rel=1e-9)


def test_spaced_indices():
    idx = spaced_indices(6000, 100, 50, seed=0)
    assert len(idx) == 100 and idx.min() >= 0 and idx.max() < 6000
    assert np.all(np.diff(idx) >= 50)
    assert np.array_equal(idx, spaced_indices(6000, 100, 50, seed=0))
    with pytest.raises(ValueError):
        spaced_indices(1000, 100, 50, seed=0)


def test_knn_trivial():
    assert knn_classify([[0.0], [10.0]], ["A", "B"], [[1.0]]).tolist() == ["A"]
    pts = np.random.default_rng(0).normal(size=(5, 3))
    assert knn_classify(pts, np.arange(5), pts[3:4])[0] == 3


def test_knn_tie_goes_to_lowest_index():
    assert knn_classify([[1.0], [-1.0], [1.0]], [7, 8, 9], [[0.0]])[0] == 7


@pytest.mark.parametrize("seed", range(5))
def test_knn_matches_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    # integer grid coordinates make exact ties common
    labeled = rng.integers(-3, 4, size=(200, 5)).astype(float)
    labels = rng.integers(0, 10, size=200)
    queries = rng.integers(-3, 4, size=(50, 5)).astype(float)
    assert knn_classify(labeled, labels, queries).tolist() == brute_force_1nn(labeled.tolist(), labels.tolist(), queries.tolist())


def test_knn_dimension_mismatch():
    with pytest.raises(ValueError):
        knn_classify(np.zeros((3, 2)), [0, 1, 2], np.zeros((1, 3)))
    with pytest.raises(ValueError):
        knn_classify(np.zeros((0, 2)), [], np.zeros((1, 2)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_knn_isometry_invariance(seed):
    rng = np.random.default_rng(seed)
    labeled = rng.normal(size=(30, 4))
    labels = rng.integers(0, 3, size=30)
    queries = rng.normal(size=(20, 4))
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    shift = rng.normal(size=4) * 5
    a = knn_classify(labeled, labels, queries)
    b = knn_classify(labeled @ q + shift, labels, queries @ q + shift)
    assert a.tolist() == b.tolist()


def test_accuracy_sweep_self_classification_and_determinism():
    rng = np.random.default_rng(0)
    pool = rng.normal(size=(40, 6))
    labels = rng.integers(0, 4, size=40)
    ident = lambda x: x
    assert accuracy_sweep(ident, pool, labels, [40], pool, labels) == [(40, 1.0)]
    proj = rng.normal(size=(6, 2))
    rep = lambda x: x @ proj
    first = accuracy_sweep(rep, pool, labels, [5, 10, 40], pool[:15], labels[:15])
    assert first == accuracy_sweep(rep, pool, labels, [5, 10, 40], pool[:15], labels[:15])
    assert [n for n, _ in first] == [5, 10, 40]


def test_accuracy_sweep_errors():
    pool = np.zeros((5, 2))
    with pytest.raises(ValueError):
        accuracy_sweep(lambda x: x, pool, np.zeros(5), [6], pool, np.zeros(5))
    with pytest.raises(ValueError):
        accuracy_sweep(lambda x: x, pool, np.zeros(5), [3, 2], pool, np.zeros(5))


def test_volatility_ratio():
    t = np.arange(1000.0)
    slow = np.sin(2 * np.pi * t / 500)
    fast = np.random.default_rng(0).normal(size=1000)
    ratio = volatility_ratio(np.column_stack([slow, fast]))
    assert ratio[0] < 1e-3 and ratio[1] == pytest.approx(2.0, rel=0.15)
