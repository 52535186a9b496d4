import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_difference, max_relative_error
from tsenet.network import ActivationTrace, LayerSpec, forward, init_params
from tsenet.objective import (
    DegenerateCovarianceError,
    ObjectiveConfig,
    entropy_value_and_adjoints,
    ts_value_and_adjoints,
    tse_step_gradient,
    tse_value,
)
from tsenet.optimizer import AdamState, adam_step


def trace_of(*layers, starts=(0,)):
    layers = [np.asarray(a, dtype=float).reshape(len(a), -1) for a in layers]
    return ActivationTrace(inputs=np.zeros((layers[0].shape[0], 1)), layers=layers,
                           clip_starts=np.array(starts))


def ts_loop_oracle(layers, starts, c):
    frames = layers[0].shape[0]
    begins = set(starts)
    total = 0.0
    for cl, a in zip(c, layers):
        for t in range(1, frames):
            if t in begins:
                continue
            total += cl * sum((a[t, k] - a[t - 1, k]) ** 2 for k in range(a.shape[1]))
    return total


def test_ts_constant_activations():
    value, per_layer, adj = ts_value_and_adjoints(trace_of(np.full((5, 2), 0.3)), [1.0])
    assert value == 0 and per_layer == [0.0]
    assert np.all(adj[0] == 0)


def test_ts_hand_example():
    value, _, adj = ts_value_and_adjoints(trace_of([0.0, 1.0, 1.0]), [1.0])
    assert value == 1.0
    np.testing.assert_array_equal(adj[0][:, 0], [-2.0, 2.0, 0.0])


def test_ts_ignores_clip_boundaries():
    value, _, adj = ts_value_and_adjoints(trace_of([0.0, 1.0, 5.0, 5.0], starts=(0, 2)), [1.0])
    assert value == 1.0
    np.testing.assert_array_equal(adj[0][:, 0], [-2.0, 2.0, 0.0, 0.0])


def test_ts_rejects_single_frame_clip():
    with pytest.raises(ValueError, match="clip too short"):
        ts_value_and_adjoints(trace_of([0.0, 1.0, 2.0], starts=(0, 2)), [1.0])


def test_ts_matches_loop_oracle_and_finite_differences():
    rng = np.random.default_rng(4)
    layers = [rng.normal(size=(9, 3)), rng.normal(size=(9, 2))]
    starts, c = (0, 4, 6), [1.5, 0.5]
    value, _, adj = ts_value_and_adjoints(trace_of(*layers, starts=starts), c)
    assert value == pytest.approx(ts_loop_oracle(layers, starts, c), rel=1e-13)
    fd = central_difference(lambda ls: ts_value_and_adjoints(trace_of(*ls, starts=starts), c)[0], layers)
    assert max_relative_error(adj, fd) < 1e-7


def test_entropy_identity_layer_contributes_zero():
    # +-1 columns with T = 4 give sample covariance (4/3) I; scale so it is exactly I
    a = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]) * math.sqrt(3) / 2
    value, logdets, _ = entropy_value_and_adjoints(trace_of(a), [1.0], 0.0)
    assert value == pytest.approx(0.0, abs=1e-14)
    assert logdets[0] == pytest.approx(0.0, abs=1e-14)


def test_entropy_scalar_hand_example():
    value, _, adj = entropy_value_and_adjoints(trace_of([-1.0, 1.0]), [1.0], 0.0)
    assert value == pytest.approx(math.log(2.0), rel=1e-15)
    np.testing.assert_allclose(adj[0][:, 0], [-1.0, 1.0], rtol=1e-15)


def test_entropy_adjoints_match_finite_differences():
    rng = np.random.default_rng(9)
    layers = [np.tanh(rng.normal(size=(40, n))) for n in (4, 3, 2)]
    d, jitter = [10.0, 3.0, 1.0], 1e-6
    value, _, adj = entropy_value_and_adjoints(trace_of(*layers), d, jitter)
    fd = central_difference(lambda ls: entropy_value_and_adjoints(trace_of(*ls), d, jitter)[0], layers)
    assert max_relative_error(adj, fd) < 1e-5


def test_entropy_adjoints_sum_to_zero_over_frames():
    rng = np.random.default_rng(1)
    _, _, adj = entropy_value_and_adjoints(trace_of(rng.normal(size=(30, 5))), [2.0], 1e-6)
    np.testing.assert_allclose(adj[0].sum(axis=0), 0.0, atol=1e-12)


def test_entropy_degenerate_layer_is_named():
    with pytest.raises(DegenerateCovarianceError, match="layer 2"):
        layers = (np.random.default_rng(0).normal(size=(6, 2)), np.ones((6, 2)))
        entropy_value_and_adjoints(trace_of(*layers), [1.0, 1.0], 0.0)


def tiny_problem(seed=0):
    rng = np.random.default_rng(seed)
    params = init_params([LayerSpec(4), LayerSpec(3)], 6, seed)
    inputs = np.cumsum(rng.normal(size=(12, 6)) * 0.5, axis=0)
    return params, inputs


def test_null_objective():
    params, inputs = tiny_problem()
    value, grads = tse_step_gradient(params, inputs, [0], ObjectiveConfig([0, 0], [0, 0]))
    assert value.f_total == 0.0
    assert all(np.all(g == 0) for g in grads)


def test_end_to_end_gradient_matches_finite_differences():
    params, inputs = tiny_problem(3)
    config = ObjectiveConfig(c=[1.0, 2.0], d=[10.0, 10.0], jitter=1e-6)
    value, grads = tse_step_gradient(params, inputs, [0], config)
    f = lambda arrs: tse_value(forward(params.with_arrays(arrs), inputs), config).f_total
    assert max_relative_error(grads, central_difference(f, params.arrays(), 1e-5)) < 1e-4


def test_end_to_end_gradient_with_several_clips():
    params, inputs = tiny_problem(5)
    config = ObjectiveConfig(c=[1.0, 2.0], d=[10.0, 10.0], jitter=1e-6)
    starts = [0, 5, 9]
    _, grads = tse_step_gradient(params, inputs, starts, config)
    f = lambda arrs: tse_value(forward(params.with_arrays(arrs), inputs, starts), config).f_total
    assert max_relative_error(grads, central_difference(f, params.arrays(), 1e-5)) < 1e-4


def test_value_bundle_is_consistent():
    params, inputs = tiny_problem()
    value, _ = tse_step_gradient(params, inputs, [0], ObjectiveConfig.doubling(2))
    assert value.f_total == value.f_ts - value.f_e
    assert value.f_ts == pytest.approx(sum(value.per_layer_ts))
    assert value.f_e == pytest.approx(10 * sum(value.per_layer_logdet))


def test_adam_step_descends():
    params, inputs = tiny_problem(2)
    config = ObjectiveConfig.doubling(2)
    before, grads = tse_step_gradient(params, inputs, [0], config)
    arrays, _ = adam_step(params.arrays(), grads, AdamState.zeros_like(params.arrays(), rate=1e-4))
    after = tse_value(forward(params.with_arrays(arrays), inputs), config)
    assert after.f_total < before.f_total


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 20.0), st.integers(0, 1000))
def test_coefficient_scaling(lam, seed):
    params, inputs = tiny_problem(seed)
    base = ObjectiveConfig(c=[1.0, 2.0], d=[3.0, 5.0], jitter=1e-6)
    scaled = ObjectiveConfig(c=[lam * 1.0, lam * 2.0], d=[lam * 3.0, lam * 5.0], jitter=1e-6)
    v1, g1 = tse_step_gradient(params, inputs, [0], base)
    v2, g2 = tse_step_gradient(params, inputs, [0], scaled)
    assert v2.f_total == pytest.approx(lam * v1.f_total, rel=1e-12)
    for a, b in zip(g1, g2):
        np.testing.assert_allclose(b, lam * a, rtol=1e-10, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 15), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_ts_nonnegative_and_zero_iff_constant(frames, units, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(frames, units))
    assert ts_value_and_adjoints(trace_of(a), [1.0])[0] > 0
    const = np.repeat(a[:1], frames, axis=0)
    assert ts_value_and_adjoints(trace_of(const), [1.0])[0] == 0


def test_config_validation():
    with pytest.raises(ValueError):
        ObjectiveConfig(c=[1.0], d=[1.0, 2.0])
    with pytest.raises(ValueError):
        ObjectiveConfig(c=[1.0], d=[1.0], jitter=0.0)
    params, inputs = tiny_problem()
    with pytest.raises(ValueError):
        tse_step_gradient(params, inputs, [0], ObjectiveConfig([1.0], [1.0]))
