import math

import numpy as np
import pytest

from fairfl.model import (
    ModelParams,
    hard_predictions,
    loss_and_grad,
    mean_loss_and_grad,
    predict_probs,
    predict_probs_batch,
    probs_jacobian,
)


def fd_gradient(fn, vec, step=1e-5):
    """Central finite differences of a scalar function of a flat vector."""
    grad = np.zeros_like(vec)
    for i in range(len(vec)):
        up, down = vec.copy(), vec.copy()
        up[i] += step
        down[i] -= step
        grad[i] = (fn(up) - fn(down)) / (2 * step)
    return grad


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b))


def test_zero_params_are_uniform():
    params = ModelParams.zeros(3, 2)
    assert np.allclose(predict_probs(params, np.ones(3)), [0.5, 0.5])


def test_bias_log3_gives_three_quarters():
    # independent softmax evaluation: exp(ln 3)/(exp(ln 3)+1) = 0.75
    params = ModelParams(np.zeros((2, 4)), np.array([math.log(3.0), 0.0]))
    expected = np.array([3.0, 1.0]) / 4.0
    assert np.allclose(predict_probs(params, np.zeros(4)), expected, atol=1e-12)


def test_probs_sum_to_one():
    rng = np.random.default_rng(0)
    for _ in range(20):
        params = ModelParams(rng.normal(size=(4, 6)), rng.normal(size=4))
        p = predict_probs(params, rng.normal(size=6))
        assert abs(p.sum() - 1.0) < 1e-9
        assert (p >= 0).all() and (p <= 1).all()


def test_binary_softmax_matches_sigmoid():
    rng = np.random.default_rng(1)
    params = ModelParams(rng.normal(size=(2, 5)), rng.normal(size=2))
    x = rng.normal(size=5)
    p = predict_probs(params, x)
    logit = (params.weights[1] - params.weights[0]) @ x + params.bias[1] - params.bias[0]
    assert abs(p[1] - 1.0 / (1.0 + math.exp(-logit))) < 1e-12


def test_shift_invariance():
    rng = np.random.default_rng(2)
    params = ModelParams(rng.normal(size=(3, 4)), rng.normal(size=3))
    shifted = ModelParams(params.weights, params.bias + 7.3)
    x = rng.normal(size=4)
    assert np.allclose(predict_probs(params, x), predict_probs(shifted, x), atol=1e-9)


def test_dimension_mismatch_raises():
    params = ModelParams.zeros(3, 2)
    with pytest.raises(ValueError):
        predict_probs(params, np.ones(4))
    with pytest.raises(ValueError):
        loss_and_grad(params, np.ones(3), 5)


def test_loss_at_even_odds_is_ln2():
    params = ModelParams.zeros(2, 2)
    loss, _ = loss_and_grad(params, np.ones(2), 0)
    assert abs(loss - math.log(2.0)) < 1e-12


def test_loss_grad_matches_finite_differences():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        d, l = int(rng.integers(2, 6)), int(rng.integers(2, 4))
        params = ModelParams(rng.normal(size=(l, d)), rng.normal(size=l))
        x = rng.normal(size=d)
        y = int(rng.integers(0, l))
        _, grad = loss_and_grad(params, x, y)

        def scalar(vec):
            return loss_and_grad(ModelParams.from_vector(vec, d, l), x, y)[0]

        worst = max(worst, rel_err(grad, fd_gradient(scalar, params.to_vector())))
    assert worst < 1e-6


def test_balanced_pair_has_zero_bias_gradient():
    params = ModelParams.zeros(3, 2)
    x = np.array([0.4, -1.2, 2.0])
    _, g0 = loss_and_grad(params, x, 0)
    _, g1 = loss_and_grad(params, x, 1)
    bias_block = (g0 + g1)[params.n_classes * params.n_features :]
    assert np.allclose(bias_block, 0.0, atol=1e-15)


def test_jacobian_rows_sum_to_zero():
    rng = np.random.default_rng(4)
    params = ModelParams(rng.normal(size=(3, 5)), rng.normal(size=3))
    J = probs_jacobian(params, rng.normal(size=5))
    assert np.abs(J.sum(axis=0)).max() < 1e-12


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        d, l = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        params = ModelParams(rng.normal(size=(l, d)), rng.normal(size=l))
        x = rng.normal(size=d)
        J = probs_jacobian(params, x)
        for u in range(l):

            def prob_u(vec, u=u):
                return predict_probs(ModelParams.from_vector(vec, d, l), x)[u]

            worst = max(worst, rel_err(J[u], fd_gradient(prob_u, params.to_vector())))
    assert worst < 1e-6


def test_jacobian_weight_block_vanishes_at_zero_input():
    rng = np.random.default_rng(6)
    params = ModelParams(rng.normal(size=(3, 4)), rng.normal(size=3))
    J = probs_jacobian(params, np.zeros(4))
    weight_block = J[:, : 3 * 4]
    assert np.abs(weight_block).max() == 0.0
    assert np.abs(J[:, 3 * 4 :]).max() > 0.0


def test_gradient_norm_bound_binary():
    # with ||x|| <= R the cross-entropy gradient norm stays below sqrt(2)(R+1)
    rng = np.random.default_rng(7)
    R = 3.0
    for _ in range(200):
        params = ModelParams(rng.normal(size=(2, 4)), rng.normal(size=2))
        x = rng.normal(size=4)
        if np.linalg.norm(x) > R:
            x = x * (R / np.linalg.norm(x))
        _, grad = loss_and_grad(params, x, int(rng.integers(0, 2)))
        assert np.linalg.norm(grad) <= math.sqrt(2.0) * (R + 1.0) + 1e-12


def test_mean_loss_grad_matches_per_sample_average():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 5))
    y = rng.integers(0, 3, size=40)
    params = ModelParams(rng.normal(size=(3, 5)), rng.normal(size=3))
    loss, grad = mean_loss_and_grad(params, X, y)
    per = [loss_and_grad(params, X[i], int(y[i])) for i in range(40)]
    assert abs(loss - np.mean([p[0] for p in per])) < 1e-12
    assert np.allclose(grad, np.mean([p[1] for p in per], axis=0), atol=1e-12)


def test_hard_predictions_tie_break_lowest():
    params = ModelParams.zeros(2, 3)
    preds = hard_predictions(params, np.zeros((4, 2)))
    assert (preds == 0).all()


def test_vector_roundtrip_and_checkpoint(tmp_path):
    rng = np.random.default_rng(9)
    params = ModelParams(rng.normal(size=(3, 5)), rng.normal(size=3))
    vec = params.to_vector()
    assert vec.shape == (params.dim,) == (3 * 6,)
    back = ModelParams.from_vector(vec, 5, 3)
    assert np.array_equal(back.weights, params.weights)
    assert np.array_equal(back.bias, params.bias)
    path = tmp_path / "ckpt.npz"
    params.save(path)
    loaded = ModelParams.load(path)
    assert np.array_equal(loaded.to_vector(), vec)


def test_batch_prediction_matches_single():
    rng = np.random.default_rng(10)
    params = ModelParams(rng.normal(size=(3, 4)), rng.normal(size=3))
    X = rng.normal(size=(6, 4))
    batch = predict_probs_batch(params, X)
    for i in range(6):
        assert np.allclose(batch[i], predict_probs(params, X[i]), atol=1e-12)
