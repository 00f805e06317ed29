"""Local attention window, context pooling, and sentence classification."""

import math

import numpy as np
import pytest

from simrec import grad_check
from simrec import tensor as T
from simrec.classifier import (
    attend,
    classification_loss,
    classify,
    global_attention,
    local_attention,
    window_size,
)
from simrec.encoder import bilstm_encode
from simrec.model import build_params
from simrec.tensor import Tensor, backward

from conftest import tiny_config


def random_reps(rng, n, width=16):
    return Tensor(rng.normal(size=(n, width)), requires_grad=True)


def test_window_always_inside_half_sentence(tiny_model, rng):
    _, store = tiny_model
    for trial in range(20):
        n = int(rng.integers(1, 40))
        reps = random_reps(rng, n)
        p = int(rng.integers(0, n))
        l_real, half_width, _ = window_size(store, reps, p)
        assert 0.0 < l_real < n / 2.0
        assert 0 <= half_width <= n // 2


def test_zero_window_vector_gives_quarter_length(tiny_model, rng):
    _, store = tiny_model
    store["classifier.window_vec"].data[:] = 0.0
    reps = random_reps(rng, 20)
    l_real, _, _ = window_size(store, reps, 3)
    assert l_real == pytest.approx(5.0)  # N/2 * sigmoid(0) = N/4


def test_clamp_on_29_token_sentence(tiny_model, rng):
    _, store = tiny_model
    # push the sigmoid toward 1 so rounding would exceed the clamp
    store["classifier.window_vec"].data[:] = 50.0
    reps = Tensor(np.ones((29, 16)))
    _, half_width, _ = window_size(store, reps, 14)
    assert half_width <= 14


def test_comparator_out_of_range_rejected(tiny_model, rng):
    _, store = tiny_model
    with pytest.raises(ValueError, match="comparator"):
        window_size(store, random_reps(rng, 5), 5)


def test_singleton_window_returns_center_row(tiny_model, rng):
    _, store = tiny_model
    reps = random_reps(rng, 9)
    att = local_attention(store, reps, 4, 0)
    assert (att.lo, att.hi) == (4, 4)
    np.testing.assert_array_equal(att.context.data, reps.data[4])
    np.testing.assert_allclose(att.weights.data, [1.0])


def test_identical_rows_give_uniform_weights(tiny_model):
    _, store = tiny_model
    reps = Tensor(np.tile(np.linspace(-1, 1, 16), (7, 1)))
    att = local_attention(store, reps, 3, 2)
    np.testing.assert_allclose(att.weights.data, np.full(5, 0.2), atol=1e-12)


def test_weights_match_direct_recomputation(tiny_model, rng):
    # oracle: recompute scores and softmax with plain numpy
    _, store = tiny_model
    reps = random_reps(rng, 11)
    p, half_width = 5, 3
    att = local_attention(store, reps, p, half_width)

    w_o = store["classifier.attn_proj"].data
    v_a = store["classifier.score_vec"].data
    scores = np.array(
        [v_a @ np.tanh(w_o @ reps.data[i]) for i in range(p - half_width, p + half_width + 1)]
    )
    e = np.exp(scores - scores.max())
    np.testing.assert_allclose(att.weights.data, e / e.sum(), atol=1e-12)
    np.testing.assert_allclose(
        att.context.data,
        (e / e.sum()) @ reps.data[p - half_width : p + half_width + 1],
        atol=1e-12,
    )


def test_full_length_weights_zero_outside_window(tiny_model, rng):
    _, store = tiny_model
    reps = random_reps(rng, 12)
    att = local_attention(store, reps, 2, 3)  # clipped at the left edge
    assert (att.lo, att.hi) == (0, 5)
    full = att.weights_full.data
    assert full.shape == (12,)
    np.testing.assert_array_equal(full[6:], np.zeros(6))
    assert np.all(full[:6] > 0)
    assert full.sum() == pytest.approx(1.0, abs=1e-12)


def test_weights_sum_to_one(tiny_model, rng):
    _, store = tiny_model
    for _ in range(10):
        n = int(rng.integers(1, 30))
        p = int(rng.integers(0, n))
        att = attend(store, random_reps(rng, n), p)
        assert att.weights.data.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(att.weights.data >= 0)


def test_global_attention_covers_sentence(tiny_model, rng):
    _, store = tiny_model
    reps = random_reps(rng, 10)
    att = global_attention(store, reps)
    assert (att.lo, att.hi) == (0, 9)
    assert att.half_width is None
    assert att.weights.shape == (10,)


def test_zero_output_weights_give_uniform_probs(tiny_model, rng):
    _, store = tiny_model
    store["classifier.ff_w2"].data[:] = 0.0
    probs, predicted = classify(store, Tensor(rng.normal(size=16)))
    np.testing.assert_allclose(probs.data, [0.5, 0.5])
    assert predicted is False  # tie breaks toward not-simile


def test_relu_kills_negative_preactivations(tiny_model, rng):
    _, store = tiny_model
    store["classifier.ff_w1"].data[:] = -1.0
    probs, _ = classify(store, Tensor(np.abs(rng.normal(size=16))))
    np.testing.assert_allclose(probs.data, [0.5, 0.5])


def test_loss_is_ln2_at_even_odds(tiny_model, rng):
    _, store = tiny_model
    store["classifier.ff_w2"].data[:] = 0.0
    reps = random_reps(rng, 8)
    loss, out = classification_loss(store, True, reps, 4)
    assert loss.item() == pytest.approx(math.log(2.0), abs=1e-12)
    np.testing.assert_allclose(out.class_probs.data, [0.5, 0.5])


def test_zero_decoder_states_match_absent(tiny_model, rng):
    _, store = tiny_model
    reps = random_reps(rng, 8)
    loss_absent, _ = classification_loss(store, True, reps, 2)
    loss_zero, _ = classification_loss(
        store, True, reps, 2, decoder_states=Tensor(np.zeros((8, 16)))
    )
    assert loss_absent.item() == loss_zero.item()


def test_state_shape_mismatch_rejected(tiny_model, rng):
    _, store = tiny_model
    with pytest.raises(T.ShapeError, match="decoder states"):
        classification_loss(
            store, True, random_reps(rng, 8), 2, decoder_states=Tensor(np.zeros((7, 16)))
        )


def inflate(store, factor=5.0):
    """Scale weights away from init so ReLU preactivations clear the FD step.

    With the production +/-0.08 init, feed-forward preactivations sit below
    the 1e-3 finite-difference step, and central differences straddle the
    ReLU kink; this is an artifact of the check, not of the gradients.
    """
    for _, t in store.items():
        t.data = t.data * factor
    return store


def assert_relu_margin(store, context, step=1e-3):
    pre = store["classifier.ff_w1"].data @ context
    assert np.abs(pre).min() > 10 * step, "test setup: preactivation too close to ReLU kink"


def test_classifier_loss_gradient_matches_fd():
    config = tiny_config(vocab_size=9, embed_dim=4, hidden_size=4, ff_width=3)
    store = inflate(build_params(config, seed=4), factor=8.0)
    ids = [1, 4, 2, 8, 5]

    def build_loss(s):
        enc = bilstm_encode(s, ids)
        loss, _ = classification_loss(s, True, enc.reps, 2)
        return loss

    _, out = classification_loss(store, True, bilstm_encode(store, ids).reps, 2)
    assert_relu_margin(store, out.attention.context.data)
    assert grad_check(build_loss, store, step=1e-3) < 1e-4


def test_hard_window_gives_window_params_zero_grad(tiny_model, rng):
    _, store = tiny_model
    reps = random_reps(rng, 10)
    loss, _ = classification_loss(store, True, reps, 4)
    backward(loss)
    assert store["classifier.window_vec"].grad is None
    assert store["classifier.center_proj"].grad is None
    assert store["classifier.attn_proj"].grad is not None


def test_soft_window_restores_window_param_grads():
    config = tiny_config(vocab_size=9, embed_dim=4, hidden_size=4, ff_width=3)
    store = inflate(build_params(config, seed=3))
    ids = [1, 4, 2, 8, 5, 3]

    def build_loss(s):
        enc = bilstm_encode(s, ids)
        loss, _ = classification_loss(s, True, enc.reps, 2, soft_window=True)
        return loss

    assert grad_check(build_loss, store, step=1e-3) < 1e-4
    store.zero_grads()
    enc = bilstm_encode(store, ids)
    loss, _ = classification_loss(store, True, enc.reps, 2, soft_window=True)
    backward(loss)
    assert np.abs(store["classifier.window_vec"].grad).max() > 0
    assert np.abs(store["classifier.center_proj"].grad).max() > 0


def test_loss_decreases_when_overfitting_one_example(tiny_model, rng):
    _, store = tiny_model
    reps_data = rng.normal(size=(9, 16))

    def loss_value():
        loss, _ = classification_loss(store, True, Tensor(reps_data), 4)
        return loss

    first = loss_value().item()
    for _ in range(50):
        store.zero_grads()
        loss = loss_value()
        backward(loss)
        for _, t in store.items():
            if t.grad is not None:
                t.data = t.data - 0.5 * t.grad
    assert loss_value().item() < first
