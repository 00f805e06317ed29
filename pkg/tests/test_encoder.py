"""Embedding lookup, LSTM cell, and bidirectional encoding."""

import numpy as np
import pytest

from simrec import grad_check
from simrec.encoder import bilstm_encode, embed_tokens, lstm_step
from simrec.model import build_params
from simrec.params import ParamStore
from simrec.tensor import Tensor, backward

from conftest import tiny_config


def test_repeated_ids_give_identical_rows(tiny_model):
    _, store = tiny_model
    out = embed_tokens(store, [3, 5, 3, 3])
    np.testing.assert_array_equal(out.data[0], out.data[2])
    np.testing.assert_array_equal(out.data[0], out.data[3])
    assert not np.array_equal(out.data[0], out.data[1])


def test_out_of_range_id_rejected(tiny_model):
    _, store = tiny_model
    with pytest.raises(ValueError, match="out of range"):
        embed_tokens(store, [0, 99])


def test_embedding_grads_accumulate_on_repeats(tiny_model):
    _, store = tiny_model
    out = embed_tokens(store, [2, 2, 4])
    backward(out.sum())
    table_grad = store["embeddings.table"].grad
    np.testing.assert_allclose(table_grad[2], 2.0 * np.ones(6))
    np.testing.assert_allclose(table_grad[4], np.ones(6))
    np.testing.assert_allclose(table_grad[3], np.zeros(6))


def test_lstm_step_zero_weights_zero_state():
    h = 4
    W = Tensor(np.zeros((4 * h, 3 + h)))
    b = Tensor(np.zeros(4 * h))
    state = (Tensor(np.zeros(h)), Tensor(np.zeros(h)))
    h2, c2 = lstm_step(W, b, Tensor(np.ones(3)), state)
    np.testing.assert_allclose(h2.data, np.zeros(h))
    np.testing.assert_allclose(c2.data, np.zeros(h))


def test_lstm_step_is_stateful():
    rng = np.random.default_rng(2)
    h = 4
    W = Tensor(rng.normal(size=(4 * h, 3 + h)))
    b = Tensor(rng.normal(size=4 * h))
    x = Tensor(rng.normal(size=3))
    out_a, _ = lstm_step(W, b, x, (Tensor(np.zeros(h)), Tensor(np.zeros(h))))
    out_b, _ = lstm_step(W, b, x, (Tensor(np.ones(h)), Tensor(np.ones(h))))
    assert not np.allclose(out_a.data, out_b.data)


def test_lstm_step_gradient_matches_fd():
    rng = np.random.default_rng(4)
    h, e = 3, 2
    store = ParamStore(seed=4)
    store.register("W", rng.normal(size=(4 * h, e + h)) * 0.5)
    store.register("b", rng.normal(size=4 * h) * 0.5)
    x = np.ones(e)
    weights = rng.normal(size=h)

    def build_loss(s):
        state = (Tensor(np.zeros(h)), Tensor(np.zeros(h)))
        h1, c1 = lstm_step(s["W"], s["b"], Tensor(x), state)
        h2, _ = lstm_step(s["W"], s["b"], Tensor(x * 0.5), (h1, c1))
        return h2 @ Tensor(weights)

    assert grad_check(build_loss, store, step=1e-3) < 1e-4


def test_encode_shapes_across_lengths(tiny_model):
    config, store = tiny_model
    for n in [1, 2, 7, 30]:
        ids = np.arange(n) % config.vocab_size
        enc = bilstm_encode(store, ids)
        assert enc.reps.shape == (n, 2 * config.hidden_size)
        assert enc.length == n


def test_single_token_uses_both_directions(tiny_model):
    config, store = tiny_model
    enc = bilstm_encode(store, [5])
    h = config.hidden_size
    assert enc.reps.shape == (1, 2 * h)
    np.testing.assert_array_equal(enc.reps.data[0, :h], enc.fwd_final[0].data)
    np.testing.assert_array_equal(enc.reps.data[0, h:], enc.bwd_final[0].data)


def test_reversal_swaps_direction_blocks(tiny_model):
    config, store = tiny_model
    h = config.hidden_size
    ids = [1, 4, 2, 7, 7, 3]
    forward_enc = bilstm_encode(store, ids).reps.data

    swapped = build_params(config, seed=11)
    for name in ("gates_W", "gates_b"):
        f = swapped[f"encoder.fwd.{name}"].data.copy()
        swapped[f"encoder.fwd.{name}"].data = swapped[f"encoder.bwd.{name}"].data.copy()
        swapped[f"encoder.bwd.{name}"].data = f
    reversed_enc = bilstm_encode(swapped, ids[::-1]).reps.data

    recombined = np.concatenate(
        [reversed_enc[::-1, h:], reversed_enc[::-1, :h]], axis=1
    )
    np.testing.assert_allclose(recombined, forward_enc, atol=1e-12)


def test_every_token_influences_reps(tiny_model):
    config, store = tiny_model
    ids = [1, 2, 3, 4, 5]
    base = bilstm_encode(store, ids).reps.data
    for pos in range(len(ids)):
        changed = list(ids)
        changed[pos] = 9
        other = bilstm_encode(store, changed).reps.data
        assert np.abs(other - base).max() > 0


def test_single_encoder_parameter_set(tiny_model):
    # one weight set per direction, shared by encoder and decoder scans
    _, store = tiny_model
    encoder_names = [n for n in store.names() if n.startswith("encoder.")]
    assert encoder_names == [
        "encoder.bwd.gates_W",
        "encoder.bwd.gates_b",
        "encoder.fwd.gates_W",
        "encoder.fwd.gates_b",
    ]


def test_encode_gradient_through_full_bilstm():
    config = tiny_config(vocab_size=8, embed_dim=3, hidden_size=3)
    store = build_params(config, seed=9)
    ids = [1, 5, 2]
    weights = np.random.default_rng(8).normal(size=(3, 2 * config.hidden_size))

    def build_loss(s):
        enc = bilstm_encode(s, ids)
        return (enc.reps * Tensor(weights)).sum()

    assert grad_check(build_loss, store, step=1e-3) < 1e-4
