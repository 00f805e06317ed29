"""Shared sentence encoder: embeddings plus a bidirectional LSTM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .params import ParamStore
from .tensor import Tensor


@dataclass
class EncodedSentence:
    """Per-token representations shared by every head.

    ``reps`` has one row per token: the forward-scan state concatenated
    with the backward-scan state (width 2h).
    """

    reps: Tensor
    fwd_final: tuple[Tensor, Tensor]
    bwd_final: tuple[Tensor, Tensor]

    @property
    def length(self) -> int:
        return self.reps.shape[0]


def embed_tokens(store: ParamStore, token_ids) -> Tensor:
    """Look up embedding rows for a token-id sequence; gradients flow back
    into the table."""
    table = store["embeddings.table"]
    ids = np.asarray(token_ids, dtype=np.intp)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError(f"token ids must be a non-empty 1-D sequence, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= table.shape[0]:
        raise ValueError(
            f"token id out of range: ids span [{ids.min()}, {ids.max()}], "
            f"vocabulary size {table.shape[0]}"
        )
    return table[ids]


def lstm_step(
    gates_W: Tensor, gates_b: Tensor, x: Tensor, state: tuple[Tensor, Tensor]
) -> tuple[Tensor, Tensor]:
    """One LSTM update. ``gates_W`` packs the four gates row-wise
    (input, forget, output, candidate) over the concatenated [x, h] input."""
    h, c = state
    hidden = h.size
    z = gates_W @ T.concat([x, h]) + gates_b
    gate_in = T.sigmoid(z[0:hidden])
    gate_forget = T.sigmoid(z[hidden : 2 * hidden])
    gate_out = T.sigmoid(z[2 * hidden : 3 * hidden])
    candidate = T.tanh(z[3 * hidden :])
    c_next = gate_forget * c + gate_in * candidate
    h_next = gate_out * T.tanh(c_next)
    return h_next, c_next


def _zero_state(hidden: int) -> tuple[Tensor, Tensor]:
    return Tensor(np.zeros(hidden)), Tensor(np.zeros(hidden))


def _scan(store: ParamStore, direction: str, inputs: list[Tensor]):
    gates_W = store[f"encoder.{direction}.gates_W"]
    gates_b = store[f"encoder.{direction}.gates_b"]
    state = _zero_state(gates_W.shape[0] // 4)
    outputs = []
    for x in inputs:
        state = lstm_step(gates_W, gates_b, x, state)
        outputs.append(state[0])
    return outputs, state


def bilstm_encode(
    store: ParamStore,
    token_ids,
    emb_dropout: tuple[float, np.random.Generator] | None = None,
) -> EncodedSentence:
    """Encode a sentence into an N x 2h matrix of shared representations.

    The forward LSTM scans left to right, the backward one right to left;
    row i is [fwd_h_i, bwd_h_i].  ``emb_dropout`` optionally applies
    (rate, rng) dropout to the embedding rows before both scans.
    """
    emb = embed_tokens(store, token_ids)
    if emb_dropout is not None:
        rate, rng = emb_dropout
        emb = T.dropout(emb, rate, rng)
    n = emb.shape[0]
    rows = [emb[i] for i in range(n)]

    fwd_states, fwd_final = _scan(store, "fwd", rows)
    bwd_states_rev, bwd_final = _scan(store, "bwd", rows[::-1])
    bwd_states = bwd_states_rev[::-1]

    reps = T.concat(
        [T.stack_rows(fwd_states), T.stack_rows(bwd_states)], axis=1
    )
    return EncodedSentence(reps=reps, fwd_final=fwd_final, bwd_final=bwd_final)
