"""Model dimensions and parameter construction.

Parameter names are dotted paths grouped by the module that owns them;
the encoder LSTM weights are deliberately the only recurrent weights in
the store, because the sentence decoder reuses them (one set per scan
direction).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .params import ParamStore

NUM_LABELS = 9  # O plus B/I/E/S for tenor and vehicle spans


@dataclass
class ModelConfig:
    vocab_size: int
    embed_dim: int = 50
    hidden_size: int = 128
    ff_width: int = 64
    num_labels: int = NUM_LABELS
    dropout_embeddings: bool = True
    dropout_head_inputs: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def build_params(
    config: ModelConfig,
    seed: int = 0,
    embedding_matrix: np.ndarray | None = None,
) -> ParamStore:
    """Create every trainable tensor the framework uses.

    ``embedding_matrix``, when given, seeds the word embeddings (rows for
    special tokens must already be included); otherwise embeddings start
    random like any other weight.  The decoder's pre-softmax projection is
    the embedding table itself (weight tying), so no separate output matrix
    exists here.
    """
    e, h = config.embed_dim, config.hidden_size
    d = config.num_labels
    store = ParamStore(seed=seed)

    if embedding_matrix is not None:
        emb = np.asarray(embedding_matrix, dtype=np.float64)
        if emb.shape != (config.vocab_size, e):
            raise ValueError(
                f"embedding matrix shape {emb.shape} != ({config.vocab_size}, {e})"
            )
        store.register("embeddings.table", emb)
    else:
        store.create("embeddings.table", (config.vocab_size, e))

    # Bi-LSTM weights, shared between sentence encoder and decoder.
    # Gate layout along the first axis: input, forget, output, candidate.
    for direction in ("fwd", "bwd"):
        store.create(f"encoder.{direction}.gates_W", (4 * h, e + h))
        store.create(f"encoder.{direction}.gates_b", (4 * h,), kind="bias")

    two_h = 2 * h
    store.create("classifier.attn_proj", (two_h, two_h))
    store.create("classifier.center_proj", (two_h, two_h))
    store.create("classifier.window_vec", (two_h,))
    store.create("classifier.score_vec", (two_h,))
    store.create("classifier.ff_w1", (config.ff_width, two_h))
    store.create("classifier.ff_w2", (2, config.ff_width))

    # Transition table carries two virtual states (start, stop) after the
    # d real labels; emissions consume the attention-augmented width 2h+1.
    store.create("extractor.transitions", (d + 2, d + 2))
    store.create("extractor.emit_W", (d, two_h + 1))
    store.create("extractor.emit_b", (d,), kind="bias")

    for direction in ("fwd", "bwd"):
        store.create(f"decoder.{direction}.init_W", (h, two_h + d))
        store.create(f"decoder.{direction}.state_proj", (e, h))
        store.create(f"decoder.{direction}.embed_proj", (e, e))

    return store
