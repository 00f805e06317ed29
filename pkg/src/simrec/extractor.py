"""Span extraction head: attention-augmented reps into a CRF tagger."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import crf, labels
from . import tensor as T
from .classifier import LocalAttentionResult
from .params import ParamStore
from .tensor import Tensor


@dataclass
class ExtractionResult:
    tag_ids: list[int]
    tags: list[str]
    spans: list[labels.Span]
    log_prob: float


def augment(reps: Tensor, attention: LocalAttentionResult) -> Tensor:
    """Append the attention weight column: the weight inside the window,
    an exact zero outside it."""
    n = reps.shape[0]
    if attention.weights_full.shape != (n,):
        raise T.ShapeError(
            f"attention over {attention.weights_full.shape} tokens but reps are {reps.shape}"
        )
    return T.concat([reps, attention.weights_full.reshape(n, 1)], axis=1)


def emissions(store: ParamStore, augmented: Tensor) -> Tensor:
    """Per-token label distributions: softmax(tanh(W x + b)) row by row."""
    pre = T.tanh(augmented @ store["extractor.emit_W"].T + store["extractor.emit_b"])
    return T.softmax(pre, axis=1)


def extraction_loss(
    store: ParamStore, augmented: Tensor, gold_tag_ids
) -> tuple[Tensor, Tensor]:
    """CRF negative log-likelihood of the gold tags; returns (loss, emissions)."""
    emit = emissions(store, augmented)
    loss = crf.crf_nll(emit, store["extractor.transitions"], gold_tag_ids)
    return loss, emit


def decode(
    store: ParamStore, emit: Tensor, constrain: bool = True
) -> ExtractionResult:
    """Best tag sequence under the current tables, plus recovered spans.

    ``constrain`` masks IOBES-invalid transitions at decode time, which
    guarantees well-formed output; the reported log-probability is under
    the unconstrained model.
    """
    allowed = labels.decode_transition_mask() if constrain else None
    path, score = crf.viterbi_decode(
        emit.data, store["extractor.transitions"].data, allowed
    )
    # constant wrappers: same forward algorithm, no graph construction
    log_z = crf.log_partition(
        Tensor(emit.data), Tensor(store["extractor.transitions"].data)
    ).item()
    tags = [labels.LABELS[i] for i in path]
    return ExtractionResult(
        tag_ids=path,
        tags=tags,
        spans=labels.spans_from_tags(tags),
        log_prob=score - log_z,
    )
