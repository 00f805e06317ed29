"""Sentence classification with local attention around the comparator.

The head first predicts a context window half-width from the sentence,
then attends only inside [p-L, p+L] (clipped to the sentence), and feeds
the resulting context vector through a small feed-forward network into a
two-way softmax.  Class index 1 means "simile".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .params import ParamStore
from .tensor import Tensor


@dataclass
class LocalAttentionResult:
    """Window prediction plus the attention computed inside it.

    ``weights`` covers only [lo, hi]; ``weights_full`` is the sentence-long
    vector with exact zeros outside the window (what the extractor consumes).
    ``half_width_real`` is the raw window size before rounding; None in
    global mode, which skips window prediction entirely.
    """

    half_width_real: float | None
    half_width: int | None
    lo: int
    hi: int
    weights: Tensor
    weights_full: Tensor
    context: Tensor


@dataclass
class ClassifierOutput:
    class_probs: Tensor
    predicted: bool
    attention: LocalAttentionResult


def window_size(store: ParamStore, reps: Tensor, comparator: int):
    """Predict the attention half-width from the sentence and its comparator.

    Returns (raw value, rounded-and-clamped integer, raw scalar tensor).
    The raw value always lies strictly inside (0, N/2) because it is a
    sigmoid output scaled by N/2; the integer is round-half-up, clamped to
    [0, N // 2].
    """
    n = reps.shape[0]
    if not 0 <= comparator < n:
        raise ValueError(f"comparator index {comparator} outside sentence of length {n}")
    pooled = store["classifier.attn_proj"] @ reps.sum(axis=0)
    centered = store["classifier.center_proj"] @ reps[comparator]
    raw = (n / 2.0) * T.sigmoid(store["classifier.window_vec"] @ T.tanh(pooled + centered))
    l_real = raw.item()
    half_width = min(int(np.floor(l_real + 0.5)), n // 2)
    return l_real, half_width, raw


def local_attention(
    store: ParamStore,
    reps: Tensor,
    comparator: int,
    half_width: int,
    half_width_real: float | None = None,
    raw_tensor: Tensor | None = None,
    soft_window: bool = False,
) -> LocalAttentionResult:
    """Attend over the clipped window [p-L, p+L] and pool a context vector.

    With ``soft_window``, attention scores additionally carry a Gaussian
    log-penalty centered on the comparator whose width follows the raw
    (unrounded) window size; this restores gradient flow into the window
    predictor, which the hard integer window otherwise blocks.
    """
    n = reps.shape[0]
    lo = max(0, comparator - half_width)
    hi = min(n - 1, comparator + half_width)
    window = reps[lo : hi + 1]

    scores = T.tanh(window @ store["classifier.attn_proj"].T) @ store["classifier.score_vec"]
    if soft_window:
        if raw_tensor is None:
            raise ValueError("soft_window needs the raw window-size tensor")
        offsets = np.arange(lo, hi + 1, dtype=np.float64) - comparator
        # exp(-(i-p)^2 / (2 (L/2)^2)) applied in log space before the softmax
        scores = scores + Tensor(-(offsets**2) / 2.0) * T.power(raw_tensor * 0.5, -2.0)
    weights = T.softmax(scores, axis=0)
    context = weights @ window

    pads = []
    if lo > 0:
        pads.append(Tensor(np.zeros(lo)))
    pads.append(weights)
    if hi < n - 1:
        pads.append(Tensor(np.zeros(n - 1 - hi)))
    weights_full = T.concat(pads, axis=0) if len(pads) > 1 else weights

    return LocalAttentionResult(
        half_width_real=half_width_real,
        half_width=half_width,
        lo=lo,
        hi=hi,
        weights=weights,
        weights_full=weights_full,
        context=context,
    )


def global_attention(store: ParamStore, reps: Tensor) -> LocalAttentionResult:
    """Baseline attention over the whole sentence (no window prediction)."""
    n = reps.shape[0]
    scores = T.tanh(reps @ store["classifier.attn_proj"].T) @ store["classifier.score_vec"]
    weights = T.softmax(scores, axis=0)
    return LocalAttentionResult(
        half_width_real=None,
        half_width=None,
        lo=0,
        hi=n - 1,
        weights=weights,
        weights_full=weights,
        context=weights @ reps,
    )


def attend(
    store: ParamStore,
    reps: Tensor,
    comparator: int,
    attention_mode: str = "local",
    soft_window: bool = False,
) -> LocalAttentionResult:
    if attention_mode == "global":
        return global_attention(store, reps)
    if attention_mode != "local":
        raise ValueError(f"unknown attention mode: {attention_mode!r}")
    l_real, half_width, raw = window_size(store, reps, comparator)
    return local_attention(
        store, reps, comparator, half_width,
        half_width_real=l_real, raw_tensor=raw, soft_window=soft_window,
    )


def classify(store: ParamStore, context: Tensor) -> tuple[Tensor, bool]:
    """Feed-forward + softmax over the context vector.

    Returns (class probabilities, predicted-simile flag).  An exact tie
    predicts not-simile.
    """
    logits = store["classifier.ff_w2"] @ T.relu(store["classifier.ff_w1"] @ context)
    probs = T.softmax(logits, axis=0)
    return probs, bool(probs.data[1] > probs.data[0])


def classification_loss(
    store: ParamStore,
    is_simile: bool,
    reps: Tensor,
    comparator: int,
    decoder_states: Tensor | None = None,
    attention_mode: str = "local",
    soft_window: bool = False,
) -> tuple[Tensor, ClassifierOutput]:
    """Negative log-likelihood of the gold class.

    When decoder states are available they are summed into the word
    representations first, so the whole head (window, attention, and
    classification) sees the fused input.
    """
    if decoder_states is not None:
        if decoder_states.shape != reps.shape:
            raise T.ShapeError(
                f"decoder states shape {decoder_states.shape} != reps shape {reps.shape}"
            )
        reps = reps + decoder_states
    attention = attend(store, reps, comparator, attention_mode, soft_window)
    logits = store["classifier.ff_w2"] @ T.relu(
        store["classifier.ff_w1"] @ attention.context
    )
    log_probs = T.log_softmax(logits, axis=0)
    probs = T.softmax(logits, axis=0)
    predicted = bool(probs.data[1] > probs.data[0])
    loss = -log_probs[1 if is_simile else 0]
    output = ClassifierOutput(class_probs=probs, predicted=predicted, attention=attention)
    return loss, output
