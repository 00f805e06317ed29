"""Linear-chain CRF over arbitrary emission scores.

The transition table has two virtual states appended after the d real
labels: row/column d is the start state, d+1 the stop state.  Sequence
scores include the start transition into the first label and a stop
transition out of the last one; emissions never cover the virtual states.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Tensor


def _check_tables(emissions: Tensor, transitions: Tensor) -> int:
    n, d = emissions.shape
    if transitions.shape != (d + 2, d + 2):
        raise T.ShapeError(
            f"transition table {transitions.shape} does not fit {d} labels "
            f"(expected {(d + 2, d + 2)})"
        )
    return d


def _check_labels(labels, d: int, n: int) -> np.ndarray:
    arr = np.asarray(labels, dtype=np.intp)
    if arr.shape != (n,):
        raise ValueError(f"label sequence length {arr.shape} != sentence length {n}")
    if arr.size and (arr.min() < 0 or arr.max() >= d):
        raise ValueError(f"label id out of range [0, {d}): {arr}")
    return arr


def sequence_score(emissions: Tensor, transitions: Tensor, labels) -> Tensor:
    """Score one labeling: start->y1, all adjacent transitions, yN->stop,
    plus the per-position emission entries."""
    n = emissions.shape[0]
    d = _check_tables(emissions, transitions)
    y = _check_labels(labels, d, n)
    start, stop = d, d + 1
    prev = np.concatenate([[start], y])
    nxt = np.concatenate([y, [stop]])
    trans_sum = transitions[(prev, nxt)].sum()
    emit_sum = emissions[(np.arange(n), y)].sum()
    return trans_sum + emit_sum


def log_partition(emissions: Tensor, transitions: Tensor) -> Tensor:
    """Forward algorithm in log space over all d^N labelings."""
    n = emissions.shape[0]
    d = _check_tables(emissions, transitions)
    start, stop = d, d + 1
    core = transitions[0:d, 0:d]
    alpha = transitions[start, 0:d] + emissions[0]
    for i in range(1, n):
        alpha = T.logsumexp(
            alpha.reshape(d, 1) + core + emissions[i].reshape(1, d), axis=0
        )
        if not np.all(np.isfinite(alpha.data)):
            raise FloatingPointError(f"non-finite forward scores at position {i}")
    return T.logsumexp(alpha + transitions[0:d, stop], axis=0)


def crf_nll(emissions: Tensor, transitions: Tensor, labels) -> Tensor:
    """Negative log-likelihood of the gold labeling."""
    return log_partition(emissions, transitions) - sequence_score(
        emissions, transitions, labels
    )


def viterbi_decode(
    emissions: np.ndarray,
    transitions: np.ndarray,
    allowed: np.ndarray | None = None,
) -> tuple[list[int], float]:
    """Best labeling and its score; plain numpy, no gradients.

    Ties resolve to the lexicographically smallest label-id sequence: a
    backward pass computes the best achievable suffix score per (position,
    label), then a forward greedy walk picks the smallest label that attains
    the optimum at each step.  ``allowed`` masks forbidden transitions to
    -inf at decode time only.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    n, d = emissions.shape
    start, stop = d, d + 1
    trans = np.asarray(transitions, dtype=np.float64)
    if trans.shape != (d + 2, d + 2):
        raise T.ShapeError(f"transition table {trans.shape} vs {d} labels")
    if allowed is not None:
        trans = np.where(allowed, trans, -np.inf)

    # suffix[i, y]: best score of positions i..end given label y at i,
    # excluding the transition into i
    suffix = np.empty((n, d))
    suffix[n - 1] = emissions[n - 1] + trans[0:d, stop]
    for i in range(n - 2, -1, -1):
        suffix[i] = emissions[i] + np.max(trans[0:d, 0:d] + suffix[i + 1], axis=1)

    first = trans[start, 0:d] + suffix[0]
    best_score = float(first.max())
    if not np.isfinite(best_score):
        raise ValueError("no labeling satisfies the transition constraints")
    path = [int(np.argmax(first))]  # argmax takes the smallest index on ties
    for i in range(1, n):
        step = trans[path[-1], 0:d] + suffix[i]
        path.append(int(np.argmax(step)))
    return path, best_score
