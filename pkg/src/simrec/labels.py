"""IOBES tag scheme for tenor/vehicle spans: codec, validation, constraints."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

LABELS = ["O", "B-T", "I-T", "E-T", "S-T", "B-V", "I-V", "E-V", "S-V"]
LABEL_TO_ID = {label: i for i, label in enumerate(LABELS)}
NUM_LABELS = len(LABELS)
OUTSIDE = 0


class Span(NamedTuple):
    start: int
    end: int  # inclusive
    kind: str  # "T" (tenor) or "V" (vehicle)


def _as_strings(tags) -> list[str]:
    out = []
    for tag in tags:
        if isinstance(tag, str):
            if tag not in LABEL_TO_ID:
                raise ValueError(f"unknown tag {tag!r}")
            out.append(tag)
        else:
            out.append(LABELS[int(tag)])
    return out


def spans_from_tags(tags) -> list[Span]:
    """Extract spans from a tag sequence, repairing instead of crashing.

    Decoder output may be malformed when transition constraints are off;
    the repair rule simply drops any segment that is not properly closed
    (B without a matching E, dangling I/E, B interrupted by anything else).
    """
    spans = []
    open_start, open_kind = None, None
    for i, tag in enumerate(_as_strings(tags)):
        if tag == "O":
            open_start = None
            continue
        prefix, kind = tag.split("-")
        if prefix == "S":
            spans.append(Span(i, i, kind))
            open_start = None
        elif prefix == "B":
            open_start, open_kind = i, kind
        elif prefix == "I":
            if open_start is None or open_kind != kind:
                open_start = None
        elif prefix == "E":
            if open_start is not None and open_kind == kind:
                spans.append(Span(open_start, i, kind))
            open_start = None
    return spans


def tags_from_spans(spans, length: int) -> list[str]:
    """Inverse of :func:`spans_from_tags` for well-formed span sets."""
    tags = ["O"] * length
    occupied = [False] * length
    for span in sorted(spans):
        if not 0 <= span.start <= span.end < length:
            raise ValueError(f"span {span} outside sentence of length {length}")
        if span.kind not in ("T", "V"):
            raise ValueError(f"span kind must be T or V, got {span.kind!r}")
        if any(occupied[span.start : span.end + 1]):
            raise ValueError(f"span {span} overlaps another span")
        for i in range(span.start, span.end + 1):
            occupied[i] = True
        if span.start == span.end:
            tags[span.start] = f"S-{span.kind}"
        else:
            tags[span.start] = f"B-{span.kind}"
            for i in range(span.start + 1, span.end):
                tags[i] = f"I-{span.kind}"
            tags[span.end] = f"E-{span.kind}"
    return tags


def validate_tags(tags) -> list[str]:
    """Strict IOBES validity check; returns the normalized string tags.

    Every B-x must be closed by E-x with only I-x between; I/E may not
    dangle; used when ingesting gold data, where repair would hide errors.
    """
    strs = _as_strings(tags)
    open_kind = None
    for i, tag in enumerate(strs):
        prefix = tag[0]
        kind = tag[2:] if len(tag) > 1 else None
        if open_kind is None:
            if prefix in ("I", "E"):
                raise ValueError(f"dangling {tag} at position {i}")
            if prefix == "B":
                open_kind = kind
        else:
            if prefix == "I" and kind == open_kind:
                continue
            if prefix == "E" and kind == open_kind:
                open_kind = None
                continue
            raise ValueError(f"segment opened as B-{open_kind} not closed before {tag} at {i}")
    if open_kind is not None:
        raise ValueError(f"unclosed B-{open_kind} segment at end of sequence")
    return strs


def tag_ids(tags) -> list[int]:
    return [LABEL_TO_ID[t] for t in _as_strings(tags)]


def decode_transition_mask(num_labels: int = NUM_LABELS) -> np.ndarray:
    """Boolean (d+2)x(d+2) table of transitions that keep IOBES well-formed.

    Virtual start behaves like O; stop is reachable only from states with
    no open segment.  Used as a decode-time mask, never during training.
    """
    if num_labels != NUM_LABELS:
        raise ValueError("transition mask is specific to the tenor/vehicle IOBES set")
    start, stop = num_labels, num_labels + 1
    allowed = np.zeros((num_labels + 2, num_labels + 2), dtype=bool)

    closed = [LABEL_TO_ID[t] for t in ("O", "E-T", "S-T", "E-V", "S-V")]
    openers = [LABEL_TO_ID[t] for t in ("O", "B-T", "S-T", "B-V", "S-V")]
    for src in closed + [start]:
        for dst in openers:
            allowed[src, dst] = True
        allowed[src, stop] = True
    for kind in ("T", "V"):
        for src_tag in (f"B-{kind}", f"I-{kind}"):
            src = LABEL_TO_ID[src_tag]
            allowed[src, LABEL_TO_ID[f"I-{kind}"]] = True
            allowed[src, LABEL_TO_ID[f"E-{kind}"]] = True
    allowed[start, stop] = False  # sequences are non-empty
    return allowed
