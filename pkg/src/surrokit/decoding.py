"""Reference decoding strategies over abstract per-step token distributions.

A DistributionSource maps a prefix of already-chosen token ids to the
probability vector of the next token. Everything here is pure given a
source snapshot, so the same strategies drive both the in-process mock
model and any served model exposing step probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DistributionSource = Callable[[tuple[int, ...]], np.ndarray]

_RENORM_TOL = 1e-9


@dataclass(frozen=True)
class TopK:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class TopP:
    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")


@dataclass(frozen=True)
class Temperature:
    t: float

    def __post_init__(self):
        if self.t < 0.0:
            raise ValueError("temperature must be >= 0")


SamplingStrategy = TopK | TopP | Temperature


def _step(src: DistributionSource, prefix: tuple[int, ...]) -> np.ndarray:
    probs = np.asarray(src(prefix), dtype=float)
    if probs.ndim != 1 or probs.size < 1:
        raise ValueError("source must return a 1-d probability vector")
    if (probs < 0).any() or abs(float(probs.sum()) - 1.0) > _RENORM_TOL:
        raise ValueError("source probabilities must be nonnegative and sum to 1")
    return probs


def greedy_decode(
    src: DistributionSource,
    max_len: int,
    end_id: int | None = None,
) -> list[int]:
    """Argmax at every step; ties break toward the lowest token id."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    out: list[int] = []
    for _ in range(max_len):
        probs = _step(src, tuple(out))
        tok = int(np.argmax(probs))
        out.append(tok)
        if end_id is not None and tok == end_id:
            break
    return out


def beam_decode(
    src: DistributionSource,
    width: int,
    max_len: int,
    end_id: int | None = None,
) -> list[tuple[list[int], float]]:
    """Beam search by cumulative log-probability, no length normalization.

    Returns up to ``width`` hypotheses sorted by descending score; equal
    scores break ties lexicographically on the id sequence for determinism.
    Zero-probability continuations are never expanded, so fewer than
    ``width`` hypotheses can come back.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")

    live: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    done: list[tuple[float, tuple[int, ...]]] = []
    for _ in range(max_len):
        if not live:
            break
        candidates: list[tuple[float, tuple[int, ...]]] = []
        for score, prefix in live:
            probs = _step(src, prefix)
            for tok in np.flatnonzero(probs > 0.0):
                candidates.append(
                    (score + math.log(float(probs[tok])), prefix + (int(tok),))
                )
        candidates.sort(key=lambda c: (-c[0], c[1]))
        candidates = candidates[:width]
        live = []
        for score, seq in candidates:
            if end_id is not None and seq[-1] == end_id:
                done.append((score, seq))
            else:
                live.append((score, seq))
    done.extend(live)
    done.sort(key=lambda c: (-c[0], c[1]))
    return [(list(seq), score) for score, seq in done[:width]]


def _truncate(probs: np.ndarray, strategy: SamplingStrategy) -> np.ndarray:
    if isinstance(strategy, TopK):
        k = min(strategy.k, probs.size)
        keep = np.argsort(-probs, kind="stable")[:k]
        out = np.zeros_like(probs)
        out[keep] = probs[keep]
    elif isinstance(strategy, TopP):
        order = np.argsort(-probs, kind="stable")
        csum = np.cumsum(probs[order])
        cutoff = int(np.searchsorted(csum, strategy.p)) + 1
        out = np.zeros_like(probs)
        out[order[:cutoff]] = probs[order[:cutoff]]
    else:  # Temperature
        with np.errstate(divide="ignore"):
            logits = np.where(probs > 0, np.log(probs), -np.inf)
        logits = logits / strategy.t
        logits -= logits.max()
        out = np.exp(logits)
        out[probs == 0] = 0.0
    total = out.sum()
    if total <= 0:
        raise ValueError("truncation removed all probability mass")
    return out / total


def sample_decode(
    src: DistributionSource,
    strategy: SamplingStrategy,
    seed: int,
    max_len: int,
    end_id: int | None = None,
) -> list[int]:
    """Seeded truncated/tempered ancestral sampling.

    Temperature 0 degenerates to greedy. After each truncation the kept
    mass is renormalized to 1 before drawing.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if isinstance(strategy, Temperature) and strategy.t == 0.0:
        return greedy_decode(src, max_len, end_id)
    rng = np.random.default_rng(seed)
    out: list[int] = []
    for _ in range(max_len):
        probs = _truncate(_step(src, tuple(out)), strategy)
        tok = int(rng.choice(probs.size, p=probs))
        out.append(tok)
        if end_id is not None and tok == end_id:
            break
    return out


class RecordedSource:
    """Wraps a source and records the distribution served at every step."""

    def __init__(self, src: DistributionSource):
        self._src = src
        self.steps: list[np.ndarray] = []

    def __call__(self, prefix: tuple[int, ...]) -> np.ndarray:
        probs = _step(self._src, prefix)
        if len(prefix) == len(self.steps):
            self.steps.append(probs)
        return probs


def fixed_sequence_source(
    dists: Sequence[np.ndarray],
    after_id: int,
    vocab_size: int,
) -> DistributionSource:
    """Source replaying a fixed list of step distributions.

    Once the list is exhausted every later step is a one-hot on
    ``after_id`` (typically the end marker).
    """
    mats = [np.asarray(d, dtype=float) for d in dists]
    tail = np.zeros(vocab_size)
    tail[after_id] = 1.0

    def src(prefix: tuple[int, ...]) -> np.ndarray:
        t = len(prefix)
        return mats[t] if t < len(mats) else tail

    return src
