"""Hermetic stand-in for a served token model.

For every query the mock evaluates the true objective, perturbs it with
optional multiplicative Gaussian noise, and builds per-step token
distributions concentrated on the encoding of the perturbed value. The
probability mass smeared off the target grows monotonically with the
injected error, so token-level entropy tracks the true prediction error
and the uncertainty-correlation machinery can be exercised end to end.
Noise is seeded per request content: identical queries always produce
identical replies.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from ..codec import CodecConfig, encode_scalar
from ..decoding import (
    Temperature,
    TopK,
    TopP,
    beam_decode,
    fixed_sequence_source,
    greedy_decode,
    sample_decode,
)
from ..errors import DimMismatch, UnparseableOutput
from ..prompts import PromptTemplate, TaskMetadata, parse_fitness, render_metadata
from ..uncertainty import uncertainty_scores
from ..vocab import CLOSE_TOKEN, OPEN_TOKEN, Vocabulary
from .base import BatchFromSingleMixin, SurrogatePrediction

SMEAR_MAX = 0.8
SMEAR_SCALE = 1.0
SMEAR_SHAPE = 0.25


@dataclass(frozen=True)
class DecodeSpec:
    """Wire-level decoding request: strategy plus its parameters."""

    strategy: str = "greedy"
    width: int = 3
    k: int = 5
    p: float = 0.9
    t: float = 1.0
    seed: int = 0

    @classmethod
    def from_wire(cls, doc: dict | None) -> "DecodeSpec":
        if not doc:
            return cls()
        return cls(
            strategy=doc.get("strategy", "greedy"),
            width=int(doc.get("width", 3)),
            k=int(doc.get("k", 5)),
            p=float(doc.get("p", 0.9)),
            t=float(doc.get("t", 1.0)),
            seed=int(doc.get("seed", 0)),
        )


def smear_fraction(abs_error: float) -> float:
    """Off-target probability mass as a monotone function of injected error."""
    if abs_error <= 0.0:
        return 0.0
    return SMEAR_MAX / (1.0 + (SMEAR_SCALE / abs_error) ** SMEAR_SHAPE)


class MockMetaModel(BatchFromSingleMixin):
    """In-process mock of the meta-surrogate serving pipeline."""

    def __init__(
        self,
        tasks,
        noise_sigma_rel: float = 0.0,
        codec: CodecConfig | None = None,
        seed: int = 0,
        model_name: str = "mock-meta-surrogate",
    ):
        self.codec = codec or CodecConfig()
        self.noise_sigma_rel = float(noise_sigma_rel)
        self.seed = seed
        self.model_name = model_name
        self.vocab = Vocabulary.build(self.codec.k_min, self.codec.k_max)
        self._by_metadata: dict[str, object] = {}
        self._tasks = list(tasks)
        for task in self._tasks:
            for tpl in PromptTemplate:
                self._by_metadata.setdefault(render_metadata(task.metadata, tpl), task)

    def lookup(self, metadata_text: str):
        return self._by_metadata.get(metadata_text)

    def _request_rng(self, metadata_text: str, x) -> np.random.Generator:
        payload = f"{self.seed}|{metadata_text}|{np.asarray(x, dtype=float).tobytes().hex()}"
        digest = hashlib.sha256(payload.encode()).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "big"))

    def _target_value(self, task, metadata_text: str, x) -> tuple[float, float]:
        y_true = float(task.evaluate(np.asarray(x, dtype=float)))
        if self.noise_sigma_rel <= 0.0:
            return y_true, y_true
        eps = float(self._request_rng(metadata_text, x).standard_normal())
        scale = abs(y_true) if y_true != 0.0 else 1.0
        return y_true, y_true + self.noise_sigma_rel * eps * scale

    def _class_ids(self) -> dict[str, np.ndarray]:
        v = self.vocab
        return {
            "sign": np.array([v.id_of("+"), v.id_of("-")]),
            "exponent": np.array(
                [v.id_of(f"<10^{k}>") for k in range(self.codec.k_min, self.codec.k_max + 1)]
            ),
            "digit": np.array([v.id_of(str(d)) for d in range(10)]),
        }

    def _step_distributions(self, y_target: float, smear: float, codec: CodecConfig):
        """One distribution per target token.

        Smeared mass stays inside the token class of the position (signs,
        exponent tokens, digits), mimicking a trained model whose confusion
        is type-consistent; brackets stay deterministic.
        """
        encoded = encode_scalar(y_target, codec)
        tokens = [OPEN_TOKEN, *encoded.tokens(), CLOSE_TOKEN]
        classes = self._class_ids()
        kinds = [None, "sign", "exponent"] + ["digit"] * encoded.gamma + [None]
        size = len(self.vocab)
        dists = []
        for tok, kind in zip(tokens, kinds):
            dist = np.zeros(size)
            dist[self.vocab.id_of(tok)] = 1.0
            if smear > 0.0 and kind is not None:
                dist *= 1.0 - smear
                ids = classes[kind]
                dist[ids] += smear / len(ids)
            dists.append(dist)
        return dists, [self.vocab.id_of(t) for t in tokens]

    def answer(
        self,
        metadata_text: str,
        x,
        decode: DecodeSpec | None = None,
        return_probs: bool = False,
        top_k_probs: int = 5,
        gamma: int | None = None,
    ) -> SurrogatePrediction:
        """Full serving pipeline for one query addressed by metadata text.

        The request's gamma, when given, sets the output precision; the
        exponent coverage stays the server's.
        """
        task = self.lookup(metadata_text)
        if task is None:
            raise KeyError(f"unknown task metadata: {metadata_text[:80]!r}")
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size != task.dim:
            raise DimMismatch(f"task dim {task.dim}, query shape {x.shape}")
        decode = decode or DecodeSpec()
        codec = self.codec if gamma is None else replace(self.codec, gamma=int(gamma))

        y_true, y_target = self._target_value(task, metadata_text, x)
        smear = smear_fraction(abs(y_target - y_true))
        dists, _ = self._step_distributions(y_target, smear, codec)
        src = fixed_sequence_source(dists, self.vocab.end_id, len(self.vocab))
        max_len = len(dists) + 1

        beam_values = None
        if decode.strategy == "greedy":
            ids = greedy_decode(src, max_len, self.vocab.end_id)
        elif decode.strategy == "beam":
            hyps = beam_decode(src, decode.width, max_len, self.vocab.end_id)
            ids = hyps[0][0]
            beam_values = []
            for seq, _ in hyps[:3]:
                try:
                    beam_values.append(parse_fitness(self.vocab.decode(seq)))
                except UnparseableOutput:
                    continue
        elif decode.strategy == "top_k":
            ids = sample_decode(src, TopK(decode.k), decode.seed, max_len, self.vocab.end_id)
        elif decode.strategy == "top_p":
            ids = sample_decode(src, TopP(decode.p), decode.seed, max_len, self.vocab.end_id)
        elif decode.strategy == "temperature":
            ids = sample_decode(src, Temperature(decode.t), decode.seed, max_len, self.vocab.end_id)
        else:
            raise ValueError(f"unknown decode strategy {decode.strategy!r}")

        content_ids = [i for i in ids if i != self.vocab.end_id]
        raw_text = self.vocab.decode(content_ids)
        y_hat = parse_fitness(raw_text)  # UnparseableOutput propagates (-> 422)

        step_dists = [dists[t] if t < len(dists) else None for t in range(len(content_ids))]
        step_dists = [d for d in step_dists if d is not None]
        report = uncertainty_scores(
            step_dists, content_ids[: len(step_dists)], beam_values=beam_values
        )

        step_probs = None
        if return_probs:
            step_probs = tuple(
                _top_k_row(d, self.vocab, top_k_probs) for d in step_dists
            )
        return SurrogatePrediction(
            y=y_hat,
            raw_text=raw_text,
            tokens=tuple(self.vocab.token_of(i) for i in content_ids),
            step_probs=step_probs,
            uncertainty=report,
        )

    # Surrogate protocol ----------------------------------------------------

    def predict(self, meta: TaskMetadata, x) -> SurrogatePrediction:
        return self.answer(render_metadata(meta, PromptTemplate.SMALL), x)


def _top_k_row(dist: np.ndarray, vocab: Vocabulary, k: int):
    k = max(1, min(k, dist.size))
    keep = np.argsort(-dist, kind="stable")[:k]
    mass = float(dist[keep].sum())
    return tuple((vocab.token_of(int(i)), float(dist[i]) / mass) for i in keep)
