"""Sequence-level uncertainty scores and token-position error profiles.

All scores average over the decoded sequence length L and use natural
logarithms: mean negative log-likelihood of the chosen tokens, inverse
maximum softmax probability, mean Shannon entropy, inverse top-2
probability margin, and (when several beam hypotheses decode to numbers)
the population standard deviation of the top beam values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import parse_scalar_tokens
from .errors import LengthMismatch, NeedTwoTokensForMargin
from .vocab import Vocabulary


@dataclass(frozen=True)
class UncertaintyReport:
    nll: float
    imsp: float
    ent: float
    itpm: float
    beam_std: float | None = None

    def as_dict(self) -> dict:
        out = {"nll": self.nll, "imsp": self.imsp, "ent": self.ent, "itpm": self.itpm}
        if self.beam_std is not None:
            out["beam_std"] = self.beam_std
        return out


def entropy(probs: np.ndarray) -> float:
    """Shannon entropy in nats; zero-probability terms contribute nothing."""
    p = np.asarray(probs, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def uncertainty_scores(
    dists,
    chosen_ids,
    beam_values=None,
) -> UncertaintyReport:
    """Score one decoded sequence from its per-step distributions.

    ``beam_values`` are the decoded floats of the top beam hypotheses; the
    dispersion field is included only when at least two are available.
    """
    dists = [np.asarray(d, dtype=float) for d in dists]
    chosen_ids = list(chosen_ids)
    if len(dists) != len(chosen_ids):
        raise LengthMismatch(f"{len(dists)} distributions vs {len(chosen_ids)} ids")
    if not dists:
        raise LengthMismatch("need at least one step")
    if dists[0].size < 2:
        raise NeedTwoTokensForMargin("top-2 margin needs |V| >= 2")

    length = len(dists)
    nll = 0.0
    top1_sum = 0.0
    ent_sum = 0.0
    margin_sum = 0.0
    for dist, tid in zip(dists, chosen_ids):
        p_chosen = float(dist[tid])
        nll += -math.log(p_chosen) if p_chosen > 0 else math.inf
        top2 = np.partition(dist, -2)[-2:]
        p2, p1 = float(top2[0]), float(top2[1])
        top1_sum += p1
        margin_sum += p1 - p2
        ent_sum += entropy(dist)

    beam_std = None
    if beam_values is not None:
        vals = [v for v in beam_values if math.isfinite(v)]
        if len(vals) >= 2:
            beam_std = float(np.std(vals))  # population std

    return UncertaintyReport(
        nll=nll / length,
        imsp=1.0 - top1_sum / length,
        ent=ent_sum / length,
        itpm=1.0 - margin_sum / length,
        beam_std=beam_std,
    )


def _payload_tokens(ids, vocab: Vocabulary) -> list[str]:
    toks = [vocab.token_of(i) for i in ids]
    return [t for t in toks if t not in ("[", "]", "<s>", "</s>", "<pad>")]


def per_position_error_profile(pred_ids, true_ids, vocab: Vocabulary) -> np.ndarray:
    """Per-position absolute errors of one aligned prediction.

    After bracket stripping, position 1 is a sign-mismatch indicator,
    position 2 the absolute exponent gap, and later positions absolute
    digit gaps. Use mean_error_profile to average over a batch.
    """
    pred = _payload_tokens(pred_ids, vocab)
    true = _payload_tokens(true_ids, vocab)
    if len(pred) != len(true):
        raise LengthMismatch(f"{len(pred)} predicted vs {len(true)} true tokens")
    pred_num = parse_scalar_tokens(pred)
    true_num = parse_scalar_tokens(true)
    profile = np.empty(len(true))
    profile[0] = 0.0 if pred_num.sign == true_num.sign else 1.0
    profile[1] = abs(pred_num.exponent_k - true_num.exponent_k)
    profile[2:] = np.abs(
        np.array(pred_num.mantissa, dtype=float) - np.array(true_num.mantissa)
    )
    return profile


def mean_error_profile(pairs, vocab: Vocabulary) -> np.ndarray:
    """Average per-position error profile over (pred_ids, true_ids) pairs."""
    profiles = [per_position_error_profile(p, t, vocab) for p, t in pairs]
    if not profiles:
        raise LengthMismatch("need at least one pair")
    return np.mean(profiles, axis=0)
