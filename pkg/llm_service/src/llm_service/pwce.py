"""Position-weighted cross-entropy as a torch training objective.

Structural tokens (sign, exponent, leading digit) weigh ``2 * alpha``; the
remaining mantissa digits decay linearly from ``alpha`` to a floor of 1.
The bracket markers and the end-of-sequence token are outside the priority
schedule: they keep ordinary cross-entropy weight 1 by default (the model
must still learn to emit them; ``boundary_weight=0`` reproduces the strict
payload-only sum for cross-implementation parity checks). Padding is
always 0. ``uniform=True`` weighs every non-pad target token by 1, which
makes the batch mean equal the stock token-level cross-entropy.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F


def weight_schedule(alpha: float, gamma: int) -> list[float]:
    weights = []
    for i in range(1, gamma + 3):
        if i <= 3:
            weights.append(2.0 * alpha)
        elif gamma <= 1:
            weights.append(1.0)
        else:
            weights.append(max(1.0, alpha - (i - 4) * (alpha - 1.0) / (gamma - 1.0)))
    return weights


def label_weights(
    labels: torch.Tensor,
    alpha: float,
    gamma: int,
    open_id: int,
    close_id: int,
    eos_id: int,
    pad_id: int,
    uniform: bool = False,
    boundary_weight: float = 1.0,
) -> torch.Tensor:
    """Per-token weights aligned with ``labels`` (batch, seq)."""
    weights = torch.zeros_like(labels, dtype=torch.float32)
    if uniform:
        weights[(labels != pad_id)] = 1.0
        return weights
    schedule = weight_schedule(alpha, gamma)
    for b in range(labels.shape[0]):
        row = labels[b].tolist()
        try:
            start = row.index(open_id)
        except ValueError:
            continue
        weights[b, start] = boundary_weight
        pos = 0
        for t in range(start + 1, len(row)):
            tok = row[t]
            if tok == pad_id:
                break
            if tok in (close_id, eos_id):
                weights[b, t] = boundary_weight
                continue
            weights[b, t] = schedule[pos] if pos < len(schedule) else 1.0
            pos += 1
    return weights


def pwce_loss(
    logits: torch.Tensor,
    labels: torch.Tensor,
    weights: torch.Tensor,
    reduction: str = "weighted_mean",
) -> torch.Tensor:
    """Weighted token NLL.

    reduction "weighted_mean" divides by the total weight (training);
    "sum_per_sequence" returns the raw per-sequence weighted sums, the form
    compared against reference implementations in the parity tests.
    """
    logp = F.log_softmax(logits, dim=-1)
    token_nll = -logp.gather(-1, labels.clamp(min=0).unsqueeze(-1)).squeeze(-1)
    weighted = token_nll * weights
    if reduction == "sum_per_sequence":
        return weighted.sum(dim=1)
    if reduction == "weighted_mean":
        total = weights.sum()
        return weighted.sum() / total.clamp(min=1e-12)
    raise ValueError(f"unknown reduction {reduction!r}")
