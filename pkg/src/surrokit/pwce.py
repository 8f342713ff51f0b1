"""Position-weighted cross-entropy over encoded-number token sequences.

The weight schedule front-loads the structural tokens: sign, exponent and
leading digit carry weight ``2 * alpha``, then the remaining mantissa digits
decay linearly from ``alpha`` down to a floor of 1. Positions are 1-indexed
over the payload with the bracket markers removed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import LengthMismatch, ZeroProbabilityTarget


def pwce_weight(i: int, alpha: float, gamma: int) -> float:
    """Weight of payload position i (1-indexed, brackets stripped)."""
    if i < 1:
        raise ValueError("positions are 1-indexed")
    if i <= 3:
        return 2.0 * alpha
    if gamma <= 1:
        return 1.0
    return max(1.0, alpha - (i - 4) * (alpha - 1.0) / (gamma - 1.0))


def pwce_weights(alpha: float, gamma: int) -> np.ndarray:
    """Full schedule for one payload of length ``2 + gamma``."""
    return np.array([pwce_weight(i, alpha, gamma) for i in range(1, gamma + 3)])


def pwce_loss(
    dists,
    target_ids,
    alpha: float,
    gamma: int,
    force_uniform: bool = False,
) -> float:
    """Weighted negative log-likelihood of the target payload.

    ``dists`` holds one probability vector per payload position (sign,
    exponent, then gamma digits). With ``force_uniform`` every weight is 1,
    which reduces the loss to standard unweighted cross-entropy.
    """
    dists = list(dists)
    target_ids = list(target_ids)
    n = gamma + 2
    if len(dists) != len(target_ids):
        raise LengthMismatch(
            f"{len(dists)} distributions vs {len(target_ids)} targets"
        )
    if len(dists) != n:
        raise LengthMismatch(
            f"payload must hold {n} positions (sign + exponent + {gamma} digits), "
            f"got {len(dists)}"
        )
    total = 0.0
    for pos, (dist, tid) in enumerate(zip(dists, target_ids), start=1):
        p = float(np.asarray(dist)[tid])
        if p <= 0.0:
            raise ZeroProbabilityTarget(pos)
        w = 1.0 if force_uniform else pwce_weight(pos, alpha, gamma)
        total -= w * math.log(p)
    return total
