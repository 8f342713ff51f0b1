"""Latin hypercube designs for offline data collection."""

from __future__ import annotations

import numpy as np


def lhs_sample(n: int, dim: int, bounds=(-5.0, 5.0), seed: int = 0) -> np.ndarray:
    """n stratified points in the box, one per axis stratum per dimension.

    Each dimension splits its range into n equal strata; a seeded
    permutation assigns strata to points and a jitter places the point
    inside its stratum. Same seed, same design.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    unit = np.empty((n, dim))
    for d in range(dim):
        perm = rng.permutation(n)
        unit[:, d] = (perm + rng.uniform(0.0, 1.0, size=n)) / n
    lo, hi = float(bounds[0]), float(bounds[1])
    return lo + unit * (hi - lo)
