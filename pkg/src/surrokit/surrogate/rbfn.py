"""Gaussian radial basis function network baseline.

Centers come from seeded k-means++ on the training inputs, widths from the
mean distance of each center to its nearest neighbours, and the output
layer (weights plus bias) from ordinary least squares, with a ridge
fallback when the design matrix is rank deficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans

from ..errors import DimMismatch, TooFewPoints
from ..prompts import TaskMetadata
from .base import BatchFromSingleMixin, SurrogatePrediction

WIDTH_NEIGHBORS = 2
WIDTH_FLOOR_FRACTION = 1e-6
RIDGE_LAMBDA = 1e-8


def default_n_centers(n_train: int) -> int:
    return min(n_train, max(10, n_train // 10))


@dataclass(frozen=True)
class RbfnModel:
    centers: np.ndarray  # (n_centers, dim)
    widths: np.ndarray  # (n_centers,)
    weights: np.ndarray  # (n_centers + 1,), bias last
    dim: int
    used_ridge: bool = False

    def design(self, x: np.ndarray) -> np.ndarray:
        d2 = cdist(x, self.centers, "sqeuclidean")
        phi = np.exp(-d2 / (2.0 * self.widths**2))
        return np.column_stack([phi, np.ones(len(x))])

    def predict(self, x) -> np.ndarray | float:
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[1] != self.dim:
            raise DimMismatch(f"model dim {self.dim}, query shape {pts.shape}")
        out = self.design(pts) @ self.weights
        return float(out[0]) if single else out


def rbfn_fit(
    train_x,
    train_y,
    n_centers: int | None = None,
    seed: int = 0,
    width_neighbors: int = WIDTH_NEIGHBORS,
) -> RbfnModel:
    """Fit the three-stage RBFN: k-means++ centers, local widths, OLS output."""
    x = np.asarray(train_x, dtype=float)
    y = np.asarray(train_y, dtype=float)
    if x.ndim != 2:
        raise DimMismatch(f"train_x must be (n, dim), got {x.shape}")
    n, dim = x.shape
    if n_centers is None:
        n_centers = default_n_centers(n)
    if n_centers < 1 or n < n_centers:
        raise TooFewPoints(f"{n} points cannot support {n_centers} centers")

    if n_centers == n:
        centers = x.copy()
    else:
        # Cluster a canonically ordered copy so the fit does not depend on
        # training-set row order.
        canonical = x[np.lexsort(x.T[::-1])]
        km = KMeans(n_clusters=n_centers, init="k-means++", n_init=3, random_state=seed)
        km.fit(canonical)
        centers = km.cluster_centers_

    span = x.max(axis=0) - x.min(axis=0)
    floor = max(WIDTH_FLOOR_FRACTION * float(np.linalg.norm(span)), 1e-12)
    if n_centers == 1:
        widths = np.array([max(float(cdist(x, centers).mean()), floor)])
    else:
        dists = cdist(centers, centers)
        np.fill_diagonal(dists, np.inf)
        nn = min(width_neighbors, n_centers - 1)
        widths = np.sort(dists, axis=1)[:, :nn].mean(axis=1)
        widths = np.maximum(widths, floor)

    model = RbfnModel(centers=centers, widths=widths, weights=np.zeros(n_centers + 1), dim=dim)
    phi = model.design(x)
    weights, _, rank, _ = np.linalg.lstsq(phi, y, rcond=None)
    used_ridge = False
    if rank < phi.shape[1]:
        gram = phi.T @ phi + RIDGE_LAMBDA * np.eye(phi.shape[1])
        weights = np.linalg.solve(gram, phi.T @ y)
        used_ridge = True
    return RbfnModel(
        centers=centers, widths=widths, weights=weights, dim=dim, used_ridge=used_ridge
    )


class RbfnSurrogate(BatchFromSingleMixin):
    """Surrogate facade over per-task RBFN models keyed by task identity."""

    def __init__(self, models: dict):
        # keys: (function_name, instance, dim)
        self._models = models

    @classmethod
    def fit_from_dataset(cls, records_by_task, n_centers=None, seed: int = 0):
        """records_by_task: {key: (train_x, train_y)} with key as above."""
        models = {}
        for i, (key, (tx, ty)) in enumerate(sorted(records_by_task.items())):
            models[key] = rbfn_fit(tx, ty, n_centers=n_centers, seed=seed + i)
        return cls(models)

    def model_for(self, meta: TaskMetadata) -> RbfnModel:
        key = (meta.function_name, meta.instance, meta.dim)
        model = self._models.get(key)
        if model is None:
            raise DimMismatch(f"no fitted model for task {key}")
        return model

    def predict(self, meta: TaskMetadata, x) -> SurrogatePrediction:
        return SurrogatePrediction(y=float(self.model_for(meta).predict(x)))

    def predict_batch(self, meta: TaskMetadata, xs) -> list[SurrogatePrediction]:
        vals = self.model_for(meta).predict(np.asarray(xs, dtype=float))
        return [SurrogatePrediction(y=float(v)) for v in np.atleast_1d(vals)]

    def save(self, path) -> None:
        """Persist all per-task models into one .npz archive."""
        arrays = {}
        keys = []
        for i, (key, model) in enumerate(sorted(self._models.items())):
            keys.append([key[0], str(key[1]), str(key[2]), str(int(model.used_ridge))])
            arrays[f"centers_{i}"] = model.centers
            arrays[f"widths_{i}"] = model.widths
            arrays[f"weights_{i}"] = model.weights
        arrays["keys"] = np.array(keys, dtype=object)
        np.savez(path, **arrays, allow_pickle=True)

    @classmethod
    def load(cls, path) -> "RbfnSurrogate":
        data = np.load(path, allow_pickle=True)
        models = {}
        for i, row in enumerate(data["keys"]):
            name, instance, dim, used_ridge = row
            centers = data[f"centers_{i}"]
            models[(str(name), int(instance), int(dim))] = RbfnModel(
                centers=centers,
                widths=data[f"widths_{i}"],
                weights=data[f"weights_{i}"],
                dim=centers.shape[1],
                used_ridge=bool(int(used_ridge)),
            )
        return cls(models)
