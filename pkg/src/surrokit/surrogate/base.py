"""The surrogate abstraction every optimizer consumes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import DimMismatch
from ..prompts import TaskMetadata
from ..uncertainty import UncertaintyReport


@dataclass(frozen=True)
class SurrogatePrediction:
    """One fitness estimate, optionally with its token-level trace.

    Native surrogates (RBFN, exact oracle) return only ``y``; token models
    may attach the raw generated text, token strings, top-k step
    probabilities, and a sequence-level uncertainty report.
    """

    y: float
    raw_text: str | None = None
    tokens: tuple[str, ...] | None = None
    step_probs: tuple[tuple[tuple[str, float], ...], ...] | None = None
    uncertainty: UncertaintyReport | None = None


@runtime_checkable
class Surrogate(Protocol):
    def predict(self, meta: TaskMetadata, x) -> SurrogatePrediction: ...

    def predict_batch(self, meta: TaskMetadata, xs) -> list[SurrogatePrediction]: ...


class BatchFromSingleMixin:
    """Default predict_batch that loops predict; override when batching pays."""

    def predict_batch(self, meta, xs):
        return [self.predict(meta, x) for x in xs]


def _check_dim(meta: TaskMetadata, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size != meta.dim:
        raise DimMismatch(f"metadata dim={meta.dim}, query has shape {arr.shape}")
    return arr


class ExactSurrogate(BatchFromSingleMixin):
    """Identity oracle: answers with the true objective of the matching task.

    Tasks are resolved by (function_name, instance, dim); suites that list
    one function twice share the objective, so the collision is harmless.
    """

    def __init__(self, tasks):
        self._by_key = {}
        for t in tasks:
            self._by_key.setdefault((t.metadata.function_name, t.instance, t.dim), t)

    def resolve(self, meta: TaskMetadata):
        key = (meta.function_name, meta.instance, meta.dim)
        task = self._by_key.get(key)
        if task is None:
            raise DimMismatch(f"no task registered for {key}")
        return task

    def predict(self, meta: TaskMetadata, x) -> SurrogatePrediction:
        arr = _check_dim(meta, x)
        return SurrogatePrediction(y=float(self.resolve(meta).evaluate(arr)))

    def predict_batch(self, meta: TaskMetadata, xs) -> list[SurrogatePrediction]:
        task = self.resolve(meta)
        pts = np.asarray(xs, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != meta.dim:
            raise DimMismatch(f"batch must be (n, {meta.dim}), got {pts.shape}")
        vals = np.asarray(task.evaluate(pts), dtype=float)
        return [SurrogatePrediction(y=float(v)) for v in vals]


class CountingSurrogate(BatchFromSingleMixin):
    """Wrapper that counts every prediction for budget accounting."""

    def __init__(self, inner: Surrogate):
        self.inner = inner
        self.calls = 0

    def predict(self, meta, x):
        self.calls += 1
        return self.inner.predict(meta, x)

    def predict_batch(self, meta, xs):
        xs = list(xs)
        self.calls += len(xs)
        return self.inner.predict_batch(meta, xs)
