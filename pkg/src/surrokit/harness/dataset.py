"""Offline dataset generation: sample, evaluate, encode, split, persist.

One JSONL record per evaluated point, plus a manifest that pins every seed
and a vocabulary file shared with any serving component. Same config, same
bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..codec import CodecConfig, encode_scalar, encode_vector
from ..errors import ExponentOutOfRange, NonFinite
from ..problems import lhs_sample, make_suite
from ..prompts import PromptTemplate, render_metadata
from ..vocab import Vocabulary
from .config import ExperimentConfig, split_counts

DATASET_FILE = "dataset.jsonl"
MANIFEST_FILE = "manifest.json"
VOCAB_FILE = "vocab.json"


@dataclass(frozen=True)
class DatasetRecord:
    task_id: str
    metadata_text: str
    x: tuple[float, ...]
    y: float
    x_text: str
    y_text: str
    split: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "task_id": self.task_id,
                "metadata_text": self.metadata_text,
                "x": list(self.x),
                "y": self.y,
                "x_text": self.x_text,
                "y_text": self.y_text,
                "split": self.split,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "DatasetRecord":
        doc = json.loads(line)
        return cls(
            task_id=doc["task_id"],
            metadata_text=doc["metadata_text"],
            x=tuple(doc["x"]),
            y=doc["y"],
            x_text=doc["x_text"],
            y_text=doc["y_text"],
            split=doc["split"],
        )


def _task_seed(master_seed: int, task_id: str) -> int:
    digest = hashlib.sha256(f"{master_seed}|{task_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def generate_dataset(cfg: ExperimentConfig, out_dir: str | Path) -> dict:
    """Write dataset.jsonl, manifest.json and vocab.json; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    codec = CodecConfig(gamma=cfg.gamma, k_min=cfg.k_min, k_max=cfg.k_max)
    template = PromptTemplate(cfg.template)
    tasks = make_suite(cfg.suite, n_tasks=cfg.n_tasks, seed=cfg.seed)

    counts = {"train": 0, "test": 0}
    encode_failures: dict[str, int] = {}
    lines: list[str] = []
    for idx, task in enumerate(tasks):
        task_seed = _task_seed(cfg.seed, task.task_id)
        xs = lhs_sample(cfg.samples_per_task, task.dim, task.bounds, seed=task_seed)
        ys = np.asarray(task.evaluate(xs), dtype=float)
        meta_text = render_metadata(task.metadata, template)

        order = np.random.default_rng(task_seed ^ 0x5EED).permutation(cfg.samples_per_task)
        n_train = split_counts(cfg.samples_per_task, idx)
        split_of = {}
        for rank, sample_idx in enumerate(order):
            split_of[int(sample_idx)] = "train" if rank < n_train else "test"

        for i in range(cfg.samples_per_task):
            try:
                x_text = encode_vector(xs[i], codec)
                y_text = "[" + encode_scalar(float(ys[i]), codec).text() + "]"
            except (ExponentOutOfRange, NonFinite) as err:
                key = f"{task.task_id}:{type(err).__name__}"
                encode_failures[key] = encode_failures.get(key, 0) + 1
                continue
            rec = DatasetRecord(
                task_id=task.task_id,
                metadata_text=meta_text,
                x=tuple(float(v) for v in xs[i]),
                y=float(ys[i]),
                x_text=x_text,
                y_text=y_text,
                split=split_of[i],
            )
            counts[rec.split] += 1
            lines.append(rec.to_json())

    (out / DATASET_FILE).write_text("\n".join(lines) + "\n")
    Vocabulary.build(cfg.k_min, cfg.k_max).save(out / VOCAB_FILE)

    manifest = {
        "config": cfg.to_dict(),
        "tasks": [t.to_manifest() for t in tasks],
        "records": counts["train"] + counts["test"],
        "train": counts["train"],
        "test": counts["test"],
        "encode_failures": encode_failures,
        "files": {"dataset": DATASET_FILE, "vocab": VOCAB_FILE},
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest


def load_dataset(path: str | Path) -> list[DatasetRecord]:
    """Read back a dataset.jsonl (or the directory holding one)."""
    p = Path(path)
    if p.is_dir():
        p = p / DATASET_FILE
    return [DatasetRecord.from_json(line) for line in p.read_text().splitlines() if line]


def records_by_task(records, split: str | None = None) -> dict[str, list[DatasetRecord]]:
    out: dict[str, list[DatasetRecord]] = {}
    for rec in records:
        if split is None or rec.split == split:
            out.setdefault(rec.task_id, []).append(rec)
    return out


def fit_arrays_for_tasks(records, tasks, split: str | None = None):
    """{(function_name, instance, dim): (x, y)} arrays for surrogate fitting.

    Suites may list the same function twice; predict-time resolution cannot
    tell the twins apart, so only the first task of a key contributes.
    """
    by_task = records_by_task(records, split)
    out = {}
    for task in tasks:
        recs = by_task.get(task.task_id, [])
        key = (task.metadata.function_name, task.instance, task.dim)
        if not recs or key in out:
            continue
        x = np.array([r.x for r in recs], dtype=float)
        y = np.array([r.y for r in recs], dtype=float)
        out[key] = (x, y)
    return out
