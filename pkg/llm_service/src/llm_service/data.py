"""Dataset loading and batching for the JSONL interchange format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .tokenizer import WordTokenizer


@dataclass(frozen=True)
class Sample:
    task_id: str
    input_text: str
    target_text: str
    y: float
    dim: int


def load_samples(dataset_dir: str | Path, split: str | None = None) -> list[Sample]:
    path = Path(dataset_dir)
    jsonl = path / "dataset.jsonl" if path.is_dir() else path
    samples = []
    for line in jsonl.read_text().splitlines():
        if not line:
            continue
        doc = json.loads(line)
        if split is not None and doc["split"] != split:
            continue
        samples.append(
            Sample(
                task_id=doc["task_id"],
                input_text=doc["metadata_text"] + "; x=" + doc["x_text"],
                target_text=doc["y_text"],
                y=float(doc["y"]),
                dim=len(doc["x"]),
            )
        )
    return samples


def dataset_gamma(dataset_dir: str | Path, default: int = 15) -> int:
    manifest = Path(dataset_dir) / "manifest.json"
    if manifest.exists():
        return int(json.loads(manifest.read_text())["config"]["gamma"])
    return default


def pad_batch(rows: list[list[int]], pad_id: int, max_len: int) -> torch.Tensor:
    width = min(max(len(r) for r in rows), max_len)
    out = torch.full((len(rows), width), pad_id, dtype=torch.long)
    for i, row in enumerate(rows):
        trimmed = row[:width]
        out[i, : len(trimmed)] = torch.tensor(trimmed, dtype=torch.long)
    return out


def make_batches(
    samples: list[Sample],
    tokenizer: WordTokenizer,
    batch_size: int,
    max_input_len: int,
    max_target_len: int,
    shuffle_seed: int | None = None,
):
    """Yield (input_ids, attention_mask, labels) tensors."""
    order = list(range(len(samples)))
    if shuffle_seed is not None:
        gen = torch.Generator().manual_seed(shuffle_seed)
        order = torch.randperm(len(samples), generator=gen).tolist()
    for start in range(0, len(order), batch_size):
        chunk = [samples[i] for i in order[start : start + batch_size]]
        inputs = [tokenizer.encode(s.input_text, add_eos=True) for s in chunk]
        targets = [tokenizer.encode(s.target_text, add_eos=True) for s in chunk]
        input_ids = pad_batch(inputs, tokenizer.pad_id, max_input_len)
        labels = pad_batch(targets, tokenizer.pad_id, max_target_len)
        attention = (input_ids != tokenizer.pad_id).long()
        yield input_ids, attention, labels
