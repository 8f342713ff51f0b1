"""Shared fixtures: micro datasets built with the consumer toolkit.

The consumer package (surrokit) appears here as the test-side contract
oracle only; the service itself never imports it.
"""

import json
from pathlib import Path

import pytest
from surrokit.codec import CodecConfig, encode_scalar, encode_vector
from surrokit.problems import lhs_sample
from surrokit.problems.suites import _bbob_task
from surrokit.prompts import PromptTemplate, render_metadata
from surrokit.vocab import Vocabulary

K_MIN, K_MAX = -8, 8


def write_dataset(out: Path, tasks, n_per_task: int, gamma: int, seed: int) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    codec = CodecConfig(gamma=gamma, k_min=K_MIN, k_max=K_MAX)
    Vocabulary.build(K_MIN, K_MAX).save(out / "vocab.json")
    lines = []
    for idx, task in enumerate(tasks):
        xs = lhs_sample(n_per_task, task.dim, task.bounds, seed=seed + idx)
        ys = task.evaluate(xs)
        meta = render_metadata(task.metadata, PromptTemplate.SMALL)
        n_train = int(n_per_task * 5 / 8)
        for i in range(n_per_task):
            lines.append(json.dumps({
                "task_id": task.task_id,
                "metadata_text": meta,
                "x": [float(v) for v in xs[i]],
                "y": float(ys[i]),
                "x_text": encode_vector(xs[i], codec),
                "y_text": "[" + encode_scalar(float(ys[i]), codec).text() + "]",
                "split": "train" if i < n_train else "test",
            }))
    (out / "dataset.jsonl").write_text("\n".join(lines) + "\n")
    (out / "manifest.json").write_text(json.dumps({"config": {"gamma": gamma}}) + "\n")
    return out


@pytest.fixture(scope="session")
def micro_dataset(tmp_path_factory) -> Path:
    tasks = [_bbob_task("Task1", "Sphere", 2), _bbob_task("Task2", "Ellipsoidal", 3)]
    return write_dataset(tmp_path_factory.mktemp("micro"), tasks, 200, gamma=6, seed=5)


@pytest.fixture(scope="session")
def micro_checkpoint(micro_dataset, tmp_path_factory) -> Path:
    from llm_service.train import TrainingConfig, train

    out = tmp_path_factory.mktemp("ckpt")
    cfg = TrainingConfig(
        base="tiny", epochs=100, learning_rate=3e-3, batch_size=16,
        max_eval_samples=150, seed=1,
    )
    summary = train(micro_dataset, cfg, out)
    (out / "test_summary.json").write_text(json.dumps(summary["eval"]) + "\n")
    return out
