"""Experiment configuration: one dataclass shared by CLI flags and JSON files.

Values from a config file take precedence over command-line flags, so a
checked-in config fully determines a run.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError

SUITES = ("MCF1", "MCF2", "MCF3", "manipulator")
SURROGATE_KINDS = ("rbfn", "remote", "mock", "exact")
TRAIN_TEST_RATIO = (5, 3)


@dataclass
class ExperimentConfig:
    suite: str = "MCF1"
    samples_per_task: int = 500
    gamma: int = 15
    alpha: float = 10.0
    k_min: int = -12
    k_max: int = 12
    template: str = "small"
    surrogate: str = "rbfn"
    remote_url: str | None = None
    noise_sigma_rel: float = 0.0
    model_path: str | None = None
    n_tasks: int = 50  # manipulator suites only
    n_centers: int | None = None
    seed: int = 0
    seeds: tuple[int, ...] = (0,)
    pop_size: int = 50
    generations: int = 100
    migration_prob: float = 0.3
    archive_prob: float = 0.2
    shrink: float = 0.8
    archive_capacity: int = 300
    out_dir: str = "runs"

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"suite must be one of {SUITES}, got {self.suite!r}")
        if self.surrogate not in SURROGATE_KINDS:
            raise ConfigError(
                f"surrogate must be one of {SURROGATE_KINDS}, got {self.surrogate!r}"
            )
        if self.samples_per_task < 2:
            raise ConfigError("samples_per_task must be at least 2")
        if self.gamma < 1:
            raise ConfigError("gamma must be >= 1")
        self.seeds = tuple(int(s) for s in self.seeds)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["seeds"] = list(self.seeds)
        return doc

    @classmethod
    def from_sources(cls, flags: dict | None = None, config_file: str | Path | None = None):
        """Merge flag values and a JSON config file; the file wins."""
        merged: dict = {}
        if flags:
            merged.update({k: v for k, v in flags.items() if v is not None})
        if config_file:
            try:
                doc = json.loads(Path(config_file).read_text())
            except (OSError, ValueError) as err:
                raise ConfigError(f"cannot read config file {config_file}: {err}") from None
            unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            merged.update(doc)
        try:
            return cls(**merged)
        except TypeError as err:
            raise ConfigError(str(err)) from None


def split_counts(n: int, task_index: int, ratio=TRAIN_TEST_RATIO) -> int:
    """Train count for one task, balancing remainders across task indices.

    Per-task counts alternate so that the pooled split is exactly
    ratio[0]:ratio[1] whenever the total divides evenly.
    """
    num, den = ratio[0], ratio[0] + ratio[1]
    hi = (task_index + 1) * n * num // den
    lo = task_index * n * num // den
    return hi - lo
