"""Task suites: evaluable TaskSpecs and their JSON manifests.

The three many-task suites each pair 6 named functions with dimensions
5/10/15/20, giving 24 tasks ordered Task1..Task24. The first half of each
suite groups functions by fitness overlap and the second half by optimum
overlap, reproducing the published grouping verbatim (including MCF2
listing Sharp_Ridge in both halves).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimMismatch
from ..prompts import TaskMetadata, standard_metadata
from . import functions, manipulator

SUITE_DIMS = (5, 10, 15, 20)

MCF_GROUPS: dict[str, tuple[str, ...]] = {
    "MCF1": (
        "Buche_Rastrigin",
        "Rosenbrock_rotated",
        "Step_Ellipsoidal",
        "Bent_Cigar",
        "Rosenbrock_original",
        "Rastrigin_F15",
    ),
    "MCF2": (
        "Sharp_Ridge",
        "Buche_Rastrigin",
        "Different_Powers",
        "Sharp_Ridge",
        "Schaffers",
        "Gallagher_21Peaks",
    ),
    "MCF3": (
        "Step_Ellipsoidal",
        "Composite_Grie_rosen",
        "Different_Powers",
        "Schwefel",
        "Gallagher_101Peaks",
        "Lunacek_bi_Rastrigin",
    ),
}


@dataclass(frozen=True)
class TaskSpec:
    """One evaluable optimization task."""

    task_id: str
    kind: str  # "bbob" | "manipulator"
    function_name: str
    instance: int
    dim: int
    bounds: tuple[float, float] = (-5.0, 5.0)
    params: dict = field(default_factory=dict)
    metadata: TaskMetadata = None

    def evaluate(self, x):
        """True objective at a point (dim,) or batch (n, dim)."""
        pts = np.asarray(x, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DimMismatch(f"{self.task_id}: expected dim {self.dim}, got {pts.shape}")
        if self.kind == "bbob":
            return functions.eval_function(self.function_name, self.instance, self.dim, pts)
        if self.kind == "manipulator":
            p = manipulator.ManipulatorParams(
                total_length=self.params["total_length"],
                total_max_angle=self.params["total_max_angle"],
                joints=self.dim,
            )
            return manipulator.manipulator_eval(p, pts)
        raise ValueError(f"unknown task kind {self.kind!r}")

    def to_manifest(self) -> dict:
        return {
            "task_id": self.task_id,
            "kind": self.kind,
            "function_name": self.function_name,
            "function_id": self.metadata.function_id,
            "instance": self.instance,
            "dim": self.dim,
            "bounds": list(self.bounds),
            "params": self.params,
        }


def _bbob_task(task_id: str, name: str, dim: int, instance: int = 0) -> TaskSpec:
    meta = standard_metadata(
        dataset="BBOB",
        function_id=functions.function_id(name),
        function_name=name,
        instance=instance,
        dim=dim,
    )
    return TaskSpec(
        task_id=task_id,
        kind="bbob",
        function_name=name,
        instance=instance,
        dim=dim,
        bounds=(-5.0, 5.0),
        metadata=meta,
    )


def make_mcf_suite(which: str) -> list[TaskSpec]:
    """Tasks Task1..Task24 of one suite: 6 functions x dims (5, 10, 15, 20)."""
    key = which.upper()
    if key not in MCF_GROUPS:
        raise ValueError(f"suite must be one of {sorted(MCF_GROUPS)}, got {which!r}")
    tasks = []
    idx = 1
    for name in MCF_GROUPS[key]:
        for dim in SUITE_DIMS:
            tasks.append(_bbob_task(f"Task{idx}", name, dim))
            idx += 1
    return tasks


def make_suite(which: str, n_tasks: int = 50, seed: int = 0) -> list[TaskSpec]:
    """Suite factory: MCF1/MCF2/MCF3 or the manipulator family."""
    if which.upper() in MCF_GROUPS:
        return make_mcf_suite(which)
    if which.lower() == "manipulator":
        return manipulator.make_manipulator_tasks(n_tasks, seed)
    raise ValueError(f"unknown suite {which!r}")


def suite_manifest(which: str, tasks: list[TaskSpec]) -> dict:
    return {"suite": which, "tasks": [t.to_manifest() for t in tasks]}


def save_suite_manifest(which: str, tasks: list[TaskSpec], path: str | Path) -> None:
    Path(path).write_text(json.dumps(suite_manifest(which, tasks), indent=1) + "\n")


def load_suite_manifest(path: str | Path) -> list[TaskSpec]:
    """Rebuild tasks from a manifest; evaluability follows from the seeds."""
    doc = json.loads(Path(path).read_text())
    tasks = []
    for entry in doc["tasks"]:
        if entry["kind"] == "bbob":
            tasks.append(
                _bbob_task(entry["task_id"], entry["function_name"], entry["dim"], entry["instance"])
            )
        else:
            tasks.append(manipulator.manipulator_task(
                entry["task_id"],
                entry["params"]["total_length"],
                entry["params"]["total_max_angle"],
                entry["dim"],
                entry["instance"],
            ))
    return tasks
