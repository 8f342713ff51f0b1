"""Planar manipulator control objective and its many-task generator.

A task is a d-joint planar arm with equal link lengths summing to
``total_length`` and per-joint angle caps summing to ``total_max_angle``.
Decision variables live in [0, 1]^d and scale linearly to joint angles;
the objective is the distance from the end-effector tip to a fixed target.
Task families are spread over the (length, angle) rectangle with a
centroidal Voronoi tessellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimMismatch
from ..prompts import TaskMetadata

DATASET_NAME = "Planar_Kinematic_Arm_Control"
TARGET = (0.5, 0.5)
DEFAULT_JOINTS = 20
LENGTH_RANGE = (0.8, 1.2)
ANGLE_RANGE = (math.pi / 2.0, 2.0 * math.pi)


@dataclass(frozen=True)
class ManipulatorParams:
    total_length: float
    total_max_angle: float
    joints: int = DEFAULT_JOINTS
    target: tuple[float, float] = TARGET

    def __post_init__(self):
        if self.total_length <= 0 or self.total_max_angle <= 0:
            raise ValueError("length and angle budgets must be positive")
        if self.joints < 1:
            raise ValueError("need at least one joint")


def manipulator_eval(p: ManipulatorParams, v) -> np.ndarray | float:
    """Distance from the arm tip to the target; v in [0,1]^d (clamped).

    Joint j turns by ``v_j * total_max_angle / d`` relative to the previous
    link; links have length ``total_length / d`` and start from the origin.
    """
    pts = np.asarray(v, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[1] != p.joints:
        raise DimMismatch(f"expected {p.joints} joint values, got {pts.shape[1]}")
    pts = np.clip(pts, 0.0, 1.0)

    angles = pts * (p.total_max_angle / p.joints)
    heading = np.cumsum(angles, axis=1)
    link = p.total_length / p.joints
    tip_x = link * np.cos(heading).sum(axis=1)
    tip_y = link * np.sin(heading).sum(axis=1)
    dist = np.hypot(tip_x - p.target[0], tip_y - p.target[1])
    return float(dist[0]) if single else dist


def cvt_points(n: int, seed: int, iterations: int = 60, grid: int = 96) -> np.ndarray:
    """n generator points of a centroidal Voronoi tessellation of [0,1]^2.

    Lloyd iterations against a fixed midpoint grid; only the initial
    generator placement consumes randomness, so one seed fixes the layout.
    """
    if n < 1:
        raise ValueError("need at least one point")
    axis = (np.arange(grid) + 0.5) / grid
    gx, gy = np.meshgrid(axis, axis)
    cloud = np.column_stack([gx.ravel(), gy.ravel()])

    rng = np.random.default_rng(seed)
    gens = rng.uniform(0.0, 1.0, size=(n, 2))
    for _ in range(iterations):
        d2 = ((cloud[:, None, :] - gens[None, :, :]) ** 2).sum(axis=2)
        owner = d2.argmin(axis=1)
        for j in range(n):
            members = cloud[owner == j]
            if len(members):
                gens[j] = members.mean(axis=0)
    order = np.lexsort((gens[:, 1], gens[:, 0]))
    return gens[order]


def manipulator_task(task_id: str, total_length: float, total_max_angle: float,
                     joints: int, instance: int = 0):
    from .suites import TaskSpec  # local import to avoid a cycle

    index = int(task_id.replace("task", "")) - 1
    meta = TaskMetadata(
        dataset=DATASET_NAME,
        function_id=str(index),
        function_name=task_id,
        instance=instance,
        dim=joints,
        key_features=(
            ("dataset", DATASET_NAME),
            ("instance", f"instance={instance}"),
        ),
    )
    return TaskSpec(
        task_id=task_id,
        kind="manipulator",
        function_name=task_id,
        instance=instance,
        dim=joints,
        bounds=(0.0, 1.0),
        params={"total_length": total_length, "total_max_angle": total_max_angle},
        metadata=meta,
    )


def make_manipulator_tasks(n_tasks: int, seed: int, joints: int = DEFAULT_JOINTS):
    """CVT-spread arm tasks over the (length, max-angle) rectangle."""
    unit = cvt_points(n_tasks, seed)
    lengths = LENGTH_RANGE[0] + unit[:, 0] * (LENGTH_RANGE[1] - LENGTH_RANGE[0])
    angles = ANGLE_RANGE[0] + unit[:, 1] * (ANGLE_RANGE[1] - ANGLE_RANGE[0])
    return [
        manipulator_task(f"task{i + 1}", float(lengths[i]), float(angles[i]), joints)
        for i in range(n_tasks)
    ]
