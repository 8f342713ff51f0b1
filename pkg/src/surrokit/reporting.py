"""Report writers: delimited tables, markdown summaries, and figures.

Every report command writes its numbers as CSV, a human-readable markdown
table in the published style (bold best per row, +/≈/- annotations), and a
PNG figure rendered next to the delimited output.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def markdown_table(
    header: list[str],
    rows,
    bold_min_columns: tuple[int, ...] = (),
) -> str:
    """Markdown table; within bold_min_columns the row-wise minimum is bolded."""
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        cells = [_fmt(v) for v in row]
        if bold_min_columns:
            numeric = {
                i: row[i]
                for i in bold_min_columns
                if isinstance(row[i], (int, float)) and np.isfinite(row[i])
            }
            if numeric:
                best = min(numeric, key=numeric.get)
                cells[best] = f"**{cells[best]}**"
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_markdown(path: str | Path, title: str, body: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(f"# {title}\n\n{body}")
    return path


def save_smae_bars(path: str | Path, task_ids, smae_values, title: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(max(6, 0.4 * len(task_ids)), 3.2))
    ax.bar(range(len(task_ids)), smae_values, color="#4878d0")
    ax.set_xticks(range(len(task_ids)))
    ax.set_xticklabels(task_ids, rotation=90, fontsize=7)
    ax.set_ylabel("sMAE")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_convergence_grid(path: str | Path, traces_by_task: dict, title: str) -> Path:
    """One subplot per task: best pseudo-fitness vs generation, one line per seed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(traces_by_task)
    cols = min(6, max(1, int(np.ceil(np.sqrt(n)))))
    rows = int(np.ceil(n / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(2.6 * cols, 2.2 * rows), squeeze=False)
    for ax in axes.ravel()[n:]:
        ax.axis("off")
    for ax, (task_id, seed_traces) in zip(axes.ravel(), traces_by_task.items()):
        for trace in seed_traces:
            gens = [g for g, _, _ in trace]
            bests = [b for _, b, _ in trace]
            ax.plot(gens, bests, lw=0.8, alpha=0.8)
        ax.set_title(task_id, fontsize=8)
        ax.set_yscale("symlog")
        ax.tick_params(labelsize=6)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_uncertainty_scatter(path: str | Path, scores: dict, abs_errors, title: str) -> Path:
    """Scatter of each uncertainty criterion against absolute error."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [k for k, v in scores.items() if v is not None and len(v)]
    fig, axes = plt.subplots(1, max(len(names), 1), figsize=(3.0 * max(len(names), 1), 3.0))
    axes = np.atleast_1d(axes)
    err = np.asarray(abs_errors, dtype=float)
    for ax, name in zip(axes, names):
        vals = np.asarray(scores[name], dtype=float)
        keep = np.isfinite(vals) & np.isfinite(err)
        ax.scatter(vals[keep], err[keep], s=4, alpha=0.4)
        ax.set_xlabel(name)
        ax.set_yscale("log")
    axes[0].set_ylabel("|y_hat - y|")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
