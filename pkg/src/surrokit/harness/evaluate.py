"""Surrogate accuracy evaluation and the uncertainty-error correlation study."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DegenerateVariance, MissingProbs, RemoteUnavailable, SurrokitError
from ..metrics import correlations, r2, smae
from ..problems import make_suite
from ..reporting import (
    markdown_table,
    save_smae_bars,
    save_uncertainty_scatter,
    write_csv,
    write_markdown,
)
from .config import ExperimentConfig
from .dataset import load_dataset, records_by_task

UNCERTAINTY_CRITERIA = ("nll", "imsp", "ent", "itpm", "beam_std")


def _task_meta_lookup(cfg: ExperimentConfig):
    tasks = make_suite(cfg.suite, n_tasks=cfg.n_tasks, seed=cfg.seed)
    return {t.task_id: t for t in tasks}


def run_surrogate_eval(
    dataset_path: str | Path,
    surrogate,
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    figures: bool = True,
) -> list[dict]:
    """Per-task sMAE and R^2 on the test split, plus a macro-average row.

    Surrogate failures are recorded per task instead of aborting the sweep.
    """
    records = load_dataset(dataset_path)
    tasks = _task_meta_lookup(cfg)
    by_task = records_by_task(records, split="test")

    rows: list[dict] = []
    for task_id in sorted(by_task, key=lambda t: int(t.lstrip("Ttask"))):
        recs = by_task[task_id]
        task = tasks[task_id]
        xs = np.array([r.x for r in recs], dtype=float)
        ys = np.array([r.y for r in recs], dtype=float)
        try:
            preds = surrogate.predict_batch(task.metadata, xs)
            y_hat = np.array([p.y for p in preds], dtype=float)
            rows.append(
                {
                    "task_id": task_id,
                    "n_test": len(recs),
                    "smae": smae(ys, y_hat),
                    "r2": r2(ys, y_hat),
                    "error": "",
                }
            )
        except RemoteUnavailable:
            raise  # a dead endpoint fails the whole sweep, not one task
        except SurrokitError as err:
            rows.append(
                {
                    "task_id": task_id,
                    "n_test": len(recs),
                    "smae": None,
                    "r2": None,
                    "error": f"{type(err).__name__}: {err}",
                }
            )

    ok = [r for r in rows if r["smae"] is not None]
    macro = {
        "task_id": "macro_avg",
        "n_test": sum(r["n_test"] for r in ok),
        "smae": float(np.mean([r["smae"] for r in ok])) if ok else None,
        "r2": float(np.mean([r["r2"] for r in ok])) if ok else None,
        "error": "" if len(ok) == len(rows) else f"{len(rows) - len(ok)} task(s) failed",
    }
    rows.append(macro)

    if out_dir is not None:
        out = Path(out_dir)
        header = ["task_id", "n_test", "smae", "r2", "error"]
        write_csv(out / "surrogate_eval.csv", header, ([r[h] for h in header] for r in rows))
        body = markdown_table(header, [[r[h] for h in header] for r in rows])
        write_markdown(out / "surrogate_eval.md", f"Surrogate accuracy ({cfg.surrogate})", body)
        if figures and ok:
            save_smae_bars(
                out / "surrogate_eval_smae.png",
                [r["task_id"] for r in ok],
                [r["smae"] for r in ok],
                f"per-task sMAE ({cfg.surrogate}, {cfg.suite})",
            )
    return rows


def run_uncertainty_study(
    dataset_path: str | Path,
    surrogate,
    cfg: ExperimentConfig,
    limit: int = 2000,
    out_dir: str | Path | None = None,
    figures: bool = True,
) -> dict:
    """Correlate the five sequence-level uncertainty scores with |y_hat - y|.

    Queries the test split (up to ``limit`` points, spread evenly over
    tasks) through a token surrogate that returns uncertainty reports.
    """
    records = load_dataset(dataset_path)
    tasks = _task_meta_lookup(cfg)
    by_task = records_by_task(records, split="test")
    per_task = max(1, -(-limit // max(len(by_task), 1)))  # ceil: never undershoot

    scores: dict[str, list] = {k: [] for k in UNCERTAINTY_CRITERIA}
    abs_errors: list[float] = []
    for task_id in sorted(by_task, key=lambda t: int(t.lstrip("Ttask"))):
        task = tasks[task_id]
        recs = by_task[task_id][:per_task]
        if not recs:
            continue
        xs = np.array([r.x for r in recs], dtype=float)
        preds = surrogate.predict_batch(task.metadata, xs)
        for rec, pred in zip(recs, preds):
            if pred.uncertainty is None:
                raise MissingProbs(
                    "surrogate returned no uncertainty report; enable return_probs"
                )
            abs_errors.append(abs(pred.y - rec.y))
            rep = pred.uncertainty
            scores["nll"].append(rep.nll)
            scores["imsp"].append(rep.imsp)
            scores["ent"].append(rep.ent)
            scores["itpm"].append(rep.itpm)
            scores["beam_std"].append(rep.beam_std if rep.beam_std is not None else np.nan)
        if len(abs_errors) >= limit:
            break

    table: dict[str, dict] = {}
    for name in UNCERTAINTY_CRITERIA:
        vals = np.asarray(scores[name], dtype=float)
        err = np.asarray(abs_errors, dtype=float)
        keep = np.isfinite(vals) & np.isfinite(err)
        try:
            if keep.sum() < 3:
                raise DegenerateVariance("fewer than three finite pairs")
            trip = correlations(vals[keep], err[keep])
            table[name] = {
                "pearson": trip.pearson,
                "spearman": trip.spearman,
                "kendall": trip.kendall,
                "n": int(keep.sum()),
            }
        except DegenerateVariance as err_:
            table[name] = {
                "pearson": None,
                "spearman": None,
                "kendall": None,
                "n": int(keep.sum()),
                "note": f"undefined: {err_}",
            }

    result = {"n_queries": len(abs_errors), "criteria": table}
    if out_dir is not None:
        out = Path(out_dir)
        header = ["criterion", "pearson", "spearman", "kendall", "n"]
        rows = [
            [name, row.get("pearson"), row.get("spearman"), row.get("kendall"), row.get("n")]
            for name, row in table.items()
        ]
        write_csv(out / "uncertainty_correlations.csv", header, rows)
        write_markdown(
            out / "uncertainty_correlations.md",
            f"Uncertainty vs |error| over {len(abs_errors)} queries",
            markdown_table(header, rows),
        )
        (out / "uncertainty_scores.json").write_text(json.dumps(result, indent=1) + "\n")
        if figures and abs_errors:
            save_uncertainty_scatter(
                out / "uncertainty_scatter.png",
                {k: scores[k] for k in ("ent", "imsp", "itpm")},
                abs_errors,
                "uncertainty vs absolute error",
            )
    return result
