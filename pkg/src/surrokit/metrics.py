"""Evaluation statistics: range-scaled MAE, R^2, transfer rates, pooled
standardized scores, the rank-sum test, and rank correlations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    DegeneratePool,
    DegenerateRange,
    DegenerateVariance,
    ZeroBaseline,
)


def smae(y_true, y_pred) -> float:
    """Mean absolute error scaled by the max-min range of the true targets."""
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if yt.shape != yp.shape or yt.size < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    r = float(yt.max() - yt.min())
    if r <= 0.0:
        raise DegenerateRange("target range is zero")
    return float(np.abs(yt - yp).mean() / r)


def r2(y_true, y_pred) -> float:
    """Coefficient of determination, range (-inf, 1]."""
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if yt.shape != yp.shape or yt.size < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    ss_tot = float(((yt - yt.mean()) ** 2).sum())
    if ss_tot <= 0.0:
        raise DegenerateVariance("true targets have zero variance")
    ss_res = float(((yt - yp) ** 2).sum())
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class TaskErrorPair:
    err_single: float
    err_multi: float


def tcr(pair: TaskErrorPair) -> float:
    """Relative error reduction of the multi-task model over the single-task one."""
    if pair.err_single <= 0.0:
        raise ZeroBaseline("single-task error must be positive")
    return (pair.err_single - pair.err_multi) / pair.err_single


def ptr_ntr(tcrs) -> tuple[float, float]:
    """Fractions of tasks with positive / non-positive transfer; they sum to 1."""
    vals = list(tcrs)
    if not vals:
        raise ValueError("need at least one TCR value")
    ptr = sum(1 for v in vals if v > 0) / len(vals)
    return ptr, 1.0 - ptr


def mss(final_values: dict, focal: str) -> float:
    """Mean standardized score of one algorithm across tasks.

    ``final_values[task][algorithm]`` holds the final best value of every
    run. Each task is standardized against the mean and population std of
    the pool of all algorithms' runs on that task (the focal algorithm's
    runs included); the focal algorithm contributes its run mean.
    """
    scores = []
    for task, by_algo in final_values.items():
        if focal not in by_algo:
            raise KeyError(f"no runs of {focal!r} on task {task!r}")
        pooled = np.concatenate([np.asarray(v, dtype=float) for v in by_algo.values()])
        if pooled.size < 2:
            raise DegeneratePool(f"task {task!r} pools fewer than two runs")
        sigma = float(pooled.std())  # population std
        if sigma <= 0.0:
            raise DegeneratePool(f"task {task!r} pool has zero spread")
        focal_mean = float(np.mean(by_algo[focal]))
        scores.append((focal_mean - float(pooled.mean())) / sigma)
    if not scores:
        raise DegeneratePool("no tasks given")
    return float(np.mean(scores))


EXACT_ENUMERATION_LIMIT = 400  # n*m at or below this uses the exact null


@dataclass(frozen=True)
class RankSumVerdict:
    p: float
    verdict: str  # "+", "≈" or "-" from the first sample's point of view
    u_statistic: float


def wilcoxon_rank_sum(a, b, alpha: float = 0.05) -> RankSumVerdict:
    """Two-sided Mann-Whitney rank-sum comparison with a direction verdict.

    "+" means the first sample is significantly smaller (better under
    minimization), "-" significantly larger, "≈" no significant difference.
    Small tie-free samples use the exact null distribution; otherwise the
    normal approximation with tie correction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 3 or b.size < 3:
        raise ValueError("need at least three observations per sample")
    has_ties = len(np.unique(np.concatenate([a, b]))) < a.size + b.size
    method = "exact" if (a.size * b.size <= EXACT_ENUMERATION_LIMIT and not has_ties) else "asymptotic"
    res = stats.mannwhitneyu(a, b, alternative="two-sided", method=method)
    p = float(res.pvalue)
    if p >= alpha:
        verdict = "≈"
    else:
        # U1 below its null mean means sample a ranks lower.
        verdict = "+" if res.statistic < a.size * b.size / 2.0 else "-"
    return RankSumVerdict(p=p, verdict=verdict, u_statistic=float(res.statistic))


@dataclass(frozen=True)
class CorrelationTriple:
    pearson: float
    spearman: float
    kendall: float


def correlations(u, e) -> CorrelationTriple:
    """Pearson, Spearman (average-rank ties) and Kendall tau-b."""
    u = np.asarray(u, dtype=float)
    e = np.asarray(e, dtype=float)
    if u.shape != e.shape or u.size < 3:
        raise ValueError("need two equal-length samples of size >= 3")
    if u.std() == 0.0 or e.std() == 0.0:
        raise DegenerateVariance("constant sample has no defined correlation")
    pearson = float(stats.pearsonr(u, e).statistic)
    spearman = float(stats.spearmanr(u, e).statistic)
    kendall = float(stats.kendalltau(u, e, variant="b").statistic)
    return CorrelationTriple(pearson=pearson, spearman=spearman, kendall=kendall)


def average_ranks(table: np.ndarray) -> np.ndarray:
    """Mean rank of each column when rows are ranked ascending (1 = best).

    Ties share the average rank. Used for the "Average Rank" row of the
    comparison tables.
    """
    table = np.asarray(table, dtype=float)
    ranks = np.apply_along_axis(stats.rankdata, 1, table)
    return ranks.mean(axis=0)


def verdict_counts(verdicts) -> str:
    """Summary string in the +/≈/- table convention."""
    vs = list(verdicts)
    return f"{vs.count('+')}/{vs.count('≈')}/{vs.count('-')}"


def is_close_enough(value: float, target: float, rel: float = 1e-9) -> bool:
    return math.isclose(value, target, rel_tol=rel, abs_tol=1e-12)
