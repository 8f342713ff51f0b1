import itertools
import math

import numpy as np
import pytest

from surrokit.errors import (
    DegeneratePool,
    DegenerateRange,
    DegenerateVariance,
    ZeroBaseline,
)
from surrokit.metrics import (
    TaskErrorPair,
    average_ranks,
    correlations,
    mss,
    ptr_ntr,
    r2,
    smae,
    tcr,
    verdict_counts,
    wilcoxon_rank_sum,
)


class TestSmae:
    def test_perfect(self):
        assert smae([1, 2, 3], [1, 2, 3]) == 0.0

    def test_hand_value(self):
        assert smae([0, 10], [1, 9]) == pytest.approx(0.1)

    def test_affine_invariance(self):
        rng = np.random.default_rng(0)
        y = rng.uniform(0, 5, 30)
        p = y + rng.normal(0, 0.5, 30)
        base = smae(y, p)
        for a, b in [(2.0, 1.0), (0.5, -3.0), (7.5, 100.0)]:
            assert smae(a * y + b, a * p + b) == pytest.approx(base)

    def test_degenerate_range(self):
        with pytest.raises(DegenerateRange):
            smae([2.0, 2.0], [1.0, 3.0])

    def test_nonnegative(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            y = rng.normal(size=10)
            p = rng.normal(size=10)
            assert smae(y, p) >= 0.0


class TestR2:
    def test_perfect(self):
        assert r2([1, 2, 3], [1, 2, 3]) == 1.0

    def test_constant_mean_predictor(self):
        y = [1.0, 2.0, 3.0, 4.0]
        assert r2(y, [2.5] * 4) == pytest.approx(0.0)

    def test_hand_value(self):
        assert r2([1, 2, 3], [1, 2, 4]) == pytest.approx(0.5)

    def test_upper_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            y = rng.normal(size=12)
            p = rng.normal(size=12)
            assert r2(y, p) <= 1.0

    def test_degenerate_variance(self):
        with pytest.raises(DegenerateVariance):
            r2([5.0, 5.0, 5.0], [1.0, 2.0, 3.0])


class TestTcr:
    def test_published_macro_value(self):
        # 20-D macro row: 0.129 -> 0.075 is a 41.86% relative reduction
        # (the displayed +41.6% comes from the unrounded column averages).
        assert tcr(TaskErrorPair(0.129, 0.075)) == pytest.approx(0.4186046, abs=1e-6)
        assert tcr(TaskErrorPair(0.129, 0.075)) == pytest.approx(0.416, abs=0.005)

    def test_equal_errors(self):
        assert tcr(TaskErrorPair(0.5, 0.5)) == 0.0

    def test_zero_baseline(self):
        with pytest.raises(ZeroBaseline):
            tcr(TaskErrorPair(0.0, 0.1))

    def test_ptr_ntr_all_positive(self):
        ptr, ntr = ptr_ntr([0.1, 0.4, 0.9])
        assert (ptr, ntr) == (1.0, 0.0)

    def test_ptr_ntr_sum_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            vals = rng.normal(size=24)
            ptr, ntr = ptr_ntr(vals)
            assert ptr + ntr == 1.0


class TestMss:
    def test_zero_when_focal_matches_pool_mean(self):
        finals = {
            "t1": {"A": [1.0, 3.0], "B": [0.0, 4.0]},
            "t2": {"A": [10.0, 12.0], "B": [9.0, 13.0]},
        }
        assert mss(finals, "A") == pytest.approx(0.0)

    def test_two_algorithm_antisymmetry(self):
        rng = np.random.default_rng(4)
        finals = {
            f"t{i}": {"A": list(rng.normal(size=5)), "B": list(rng.normal(size=5))}
            for i in range(4)
        }
        assert mss(finals, "A") == pytest.approx(-mss(finals, "B"))

    def test_matches_pooling_oracle(self):
        finals = {
            "t1": {"A": [1.0, 2.0], "B": [3.0], "C": [0.5, 0.5, 4.0]},
            "t2": {"A": [5.0], "B": [7.0, 9.0], "C": [6.0]},
            "t3": {"A": [0.1, 0.2], "B": [0.3], "C": [0.0]},
        }
        # Brute-force standardization oracle.
        expect = []
        for task in finals.values():
            pool = [v for runs in task.values() for v in runs]
            mu = sum(pool) / len(pool)
            sd = math.sqrt(sum((v - mu) ** 2 for v in pool) / len(pool))
            focal = sum(task["A"]) / len(task["A"])
            expect.append((focal - mu) / sd)
        assert mss(finals, "A") == pytest.approx(sum(expect) / len(expect))

    def test_degenerate_pool(self):
        with pytest.raises(DegeneratePool):
            mss({"t1": {"A": [1.0], "B": []}}, "A")
        with pytest.raises(DegeneratePool):
            mss({"t1": {"A": [2.0, 2.0], "B": [2.0]}}, "A")


def exact_rank_sum_p(a, b):
    """Exhaustive two-sided p: enumerate every assignment of pooled ranks."""
    pooled = sorted(a + b)
    n = len(a)
    positions = {v: i + 1 for i, v in enumerate(pooled)}  # no ties assumed
    observed = sum(positions[v] for v in a)
    mean = n * (len(pooled) + 1) / 2
    count = 0
    total = 0
    for combo in itertools.combinations(range(1, len(pooled) + 1), n):
        total += 1
        if abs(sum(combo) - mean) >= abs(observed - mean) - 1e-12:
            count += 1
    return count / total


class TestWilcoxon:
    def test_identical_samples_tie(self):
        res = wilcoxon_rank_sum([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert res.verdict == "≈"

    def test_exact_three_vs_three(self):
        a, b = [1.0, 2.0, 3.0], [10.0, 11.0, 12.0]
        res = wilcoxon_rank_sum(a, b)
        assert res.p == pytest.approx(exact_rank_sum_p(a, b))
        assert res.p == pytest.approx(0.1)

    def test_exact_against_enumeration_fuzz(self):
        rng = np.random.default_rng(5)
        for _ in range(15):
            a = list(np.round(rng.normal(0, 1, 5), 6))
            b = list(np.round(rng.normal(0.5, 1, 4), 6))
            res = wilcoxon_rank_sum(a, b)
            assert res.p == pytest.approx(exact_rank_sum_p(a, b), abs=1e-12)

    def test_verdict_antisymmetry(self):
        rng = np.random.default_rng(6)
        a = list(rng.normal(0, 1, 10))
        b = list(rng.normal(3, 1, 10))
        fwd = wilcoxon_rank_sum(a, b)
        rev = wilcoxon_rank_sum(b, a)
        assert fwd.verdict == "+"
        assert rev.verdict == "-"
        assert fwd.p == pytest.approx(rev.p)

    def test_exact_vs_normal_approx_agreement(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n, m = rng.integers(8, 21, size=2)
            a = rng.normal(0, 1, n)
            b = rng.normal(rng.uniform(-1, 1), 1, m)
            from scipy import stats

            exact = stats.mannwhitneyu(a, b, alternative="two-sided", method="exact")
            approx = stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
            assert abs(exact.pvalue - approx.pvalue) <= 0.02

    def test_minimum_sizes(self):
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([1.0, 2.0], [1.0, 2.0, 3.0])


def kendall_tau_b_oracle(u, e):
    """O(n^2) pair counting with tie corrections."""
    n = len(u)
    concordant = discordant = ties_u = ties_e = 0
    for i in range(n):
        for j in range(i + 1, n):
            du = u[i] - u[j]
            de = e[i] - e[j]
            if du == 0 and de == 0:
                ties_u += 1
                ties_e += 1
            elif du == 0:
                ties_u += 1
            elif de == 0:
                ties_e += 1
            elif du * de > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) / 2
    denom = math.sqrt((n0 - ties_u) * (n0 - ties_e))
    return (concordant - discordant) / denom


class TestCorrelations:
    def test_identity(self):
        vals = [1.0, 2.0, 3.0, 4.0]
        trip = correlations(vals, vals)
        assert trip.pearson == pytest.approx(1.0)
        assert trip.spearman == pytest.approx(1.0)
        assert trip.kendall == pytest.approx(1.0)

    def test_negation(self):
        vals = np.array([1.0, 2.0, 3.0, 4.0])
        trip = correlations(vals, -vals)
        assert trip.pearson == pytest.approx(-1.0)
        assert trip.spearman == pytest.approx(-1.0)
        assert trip.kendall == pytest.approx(-1.0)

    def test_kendall_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(5, 15))
            u = list(rng.integers(0, 6, n).astype(float))  # ties likely
            e = list(rng.integers(0, 6, n).astype(float))
            if len(set(u)) < 2 or len(set(e)) < 2:
                continue
            trip = correlations(u, e)
            assert trip.kendall == pytest.approx(kendall_tau_b_oracle(u, e), abs=1e-12)

    def test_spearman_is_pearson_on_average_ranks(self):
        from scipy.stats import rankdata

        rng = np.random.default_rng(9)
        u = rng.normal(size=40)
        e = u + rng.normal(scale=0.5, size=40)
        trip = correlations(u, e)
        ru, re = rankdata(u), rankdata(e)
        pearson_on_ranks = correlations(ru, re).pearson
        assert trip.spearman == pytest.approx(pearson_on_ranks)

    def test_spearman_monotone_invariance(self):
        rng = np.random.default_rng(10)
        u = rng.uniform(0.1, 5, 30)
        e = rng.uniform(0.1, 5, 30)
        base = correlations(u, e).spearman
        assert correlations(np.exp(u), e).spearman == pytest.approx(base)
        assert correlations(u, np.log(e)).spearman == pytest.approx(base)

    def test_five_point_hand_dataset(self):
        u = [1.0, 2.0, 3.0, 4.0, 5.0]
        e = [1.0, 3.0, 2.0, 5.0, 4.0]
        trip = correlations(u, e)
        assert trip.kendall == pytest.approx(kendall_tau_b_oracle(u, e))
        assert trip.kendall == pytest.approx(0.6)
        assert trip.spearman == pytest.approx(0.8)

    def test_degenerate(self):
        with pytest.raises(DegenerateVariance):
            correlations([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            u = rng.normal(size=10)
            e = rng.normal(size=10)
            trip = correlations(u, e)
            assert -1.0 <= trip.spearman <= 1.0
            assert -1.0 <= trip.kendall <= 1.0


class TestHelpers:
    def test_average_ranks(self):
        table = np.array([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0], [1.0, 2.0, 3.0]])
        ranks = average_ranks(table)
        assert ranks.tolist() == [pytest.approx(5 / 3), 2.0, pytest.approx(7 / 3)]

    def test_verdict_counts(self):
        assert verdict_counts(["+", "+", "≈", "-"]) == "2/1/1"
