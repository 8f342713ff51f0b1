import math

import numpy as np
import pytest

from surrokit.errors import LengthMismatch, ZeroProbabilityTarget
from surrokit.pwce import pwce_loss, pwce_weight, pwce_weights


class TestWeightSchedule:
    def test_structural_positions_are_double_alpha(self):
        for i in (1, 2, 3):
            assert pwce_weight(i, alpha=10, gamma=10) == 20.0

    def test_second_mantissa_digit_is_alpha(self):
        assert pwce_weight(4, alpha=10, gamma=10) == 10.0

    def test_final_position_gamma10(self):
        # i=12 is the last mantissa digit for gamma=10: 10 - 8*9/9 = 2.
        assert pwce_weight(12, alpha=10, gamma=10) == 2.0

    def test_fractional_decay_gamma15(self):
        assert pwce_weight(5, alpha=10, gamma=15) == pytest.approx(10 - 9 / 14)

    def test_floor_at_one(self):
        assert pwce_weight(100, alpha=10, gamma=10) == 1.0
        assert pwce_weight(4, alpha=10, gamma=1) == 1.0

    def test_monotone_nonincreasing_after_first_digit(self):
        for alpha, gamma in [(10, 10), (5, 15), (2, 4), (1.5, 30)]:
            ws = [pwce_weight(i, alpha, gamma) for i in range(3, gamma + 3)]
            assert all(a >= b for a, b in zip(ws, ws[1:]))
            assert min(ws) >= 1.0

    def test_full_schedule_length(self):
        assert len(pwce_weights(10, 10)) == 12


def _one_hot(size, idx):
    v = np.zeros(size)
    v[idx] = 1.0
    return v


class TestLoss:
    def test_zero_on_perfect_prediction(self):
        gamma = 4
        targets = [1, 2, 3, 4, 5, 6]
        dists = [_one_hot(8, t) for t in targets]
        assert pwce_loss(dists, targets, alpha=10, gamma=gamma) == 0.0

    def test_uniform_closed_form(self):
        gamma, size = 6, 11
        targets = list(range(gamma + 2))
        dists = [np.full(size, 1.0 / size) for _ in targets]
        expected = pwce_weights(10, gamma).sum() * math.log(size)
        assert pwce_loss(dists, targets, alpha=10, gamma=gamma) == pytest.approx(expected)

    def test_uniform_weights_match_plain_cross_entropy(self):
        rng = np.random.default_rng(3)
        gamma, size = 5, 9
        targets = rng.integers(0, size, size=gamma + 2)
        dists = rng.dirichlet(np.ones(size), size=gamma + 2)
        got = pwce_loss(dists, targets, alpha=10, gamma=gamma, force_uniform=True)
        plain = -sum(math.log(d[t]) for d, t in zip(dists, targets))
        assert got == pytest.approx(plain)

    def test_length_mismatch(self):
        dists = [_one_hot(4, 0)] * 3
        with pytest.raises(LengthMismatch):
            pwce_loss(dists, [0, 0], alpha=10, gamma=1)
        with pytest.raises(LengthMismatch):
            pwce_loss(dists, [0, 0, 0], alpha=10, gamma=5)

    def test_zero_probability_target_reports_position(self):
        gamma = 2
        dists = [_one_hot(4, 0) for _ in range(gamma + 2)]
        with pytest.raises(ZeroProbabilityTarget) as exc:
            pwce_loss(dists, [0, 0, 1, 0], alpha=10, gamma=gamma)
        assert exc.value.position == 3

    def test_nonnegative_and_zero_iff_certain(self):
        rng = np.random.default_rng(11)
        gamma, size = 3, 6
        for _ in range(50):
            targets = rng.integers(0, size, size=gamma + 2)
            dists = rng.dirichlet(np.ones(size) * 0.5, size=gamma + 2)
            dists = np.maximum(dists, 1e-12)
            dists /= dists.sum(axis=1, keepdims=True)
            loss = pwce_loss(dists, targets, alpha=7, gamma=gamma)
            assert loss > 0.0
