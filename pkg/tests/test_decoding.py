import itertools
import math

import numpy as np
import pytest

from surrokit.decoding import (
    RecordedSource,
    Temperature,
    TopK,
    TopP,
    beam_decode,
    fixed_sequence_source,
    greedy_decode,
    sample_decode,
)


def hashed_source(vocab_size: int, seed: int):
    """Deterministic prefix-dependent random distributions."""

    def src(prefix):
        rng = np.random.default_rng(hash((seed,) + tuple(prefix)) % (2**32))
        probs = rng.dirichlet(np.ones(vocab_size))
        return probs

    return src


def one_hot_source(sequence, vocab_size):
    def src(prefix):
        t = len(prefix)
        v = np.zeros(vocab_size)
        v[sequence[t] if t < len(sequence) else sequence[-1]] = 1.0
        return v

    return src


class TestGreedy:
    def test_one_hot_sequence_reproduced(self):
        seq = [3, 1, 4, 1, 5]
        src = one_hot_source(seq, 8)
        assert greedy_decode(src, max_len=5) == seq

    def test_stops_at_end_marker(self):
        seq = [3, 7, 2]
        src = one_hot_source(seq + [7], 8)
        assert greedy_decode(src, max_len=10, end_id=2) == [3, 7, 2]

    def test_tie_breaks_to_lowest_id(self):
        def src(prefix):
            return np.array([0.25, 0.25, 0.25, 0.25])

        assert greedy_decode(src, max_len=3) == [0, 0, 0]

    def test_equals_beam_width_one(self):
        for seed in range(100):
            src = hashed_source(5, seed)
            greedy = greedy_decode(src, max_len=4)
            beam = beam_decode(src, width=1, max_len=4)
            assert beam[0][0] == greedy


class TestBeam:
    def test_two_step_toy(self):
        def src(prefix):
            return np.array([0.6, 0.4])

        hyps = beam_decode(src, width=2, max_len=2)
        assert hyps[0][0] == [0, 0]
        assert math.exp(hyps[0][1]) == pytest.approx(0.36)
        assert hyps[1][0] in ([0, 1], [1, 0])
        assert math.exp(hyps[1][1]) == pytest.approx(0.24)

    def test_matches_exhaustive_enumeration(self):
        vocab, length = 4, 3
        for seed in range(10):
            src = hashed_source(vocab, seed)
            all_seqs = []
            for seq in itertools.product(range(vocab), repeat=length):
                logp = 0.0
                for t in range(length):
                    logp += math.log(src(seq[:t])[seq[t]])
                all_seqs.append((logp, seq))
            all_seqs.sort(key=lambda c: (-c[0], c[1]))

            hyps = beam_decode(src, width=vocab**length, max_len=length)
            assert len(hyps) == len(all_seqs)
            for (ids, score), (logp, seq) in zip(hyps, all_seqs):
                assert tuple(ids) == seq
                assert score == pytest.approx(logp)

    def test_top_hypothesis_at_least_greedy(self):
        for seed in range(30):
            src = hashed_source(6, seed)
            greedy = greedy_decode(src, max_len=5)
            greedy_logp = 0.0
            for t in range(len(greedy)):
                greedy_logp += math.log(src(tuple(greedy[:t]))[greedy[t]])
            top = beam_decode(src, width=4, max_len=5)[0]
            assert top[1] >= greedy_logp - 1e-12

    def test_zero_probability_paths_pruned(self):
        src = one_hot_source([2, 1], 4)
        hyps = beam_decode(src, width=3, max_len=2)
        assert len(hyps) == 1
        assert hyps[0][0] == [2, 1]


class TestSampling:
    def test_temperature_zero_is_greedy(self):
        src = hashed_source(5, 1)
        assert sample_decode(src, Temperature(0.0), seed=9, max_len=4) == greedy_decode(
            src, max_len=4
        )

    def test_reproducible_given_seed(self):
        src = hashed_source(5, 2)
        a = sample_decode(src, TopK(3), seed=42, max_len=6)
        b = sample_decode(src, TopK(3), seed=42, max_len=6)
        assert a == b

    def test_full_top_k_matches_source_within_3_sigma(self):
        probs = np.array([0.5, 0.25, 0.15, 0.1])
        n = 100_000

        def src(prefix):
            return probs

        ids = sample_decode(src, TopK(4), seed=7, max_len=n)
        counts = np.bincount(ids, minlength=4)
        for v in range(4):
            sigma = math.sqrt(n * probs[v] * (1 - probs[v]))
            assert abs(counts[v] - n * probs[v]) <= 3 * sigma

    def test_top_p_one_equals_full_sampling(self):
        probs = np.array([0.4, 0.3, 0.2, 0.1])

        def src(prefix):
            return probs

        a = sample_decode(src, TopP(1.0), seed=5, max_len=50)
        b = sample_decode(src, TopK(4), seed=5, max_len=50)
        assert a == b

    def test_top_k_truncates_support(self):
        probs = np.array([0.5, 0.3, 0.15, 0.05])

        def src(prefix):
            return probs

        ids = sample_decode(src, TopK(2), seed=3, max_len=2000)
        assert set(ids) <= {0, 1}

    def test_top_p_truncates_support(self):
        probs = np.array([0.55, 0.3, 0.1, 0.05])

        def src(prefix):
            return probs

        ids = sample_decode(src, TopP(0.6), seed=3, max_len=2000)
        # 0.55 alone does not reach 0.6, so the nucleus is {0, 1}.
        assert set(ids) <= {0, 1}

    def test_temperature_flattens(self):
        probs = np.array([0.7, 0.2, 0.1])

        def src(prefix):
            return probs

        hot = sample_decode(src, Temperature(50.0), seed=11, max_len=30_000)
        freq = np.bincount(hot, minlength=3) / len(hot)
        assert freq.max() < 0.45  # near uniform at high temperature


class TestSources:
    def test_recorded_source_captures_steps(self):
        src = RecordedSource(hashed_source(4, 0))
        greedy_decode(src, max_len=3)
        assert len(src.steps) == 3
        for step in src.steps:
            assert step.sum() == pytest.approx(1.0, abs=1e-9)

    def test_fixed_sequence_source_tail(self):
        dists = [np.array([0.0, 1.0, 0.0]), np.array([0.5, 0.25, 0.25])]
        src = fixed_sequence_source(dists, after_id=2, vocab_size=3)
        assert np.argmax(src(())) == 1
        assert src((1, 0))[2] == 1.0

    def test_invalid_distribution_rejected(self):
        def bad(prefix):
            return np.array([0.5, 0.6])

        with pytest.raises(ValueError):
            greedy_decode(bad, max_len=1)
