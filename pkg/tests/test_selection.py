import time

import numpy as np
import pytest

from pairnet.errors import DegenerateSearchError
from pairnet.partition import PartitionSpec, even_grid
from pairnet.selection import CandidateScore, SearchConfig, evaluate, random_search
from pairnet.training import fit_bank, training_mse


def make_data(seed=0, n_samples=800, n_inputs=2):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n_samples, n_inputs))
    y = np.sin(4 * X[:, 0]) + X[:, -1] ** 2 + 0.05 * rng.normal(size=n_samples)
    return X, y


class TestSearchConfig:
    def test_broadcast_single_choice_tuple(self):
        cfg = SearchConfig(n_candidates=3, interval_choices=(1, 2))
        assert cfg.choices_for_axes(3) == ((1, 2), (1, 2), (1, 2))

    def test_per_axis_choices_kept(self):
        cfg = SearchConfig(n_candidates=1, interval_choices=((1,), (2, 3)))
        assert cfg.choices_for_axes(2) == ((1,), (2, 3))
        with pytest.raises(ValueError):
            cfg.choices_for_axes(3)

    def test_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(n_candidates=0, interval_choices=(1,))
        with pytest.raises(ValueError):
            SearchConfig(n_candidates=1, interval_choices=(1,), holdout=0.7)
        with pytest.raises(ValueError):
            SearchConfig(n_candidates=1, interval_choices=(0,))
        with pytest.raises(ValueError):
            SearchConfig(n_candidates=1, interval_choices=(1,), grid_mode="magic")


class TestRandomSearch:
    def test_single_allowed_grid_wins(self):
        X, y = make_data()
        cfg = SearchConfig(n_candidates=1, interval_choices=(2,), grid_mode="even", seed=5)
        bank, leaderboard = random_search(X, y, cfg)
        assert len(leaderboard) == 2
        assert bank.partition.shape == (2, 2)
        assert leaderboard[0].partition.shape == (2, 2)

    def test_leaderboard_sorted_best_first(self):
        X, y = make_data(seed=1)
        cfg = SearchConfig(n_candidates=8, interval_choices=(1, 2, 3), seed=9)
        bank, leaderboard = random_search(X, y, cfg)
        scores = [entry.score for entry in leaderboard]
        assert scores == sorted(scores)
        assert all(isinstance(entry, CandidateScore) for entry in leaderboard)
        assert leaderboard[0].score <= min(scores)
        assert [entry.rank for entry in leaderboard] == list(range(len(leaderboard)))

    def test_deterministic_given_seed(self):
        X, y = make_data(seed=2)
        cfg = SearchConfig(n_candidates=6, interval_choices=(1, 2), grid_mode="uniform", seed=3)
        first_bank, first_board = random_search(X, y, cfg)
        second_bank, second_board = random_search(X, y, cfg)
        assert [(e.index, e.score) for e in first_board] == [
            (e.index, e.score) for e in second_board
        ]
        probes = np.random.default_rng(0).uniform(size=(50, 2))
        np.testing.assert_array_equal(first_bank.predict(probes), second_bank.predict(probes))

    def test_ties_prefer_earlier_candidate(self):
        X, y = make_data(seed=3)
        # every candidate is the identical even grid, so all scores tie
        cfg = SearchConfig(n_candidates=4, interval_choices=(2,), grid_mode="even", seed=1)
        _, leaderboard = random_search(X, y, cfg)
        assert leaderboard[0].index == 0

    def test_monotone_running_best(self):
        X, y = make_data(seed=4)
        cfg = SearchConfig(n_candidates=10, interval_choices=(1, 2, 3, 4), seed=11)
        _, leaderboard = random_search(X, y, cfg)
        by_index = sorted(leaderboard, key=lambda e: e.index)
        best_so_far = np.inf
        bests = []
        for entry in by_index:
            best_so_far = min(best_so_far, entry.score)
            bests.append(best_so_far)
        assert all(b1 >= b2 for b1, b2 in zip(bests, bests[1:]))
        assert leaderboard[0].score == bests[-1]

    def test_holdout_is_chronological_tail(self):
        X, y = make_data(seed=5, n_samples=100)
        cfg = SearchConfig(
            n_candidates=1, interval_choices=(1,), grid_mode="even", holdout=0.2, seed=0
        )
        bank, leaderboard = random_search(X, y, cfg)
        # score must equal the MSE of a tail-trained bank on the last 20 rows
        reference = fit_bank(X[:80], y[:80], bank.partition)
        assert abs(leaderboard[0].score - training_mse(reference, X[80:], y[80:])) <= 1e-15

    def test_train_mse_mode_matches_training_mse(self):
        X, y = make_data(seed=6, n_samples=200)
        cfg = SearchConfig(
            n_candidates=1, interval_choices=(2,), grid_mode="even", holdout=None, seed=0
        )
        bank, leaderboard = random_search(X, y, cfg)
        assert abs(leaderboard[0].score - training_mse(bank, X, y)) <= 1e-15


class TestEvaluate:
    def test_zero_on_self_generated(self):
        X, y = make_data(seed=7)
        spec = PartitionSpec(tuple(even_grid(0, 1, 2) for _ in range(2)))
        bank = fit_bank(X, y, spec)
        assert evaluate(bank, X, bank.predict(X)) <= 1e-12

    def test_hand_computed_three_samples(self):
        spec = PartitionSpec((even_grid(0.0, 1.0, 1),))
        train_x = np.array([[0.2], [0.5], [0.8]])
        bank = fit_bank(train_x, np.full(3, 2.0), spec)
        # constant bank predicts 2.0; errors 1, 0, 4 -> MSE 5/3
        mse = evaluate(bank, train_x, np.array([1.0, 2.0, 4.0]))
        assert abs(mse - 5.0 / 3.0) <= 1e-6

    def test_empty_rejected(self):
        X, y = make_data(seed=8)
        spec = PartitionSpec(tuple(even_grid(0, 1, 1) for _ in range(2)))
        bank = fit_bank(X, y, spec)
        with pytest.raises(ValueError):
            evaluate(bank, np.empty((0, 2)), np.empty(0))


def test_all_candidates_degenerate_raises():
    # a constant series gives every axis a zero-width box, so no candidate
    # can build a valid grid
    X = np.full((50, 2), 3.0)
    y = np.zeros(50)
    cfg = SearchConfig(n_candidates=3, interval_choices=(2,), grid_mode="even", seed=0)
    with pytest.raises(DegenerateSearchError):
        random_search(X, y, cfg)


def test_paper_scale_search_completes():
    rng = np.random.default_rng(10)
    length = 16188
    t = np.arange(length)
    values = 5.0 + 4.0 * np.sin(2 * np.pi * t / 40.0) + rng.normal(0, 1.2, size=length)
    X = np.column_stack([values[:-3], values[1:-2], values[2:-1]])
    y = values[3:]
    cfg = SearchConfig(n_candidates=200, interval_choices=(1, 2), grid_mode="quantile", seed=0)
    started = time.perf_counter()
    bank, leaderboard = random_search(X, y, cfg)
    elapsed = time.perf_counter() - started
    assert len(leaderboard) == 201
    assert bank.partition.n == 3
    print(f"\nK=200 search over 16,185 samples: {elapsed:.1f} s")
