"""Tests for the synthetic data generator."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from bstlab.core.config import GenConfig
from bstlab.core.errors import GeneratorError
from bstlab.data import click_probability, generate_dataset, recency_weights, synthesize
from bstlab.train.metrics import auc


class TestGenerateDataset:
    """Tests for dataset structure."""

    def test_deterministic(self, tiny_gen):
        """Test identical seeds give identical datasets."""
        assert generate_dataset(tiny_gen) == generate_dataset(tiny_gen)

    def test_seed_changes_data(self, tiny_gen):
        """Test different seeds give different datasets."""
        other = tiny_gen.model_copy(update={"seed": 4})
        assert generate_dataset(tiny_gen)[0] != generate_dataset(other)[0]

    def test_sizes_and_lengths(self, tiny_gen):
        """Test requested counts and history length range."""
        train, test = generate_dataset(tiny_gen)
        assert len(train) == 160 and len(test) == 80
        lengths = [len(e.history) for e in train + test]
        assert min(lengths) >= 1 and max(lengths) <= 8

    def test_timestamps_ordered(self, tiny_gen):
        """Test strictly increasing history times ending before the request."""
        train, _ = generate_dataset(tiny_gen)
        for example in train:
            times = [e.timestamp for e in example.history]
            assert all(a < b for a, b in zip(times, times[1:]))
            assert times[-1] < example.request_time

    def test_users_disjoint(self, tiny_gen):
        """Test that no user appears on both sides of the split."""
        train, test = generate_dataset(tiny_gen)
        assert not {e.user_id for e in train} & {e.user_id for e in test}

    def test_ids_within_vocabulary(self, tiny_gen):
        """Test every emitted id is a real 1-based id."""
        train, _ = generate_dataset(tiny_gen)
        for example in train:
            for event in [*example.history, example.target]:
                assert 1 <= event.item_id <= tiny_gen.n_items
                assert 1 <= event.category_id <= tiny_gen.n_categories
            assert 1 <= example.other_features["city"] <= tiny_gen.n_cities
            assert set(example.other_features) == set(tiny_gen.field_cardinalities())

    def test_infeasible_split_rejected(self, tiny_gen):
        """Test that a split leaving no train users fails."""
        gen = tiny_gen.model_copy(update={"n_users": 2, "test_user_fraction": 0.9})
        with pytest.raises(GeneratorError):
            generate_dataset(gen)


class TestClickSignal:
    """Tests for the planted click probability."""

    def test_recency_weights(self):
        """Test normalized weights decaying by exp(-lambda) per step."""
        w = recency_weights(4, 0.5)
        assert_allclose(w.sum(), 1.0)
        assert_allclose(w[1:] / w[:-1], np.exp(-0.5))

    def test_click_probability_hand_case(self):
        """Test a single-event history hitting a certain transition."""
        chain = np.zeros((3, 3))
        chain[1, 2] = 1.0
        gen = GenConfig(sharpness=10.0, threshold=0.3)
        p = click_probability(chain, np.array([1]), 2, gen)
        assert p == pytest.approx(1.0 / (1.0 + np.exp(-7.0)))
        assert click_probability(chain, np.array([1]), 1, gen) == pytest.approx(1.0 / (1.0 + np.exp(3.0)))

    def test_positive_rate_matches_expectation(self):
        """Test observed label rate against the latent mean over 10^4 examples."""
        gen = GenConfig(n_users=300, seq_len_max=10, n_train=8000, n_test=2000, seed=11)
        data = synthesize(gen)
        labels = [e.label for e in data.train + data.test]
        assert abs(np.mean(labels) - data.stats.expected_positive_rate) < 0.02

    def test_oracle_separates_clean_labels(self):
        """Test the latent probability ranks labels almost perfectly without noise."""
        gen = GenConfig(
            n_users=200,
            n_items=50,
            n_categories=10,
            seq_len_max=10,
            alpha=1e-3,
            noise=0.0,
            sharpness=30.0,
            shared_weight=1.0,
            n_train=1500,
            n_test=500,
            seed=5,
        )
        data = synthesize(gen)
        latent = np.concatenate([data.train_latent, data.test_latent])
        labels = np.array([e.label for e in data.train + data.test])
        assert auc(latent, labels) >= 0.95

    def test_heavy_noise_removes_signal(self):
        """Test that eta close to 1/2 leaves no usable signal."""
        gen = GenConfig(n_users=200, seq_len_max=10, noise=0.499, n_train=3000, n_test=1000, seed=6)
        data = synthesize(gen)
        latent = np.concatenate([data.train_latent, data.test_latent])
        labels = np.array([e.label for e in data.train + data.test])
        assert abs(auc(latent, labels) - 0.5) < 0.05
        assert_allclose(latent, 0.5, atol=0.002)

    def test_in_pattern_share(self, tiny_gen):
        """Test the in-pattern target share follows the configured rate."""
        gen = tiny_gen.model_copy(update={"in_pattern_rate": 1.0})
        assert synthesize(gen).stats.in_pattern_share == 1.0
        gen = tiny_gen.model_copy(update={"in_pattern_rate": 0.0})
        assert synthesize(gen).stats.in_pattern_share == 0.0
