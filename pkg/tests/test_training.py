"""Tests for the optimizer, training loop, metrics and evaluation reports."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from bstlab.core.config import GenConfig, ModelKind, TrainConfig
from bstlab.core.errors import ConfigError, DataFormatError, MetricError, OptimizerError
from bstlab.data.synth import generate_dataset
from bstlab.models import init_params, predict
from bstlab.tensor import Tensor
from bstlab.train import (
    AdamState,
    EvalReport,
    adam_step,
    auc,
    evaluate,
    logloss,
    read_metrics_csv,
    train,
    write_loss_log,
    write_metrics_csv,
)


@pytest.fixture
def separable(make_example):
    """Clicks determined by gender alone."""
    return [make_example([(1, 1, 900)], gender=g, label=int(g == 1)) for g in [1, 2] * 20]


class TestAdam:
    """Tests for adam_step."""

    def test_first_step_moves_by_learning_rate(self):
        """Test that bias correction makes step one equal lr * sign(grad)."""
        w = Tensor.param("w", [[1.0, -2.0]])
        adam_step({"w": w}, {"w": np.array([[0.5, -3.0]])}, AdamState(), TrainConfig(lr=0.1))
        assert_allclose(w.numpy(), [[0.9, -1.9]], atol=1e-7)

    def test_state_advances(self):
        """Test step count and moment bookkeeping."""
        w = Tensor.param("w", [[0.0]])
        state = AdamState()
        for _ in range(3):
            adam_step({"w": w}, {"w": np.array([[1.0]])}, state, TrainConfig(lr=0.01))
        assert state.t == 3
        assert_allclose(state.m["w"], [[1.0 - 0.9**3]])

    def test_non_finite_gradient_leaves_params(self):
        """Test that a NaN anywhere aborts before any update."""
        a = Tensor.param("a", [[1.0]])
        b = Tensor.param("b", [[1.0]])
        grads = {"a": np.array([[0.5]]), "b": np.array([[np.nan]])}
        with pytest.raises(OptimizerError) as exc:
            adam_step({"a": a, "b": b}, grads, AdamState(), TrainConfig(lr=0.1))
        assert exc.value.param_name == "b"
        assert a.numpy()[0, 0] == 1.0 and b.numpy()[0, 0] == 1.0


class TestTrain:
    """Tests for the training loop."""

    def test_zero_learning_rate_keeps_params(self, model_config, examples):
        """Test that lr = 0 leaves every parameter unchanged."""
        config = model_config(ModelKind.BST)
        initial = init_params(config).snapshot()
        params, _ = train(examples, config, TrainConfig(epochs=2, batch_size=2, lr=0.0))
        for name, value in params.snapshot().items():
            assert_array_equal(value, initial[name])

    def test_learns_separable_signal(self, model_config, separable):
        """Test WDL fits a signal carried by one other-feature field."""
        config = model_config(ModelKind.WDL)
        params, history = train(separable, config, TrainConfig(epochs=20, batch_size=8, lr=0.01))
        assert len(history) == 20
        assert history[-1] < history[0]
        scores = predict(separable, params)
        assert auc(scores, [e.label for e in separable]) == 1.0

    def test_deterministic(self, model_config, examples):
        """Test equal seeds give bit-identical parameters, dropout included."""
        config = model_config(ModelKind.BST)
        train_config = TrainConfig(epochs=2, batch_size=2, lr=0.01, seed=9)
        a, loss_a = train(examples, config, train_config)
        b, loss_b = train(examples, config, train_config)
        assert loss_a == loss_b
        for name, value in a.snapshot().items():
            assert_array_equal(value, b.snapshot()[name])

    def test_epoch_callback(self, model_config, examples):
        """Test the callback sees every epoch and its loss."""
        seen = []
        _, history = train(
            examples,
            model_config(ModelKind.WDL_SEQ),
            TrainConfig(epochs=3, batch_size=2),
            on_epoch=lambda epoch, loss: seen.append((epoch, loss)),
        )
        assert seen == list(zip([1, 2, 3], history))

    def test_empty_data_rejected(self, model_config):
        """Test that training on nothing fails."""
        with pytest.raises(ConfigError):
            train([], model_config(ModelKind.WDL), TrainConfig())


class TestAuc:
    """Tests for the rank-sum AUC."""

    def test_perfect_and_reversed(self):
        """Test the extremes."""
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_ties_count_half(self):
        """Test that constant scores give 0.5."""
        assert auc([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_hand_case(self):
        """Test a mixed ranking."""
        assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_matches_pair_counting(self):
        """Test against brute-force pair counting on 200 tied-heavy scores."""
        rng = np.random.default_rng(0)
        scores = rng.integers(0, 20, size=200) / 20.0
        labels = rng.integers(0, 2, size=200)
        pos, neg = scores[labels == 1], scores[labels == 0]
        pairs = list(itertools.product(pos, neg))
        expected = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in pairs) / len(pairs)
        assert auc(scores, labels) == pytest.approx(expected, abs=1e-12)

    def test_monotone_invariance(self):
        """Test that a strictly increasing transform keeps AUC."""
        rng = np.random.default_rng(1)
        scores = rng.normal(size=100)
        labels = rng.integers(0, 2, size=100)
        assert auc(np.exp(scores), labels) == pytest.approx(auc(scores, labels))

    def test_single_class_rejected(self):
        """Test that AUC needs both classes."""
        with pytest.raises(MetricError):
            auc([0.2, 0.7], [1, 1])

    def test_length_mismatch_rejected(self):
        """Test scores and labels must align."""
        with pytest.raises(MetricError):
            auc([0.2, 0.7, 0.1], [1, 0])


class TestLogloss:
    """Tests for clamped log-loss."""

    def test_uninformative(self):
        """Test p = 0.5 gives ln 2."""
        assert logloss([0.5] * 4, [0, 1, 1, 0]) == pytest.approx(np.log(2.0))

    def test_clamped(self):
        """Test a confident miss stays finite."""
        value = logloss([0.0, 1.0], [1, 0])
        assert value == pytest.approx(-np.log(1e-12), rel=1e-4)

    def test_base_rate_predictor_scores_label_entropy(self, rng):
        """Test that predicting the base rate everywhere costs the label entropy."""
        labels = (rng.random(5000) < 0.3).astype(int)
        rate = labels.mean()
        entropy = -(rate * np.log(rate) + (1 - rate) * np.log(1 - rate))
        assert abs(logloss(np.full(labels.size, rate), labels) - entropy) < 1e-6

    def test_empty_rejected(self):
        """Test that an empty set has no log-loss."""
        with pytest.raises(MetricError):
            logloss([], [])


class TestEvaluate:
    """Tests for evaluation reports and their files."""

    def test_report_without_bench(self, model_config, examples):
        """Test metrics are filled and RT fields left empty."""
        config = model_config(ModelKind.DIN_LITE)
        report = evaluate(init_params(config), config, examples)
        assert report.model == "DIN-lite"
        assert report.n_examples == 3
        assert 0.0 <= report.auc <= 1.0 and report.logloss > 0.0
        assert report.rt_mean_ms is None and report.rt_p95_ms is None

    def test_report_with_bench(self, model_config, examples):
        """Test that benchmarking fills RT fields."""
        config = model_config(ModelKind.BST)
        report = evaluate(init_params(config), config, examples, bench=True, repetitions=2)
        assert report.rt_mean_ms > 0.0
        assert report.rt_p95_ms >= 0.0

    def test_metrics_csv_round_trip(self, temp_dir):
        """Test that written reports read back at printed precision."""
        reports = [
            EvalReport(model="WDL", auc=0.61234567, logloss=0.6, n_examples=10),
            EvalReport(model="BST(b=1)", auc=0.7, logloss=0.55, rt_mean_ms=1.5, rt_p95_ms=2.25, n_examples=10),
        ]
        back = read_metrics_csv(write_metrics_csv(reports, temp_dir / "metrics.csv"))
        assert [r.model for r in back] == ["WDL", "BST(b=1)"]
        assert back[0].auc == pytest.approx(0.612346)
        assert back[0].rt_mean_ms is None
        assert back[1].rt_p95_ms == 2.25

    def test_metrics_csv_bad_header(self, temp_dir):
        """Test that a foreign CSV is rejected."""
        path = temp_dir / "metrics.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataFormatError):
            read_metrics_csv(path)

    def test_loss_log(self, temp_dir):
        """Test one row per epoch."""
        path = write_loss_log([0.7, 0.5], temp_dir / "loss.csv")
        assert path.read_text().splitlines() == ["epoch,loss", "1,0.7", "2,0.5"]


class TestNoSignal:
    """Scores on labels that carry no information."""

    @pytest.fixture(scope="class")
    def noise_data(self):
        gen = GenConfig(
            n_users=40,
            n_items=8,
            n_categories=4,
            n_genders=2,
            n_cities=3,
            seq_len_max=8,
            mean_gap_seconds=30.0,
            noise=0.499,
            n_train=1000,
            n_test=10000,
            seed=21,
        )
        return generate_dataset(gen)

    def test_random_init_scores_chance(self, model_config, noise_data):
        """Test an untrained model on balanced labels lands at AUC 0.5 +- 0.05."""
        _, test = noise_data
        config = model_config(ModelKind.BST)
        report = evaluate(init_params(config), config, test)
        assert report.n_examples == 10000
        assert abs(report.auc - 0.5) <= 0.05

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_trained_models_score_chance(self, model_config, noise_data, kind):
        """Test that training on pure-noise labels cannot beat chance on the test split."""
        train_data, test = noise_data
        config = model_config(kind)
        params, _ = train(train_data, config, TrainConfig(epochs=1, batch_size=32, lr=0.01, seed=2))
        assert 0.48 <= evaluate(params, config, test).auc <= 0.52
