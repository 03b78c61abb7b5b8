"""Tests for the predictors, their parameters and dispatch."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from bstlab.core.config import BlockConfig, ModelConfig, ModelKind, RunConfig
from bstlab.core.errors import ConfigError, ShapeError
from bstlab.data.synth import generate_dataset
from bstlab.features.embedding import embed_slots, embed_target, encode_examples
from bstlab.models import (
    ModelParams,
    din_attention,
    expected_shapes,
    get_forward,
    init_params,
    mlp_head,
    predict,
    wdl_seq_forward,
)
from bstlab.models.gradients import check_model_gradients, toy_schema
from bstlab.models.params import DIN_ATTENTION
from bstlab.tensor import Tensor


class TestParams:
    """Tests for parameter naming and initialisation."""

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_init_matches_expected_shapes(self, model_config, kind):
        """Test init_params creates exactly the expected tensors."""
        config = model_config(kind)
        params = init_params(config)
        assert {name: t.shape for name, t in params.tensors.items()} == expected_shapes(config)

    @pytest.mark.parametrize(
        ("kind", "width"),
        [(ModelKind.BST, 6 * 8 + 6), (ModelKind.WDL, 6 + 6), (ModelKind.WDL_SEQ, 18), (ModelKind.DIN_LITE, 18)],
    )
    def test_mlp_input_width(self, model_config, kind, width):
        """Test first MLP layer width per kind."""
        assert expected_shapes(model_config(kind))["mlp.w0"] == (width, 16)

    def test_block_and_attention_tensors_by_kind(self, model_config):
        """Test that only BST owns blocks and only DIN-lite owns din.A."""
        bst = expected_shapes(model_config(ModelKind.BST, blocks=2))
        din = expected_shapes(model_config(ModelKind.DIN_LITE))
        assert "blocks.1.ffn.w1" in bst and DIN_ATTENTION not in bst
        assert din[DIN_ATTENTION] == (6, 6)
        assert not any(name.startswith("blocks.") for name in din)

    def test_seeded_init_is_deterministic(self, model_config):
        """Test equal seeds give equal parameters."""
        a = init_params(model_config(ModelKind.BST, seed=4)).snapshot()
        b = init_params(model_config(ModelKind.BST, seed=4)).snapshot()
        for name in a:
            assert_array_equal(a[name], b[name])

    def test_d_model_must_match_schema(self):
        """Test that block width must equal item+category+position widths."""
        with pytest.raises(ValidationError, match="d_model"):
            ModelConfig(schema=toy_schema(), block=BlockConfig(d_model=12, heads=2))


class TestHead:
    """Tests for the MLP head."""

    def test_zero_weights_give_one_half(self, model_config, examples):
        """Test that an all-zero head predicts 0.5."""
        params = init_params(model_config(ModelKind.WDL))
        for weight, bias in params.mlp:
            weight.data[:] = 0.0
            bias.data[:] = 0.0
        assert_array_equal(predict(examples, params), [0.5, 0.5, 0.5])

    def test_input_width_checked(self, model_config):
        """Test that a mis-sized z is rejected."""
        params = init_params(model_config(ModelKind.WDL))
        with pytest.raises(ShapeError):
            mlp_head(Tensor(np.ones((2, 5))), params.mlp)


class TestPredict:
    """Tests for batch prediction."""

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_shape_and_range(self, model_config, examples, kind):
        """Test one probability per example, strictly inside (0, 1)."""
        p = predict(examples, init_params(model_config(kind)))
        assert p.shape == (3,)
        assert ((p > 0) & (p < 1)).all()

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_batching_preserves_order(self, model_config, examples, kind):
        """Test batched output equals per-example output in input order."""
        params = init_params(model_config(kind))
        batched = predict(examples, params, batch_size=2)
        single = np.concatenate([predict(e, params) for e in examples])
        assert_allclose(batched, single, atol=1e-12)
        assert_allclose(predict(examples[::-1], params), batched[::-1], atol=1e-12)

    def test_default_scale_batch(self):
        """Test a full 512-example batch through the default-size BST with b=3."""
        config = RunConfig()
        gen = config.gen_config().model_copy(update={"n_train": 600, "n_test": 1})
        train, _ = generate_dataset(gen)
        params = init_params(config.build_model_config(blocks=3))
        p = predict(train, params, batch_size=512)
        assert p.shape == (600,)
        assert_allclose(p[510:515], predict(train[510:515], params), atol=1e-12)

    def test_empty_input(self, model_config):
        """Test that no examples give an empty array."""
        assert predict([], init_params(model_config(ModelKind.WDL))).shape == (0,)


class TestDispatch:
    """Tests for model-kind dispatch."""

    def test_known_kinds(self):
        """Test every kind resolves, including by value."""
        assert get_forward("wdl_seq") is wdl_seq_forward
        for kind in ModelKind:
            assert callable(get_forward(kind))

    def test_unknown_kind(self):
        """Test that an unknown kind raises ConfigError."""
        with pytest.raises(ConfigError, match="Unknown model kind"):
            get_forward("lstm")


class TestModelBehavior:
    """Tests for the structural properties of each predictor."""

    def test_wdl_ignores_history(self, model_config, make_example):
        """Test that WDL output does not depend on the history."""
        params = init_params(model_config(ModelKind.WDL))
        a = predict(make_example([(1, 1, 10), (2, 3, 500)]), params)
        b = predict(make_example([(7, 4, 900)]), params)
        assert_array_equal(a, b)

    @pytest.mark.parametrize("kind", [ModelKind.WDL_SEQ, ModelKind.DIN_LITE])
    def test_pooling_ignores_history_order(self, model_config, make_example, kind):
        """Test that pooled models are invariant to reordering history events."""
        params = init_params(model_config(kind))
        a = predict(make_example([(1, 1, 100), (5, 2, 200), (6, 4, 300)]), params)
        b = predict(make_example([(6, 4, 100), (1, 1, 200), (5, 2, 300)]), params)
        assert_allclose(a, b, atol=1e-12)

    def test_bst_sees_positions(self, model_config, make_example):
        """Test that BST output changes with click recency alone."""
        params = init_params(model_config(ModelKind.BST))
        recent = predict(make_example([(1, 1, 990), (2, 2, 995)]), params)
        old = predict(make_example([(1, 1, 10), (2, 2, 995)]), params)
        assert not np.array_equal(recent, old)

    def test_bst_swapping_events_changes_output(self, model_config, make_example):
        """Test that swapping two history events with different buckets moves p."""
        params = init_params(model_config(ModelKind.BST))
        a = predict(make_example([(1, 1, 10), (6, 4, 995)]), params)
        b = predict(make_example([(6, 4, 10), (1, 1, 995)]), params)
        assert np.abs(a - b).max() > 1e-9

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_padded_slot_contents_ignored(self, model_config, make_example, kind):
        """Test that ids stored in masked slots never affect the prediction."""
        config = model_config(kind)
        params = init_params(config)
        batch = encode_examples([make_example([(1, 1, 900), (2, 3, 950)])], config.schema)
        altered = batch.take(slice(0, 1))
        altered.item_ids = altered.item_ids.copy()
        altered.category_ids = altered.category_ids.copy()
        altered.buckets = altered.buckets.copy()
        altered.item_ids[0, :3] = [8, 7, 6]
        altered.category_ids[0, :3] = [4, 3, 2]
        altered.buckets[0, :3] = [5, 4, 3]
        assert_allclose(predict(altered, params), predict(batch, params), atol=1e-12)

    def test_din_with_zero_attention_is_mean_pooling(self, model_config, examples):
        """Test that A = 0 reduces DIN-lite to WDL(+Seq) on shared parameters."""
        din_config = model_config(ModelKind.DIN_LITE)
        params = init_params(din_config)
        params.tensors[DIN_ATTENTION].data[:] = 0.0
        seq_config = din_config.model_copy(update={"kind": ModelKind.WDL_SEQ})
        shared = {name: t for name, t in params.tensors.items() if name != DIN_ATTENTION}
        seq_params = ModelParams(tensors=shared, config=seq_config)
        assert_allclose(predict(examples, params), predict(examples, seq_params), atol=1e-12)

    def test_din_weights_normalized(self, model_config, examples):
        """Test weights sum to one over history and vanish without history."""
        config = model_config(ModelKind.DIN_LITE)
        params = init_params(config)
        batch = encode_examples(examples, config.schema)
        tables = params.embeddings
        weights = din_attention(
            batch,
            embed_slots(batch, tables, with_position=False),
            embed_target(batch, tables),
            params.din_attention,
        ).numpy()
        assert_allclose(weights.sum(axis=1), [0.0, 1.0, 1.0], atol=1e-12)
        assert (weights[:, -1] == 0.0).all()
        assert (weights[1, :-3] == 0.0).all()


class TestModelGradients:
    """Finite-difference checks of whole predictors."""

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_every_kind(self, kind):
        """Test analytic gradients of every parameter."""
        report = check_model_gradients(kind)
        assert report.passed, report.worst

    def test_stacked_bst(self):
        """Test gradients through two blocks."""
        report = check_model_gradients(ModelKind.BST, seed=1, blocks=2)
        assert report.passed, report.worst
