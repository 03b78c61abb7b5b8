"""Tests for checkpoint save and load."""

import json

import pytest
from numpy.testing import assert_array_equal

from bstlab.core.config import ModelKind
from bstlab.core.errors import CheckpointError
from bstlab.models import init_params, predict
from bstlab.train import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from bstlab.train.checkpoint import read_checkpoint_config


@pytest.fixture
def saved(temp_dir, model_config):
    """A seeded two-block BST checkpoint on disk."""
    config = model_config(ModelKind.BST, seed=3, blocks=2)
    params = init_params(config)
    path = save_checkpoint(params, config, temp_dir / "model.ckpt.json")
    return path, params, config


def _rewrite(path, edit):
    payload = json.loads(path.read_text())
    edit(payload)
    path.write_text(json.dumps(payload))


class TestCheckpoint:
    """Tests for the checkpoint container."""

    def test_round_trip_is_bit_exact(self, saved):
        """Test every tensor and the config survive unchanged."""
        path, params, config = saved
        loaded, loaded_config = load_checkpoint(path)
        assert loaded_config == config
        assert set(loaded.tensors) == set(params.tensors)
        for name, tensor in params.tensors.items():
            assert_array_equal(loaded.tensors[name].numpy(), tensor.numpy())

    @pytest.mark.parametrize("kind", [ModelKind.WDL, ModelKind.DIN_LITE])
    def test_predictions_preserved(self, temp_dir, model_config, examples, kind):
        """Test that a reloaded model predicts identically."""
        config = model_config(kind, seed=2)
        params = init_params(config)
        loaded, _ = load_checkpoint(save_checkpoint(params, config, temp_dir / "m.json"))
        assert_array_equal(predict(examples, loaded), predict(examples, params))

    def test_header(self, saved):
        """Test the format tag and version."""
        payload = json.loads(saved[0].read_text())
        assert payload["format"] == "bstlab-checkpoint"
        assert payload["version"] == CHECKPOINT_VERSION
        assert payload["config"]["kind"] == "bst"

    def test_missing_file(self, temp_dir):
        """Test a clear error for a missing path."""
        with pytest.raises(CheckpointError, match="not found"):
            load_checkpoint(temp_dir / "nope.json")

    def test_truncated_file(self, saved):
        """Test that a cut-off file is reported as corrupt."""
        path = saved[0]
        path.write_text(path.read_text()[:200])
        with pytest.raises(CheckpointError, match="truncated or corrupt"):
            load_checkpoint(path)

    def test_foreign_file(self, temp_dir):
        """Test that other JSON is rejected."""
        path = temp_dir / "other.json"
        path.write_text('{"hello": 1}')
        with pytest.raises(CheckpointError, match="not a bstlab checkpoint"):
            load_checkpoint(path)

    def test_version_mismatch(self, saved):
        """Test that an unknown version is refused."""
        path = saved[0]
        _rewrite(path, lambda p: p.update(version=CHECKPOINT_VERSION + 1))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)

    def test_shape_mismatch_names_tensor(self, saved):
        """Test that a wrong shape names the offending tensor."""
        path = saved[0]

        def shrink(payload):
            entry = payload["tensors"]["mlp.w3"]
            entry["shape"] = [entry["shape"][0] + 1, entry["shape"][1]]

        _rewrite(path, shrink)
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(path)
        assert exc.value.tensor == "mlp.w3"

    def test_config_with_fewer_blocks(self, saved, model_config):
        """Test that loading into a one-block config flags the extra block."""
        path, _, _ = saved
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(path, model_config(ModelKind.BST, blocks=1))
        assert exc.value.tensor.startswith("blocks.1.")

    def test_config_with_more_blocks(self, saved, model_config):
        """Test that a three-block config reports the first missing tensor."""
        path, _, _ = saved
        with pytest.raises(CheckpointError, match="missing") as exc:
            load_checkpoint(path, model_config(ModelKind.BST, blocks=3))
        assert exc.value.tensor.startswith("blocks.2.")

    def test_matching_config_ignores_seed(self, saved, model_config):
        """Test an explicit config equal up to the seed loads."""
        path, params, _ = saved
        loaded, config = load_checkpoint(path, model_config(ModelKind.BST, seed=99, blocks=2))
        assert config.seed == 99
        assert_array_equal(loaded.tensors["mlp.w0"].data, params.tensors["mlp.w0"].data)

    def test_same_shapes_different_setting(self, saved, model_config):
        """Test that a config differing only in a non-shape setting is rejected."""
        path, _, config = saved
        other = config.model_copy(update={"mlp_dropout": 0.3})
        with pytest.raises(CheckpointError, match="mlp_dropout"):
            load_checkpoint(path, other)

    def test_read_config(self, saved):
        """Test the stored config is readable without the tensors."""
        path, _, config = saved
        assert read_checkpoint_config(path) == config
