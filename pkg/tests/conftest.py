"""Pytest configuration and fixtures."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from bstlab.core.config import (
    GenConfig,
    ModelKind,
    ModelSection,
    PathsConfig,
    RunConfig,
    TrainConfig,
    save_yaml_config,
)
from bstlab.features.records import BehaviorEvent, Example
from bstlab.models.gradients import toy_examples, toy_model_config, toy_schema


@pytest.fixture
def temp_dir():
    """Create a temporary directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng():
    """Seeded random stream."""
    return np.random.default_rng(1234)


@pytest.fixture
def schema():
    """d_model=8, n=5 schema with two fields and one cross."""
    return toy_schema()


@pytest.fixture
def model_config():
    """Factory for tiny model configs of any kind."""

    def make(kind: ModelKind = ModelKind.BST, seed: int = 0, blocks: int = 1):
        return toy_model_config(kind, seed=seed, blocks=blocks)

    return make


@pytest.fixture
def examples():
    """Three examples with empty, short and over-long histories."""
    return toy_examples(0)


@pytest.fixture
def make_example():
    """Build an Example from (item, category, timestamp) triples."""

    def make(
        history: list[tuple[int, int, int]],
        target: tuple[int, int, int] = (3, 2, 1000),
        label: int = 1,
        gender: int = 1,
        city: int = 2,
        user_id: int = 1,
    ) -> Example:
        return Example(
            user_id=user_id,
            other_features={"gender": gender, "city": city},
            history=[BehaviorEvent(item_id=i, category_id=c, timestamp=t) for i, c, t in history],
            target=BehaviorEvent(item_id=target[0], category_id=target[1], timestamp=target[2]),
            label=label,
        )

    return make


@pytest.fixture
def tiny_gen():
    """Generator settings matching the tiny schema vocabularies."""
    return GenConfig(
        n_users=40,
        n_items=8,
        n_categories=4,
        n_genders=2,
        n_cities=3,
        seq_len_min=1,
        seq_len_max=8,
        mean_gap_seconds=30.0,
        n_train=160,
        n_test=80,
        seed=3,
    )


@pytest.fixture
def run_config(temp_dir, tiny_gen):
    """Complete run config over the tiny schema, writing under temp_dir."""
    return RunConfig(
        seed=5,
        schema=toy_schema(),
        gen=tiny_gen.model_copy(update={"seed": None}),
        model=ModelSection(heads=2, d_ff=16, mlp_hidden=(16, 8, 4)),
        train=TrainConfig(epochs=2, batch_size=16, lr=0.01),
        paths=PathsConfig(data_dir=temp_dir / "data", out_dir=temp_dir / "runs"),
    )


@pytest.fixture
def run_config_file(temp_dir, run_config):
    """The run config written as YAML."""
    path = temp_dir / "run.yml"
    save_yaml_config(path, run_config.to_manifest())
    return path
