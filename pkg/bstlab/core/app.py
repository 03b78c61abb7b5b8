"""Experiment context shared by the CLI commands."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

from bstlab import __version__
from bstlab.core.config import ModelKind, RunConfig, load_run_config, save_yaml_config
from bstlab.core.paths import ensure_dir, get_dataset_paths, get_manifest_path, require_file

if TYPE_CHECKING:
    from bstlab.features.records import Example


logger = logging.getLogger(__name__)


@dataclass
class ExperimentContext:
    """
    Resolved run configuration plus lazily loaded datasets.

    Datasets are read from ``config.paths.data_dir`` the first time they are
    requested and cached for the rest of the command.
    """

    config: RunConfig
    command: str = "run"

    _train: list[Example] | None = field(default=None, repr=False)
    _test: list[Example] | None = field(default=None, repr=False)

    @classmethod
    def create(
        cls,
        config_path: Path | None = None,
        command: str = "run",
        seed: int | None = None,
        kind: ModelKind | None = None,
        blocks: int | None = None,
        out_dir: Path | None = None,
        data_dir: Path | None = None,
    ) -> ExperimentContext:
        """
        Load the config file (or defaults) and apply command-line overrides.

        Raises:
            ConfigError: If the config is missing or invalid.
        """
        config = load_run_config(config_path).with_overrides(
            seed=seed, kind=kind, blocks=blocks, out_dir=out_dir, data_dir=data_dir
        )
        return cls(config=config, command=command)

    @property
    def data_dir(self) -> Path:
        return self.config.paths.data_dir

    @property
    def out_dir(self) -> Path:
        return self.config.paths.out_dir

    def _load(self, path: Path, what: str) -> list[Example]:
        from bstlab.data.jsonl import read_jsonl

        require_file(path, what)
        examples = read_jsonl(path)
        logger.info(f"Loaded {len(examples)} {what.lower()} examples from {path}")
        return examples

    @property
    def train_data(self) -> list[Example]:
        if self._train is None:
            train_path, _ = get_dataset_paths(self.data_dir)
            self._train = self._load(train_path, "Training set")
        return self._train

    @property
    def test_data(self) -> list[Example]:
        if self._test is None:
            _, test_path = get_dataset_paths(self.data_dir)
            self._test = self._load(test_path, "Test set")
        return self._test

    def write_manifest(self, directory: Path, extra: dict[str, Any] | None = None) -> Path:
        """Write the resolved config next to a command's outputs."""
        ensure_dir(directory)
        manifest = {
            "command": self.command,
            "bstlab_version": __version__,
            **(extra or {}),
            "config": self.config.to_manifest(),
        }
        path = get_manifest_path(directory, self.command)
        save_yaml_config(path, manifest)
        logger.debug(f"Wrote manifest to {path}")
        return path
