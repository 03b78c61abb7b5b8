"""Path utilities for datasets, run outputs and manifests."""

from pathlib import Path

from bstlab.core.errors import ConfigError

TRAIN_FILENAME = "train.jsonl"
TEST_FILENAME = "test.jsonl"
MANIFEST_SUFFIX = "manifest.yml"
CHECKPOINT_FILENAME = "model.ckpt.json"
LOSS_LOG_FILENAME = "loss.csv"
METRICS_FILENAME = "metrics.csv"
COMPARE_RUNS_FILENAME = "compare_runs.csv"
COMPARE_SUMMARY_FILENAME = "compare_summary.csv"


def ensure_dir(path: str | Path) -> Path:
    """
    Create a directory (and parents) if missing.

    Args:
        path: Directory to create.

    Returns:
        The directory as a Path.

    Raises:
        ConfigError: If the directory cannot be created.
    """
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"Cannot create output directory {directory}: {e}")
    return directory


def get_dataset_paths(data_dir: str | Path) -> tuple[Path, Path]:
    """Return the (train, test) JSONL paths inside a dataset directory."""
    root = Path(data_dir)
    return root / TRAIN_FILENAME, root / TEST_FILENAME


def get_manifest_path(out_dir: str | Path, command: str) -> Path:
    """Return the resolved-config manifest path of ``command`` inside an output directory."""
    return Path(out_dir) / f"{command}.{MANIFEST_SUFFIX}"


def require_file(path: str | Path, what: str) -> Path:
    """
    Check that an input file exists.

    Args:
        path: File path.
        what: Human label used in the error message.

    Returns:
        The path as a Path.

    Raises:
        ConfigError: If the file does not exist.
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"{what} not found: {file_path}")
    return file_path
