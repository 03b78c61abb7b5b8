"""Core modules for bstlab."""

from bstlab.core.config import (
    BlockConfig,
    FeatureSchema,
    GenConfig,
    ModelConfig,
    ModelKind,
    RunConfig,
    TrainConfig,
    load_run_config,
)
from bstlab.core.errors import (
    BstLabError,
    CheckpointError,
    ConfigError,
    DataFormatError,
    FeatureError,
    GeneratorError,
    KernelError,
    MaskError,
    MetricError,
    OptimizerError,
    ShapeError,
)

__all__ = [
    "BlockConfig",
    "FeatureSchema",
    "GenConfig",
    "ModelConfig",
    "ModelKind",
    "RunConfig",
    "TrainConfig",
    "load_run_config",
    "BstLabError",
    "CheckpointError",
    "ConfigError",
    "DataFormatError",
    "FeatureError",
    "GeneratorError",
    "KernelError",
    "MaskError",
    "MetricError",
    "OptimizerError",
    "ShapeError",
]
