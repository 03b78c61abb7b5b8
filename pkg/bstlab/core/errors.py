"""Custom exceptions for bstlab."""

from typing import Any


class BstLabError(Exception):
    """Base exception for all bstlab errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigError(BstLabError):
    """Configuration-related errors."""

    pass


class KernelError(BstLabError):
    """Invalid arguments to a tensor kernel operation."""

    pass


class ShapeError(KernelError):
    """Operand shapes do not agree."""

    def __init__(self, message: str, *shapes: tuple[int, ...]) -> None:
        super().__init__(message, {"shapes": list(shapes)})
        self.shapes = shapes


class MaskError(KernelError):
    """A softmax row has no unmasked entry."""

    def __init__(self, row: int) -> None:
        super().__init__(f"Row {row} is fully masked", {"row": row})
        self.row = row


class FeatureError(BstLabError):
    """Invalid example or schema field during feature construction."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message, {"field": field} if field else None)
        self.field = field


class DataFormatError(BstLabError):
    """Malformed dataset record."""

    def __init__(
        self,
        message: str,
        line_number: int | None = None,
        field: str | None = None,
    ) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, {"line": line_number, "field": field})
        self.line_number = line_number
        self.field = field


class GeneratorError(BstLabError):
    """Infeasible synthetic-data configuration."""

    pass


class OptimizerError(BstLabError):
    """Optimizer received an unusable gradient."""

    def __init__(self, message: str, param_name: str) -> None:
        super().__init__(message, {"param": param_name})
        self.param_name = param_name


class MetricError(BstLabError):
    """Metric undefined for the given inputs."""

    pass


class CheckpointError(BstLabError):
    """Checkpoint could not be read or does not match the model."""

    def __init__(self, message: str, tensor: str | None = None) -> None:
        super().__init__(message, {"tensor": tensor} if tensor else None)
        self.tensor = tensor
