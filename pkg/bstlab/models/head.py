"""Shared three-layer MLP head with a sigmoid output."""

from collections.abc import Sequence

import numpy as np

from bstlab.core.errors import ShapeError
from bstlab.tensor import Mode, Tensor, add, dropout, leaky_relu, matmul, sigmoid


def mlp_head(
    z: Tensor,
    layers: Sequence[tuple[Tensor, Tensor]],
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
    slope: float = 0.01,
    dropout_rate: float = 0.0,
) -> Tensor:
    """
    Hidden layers with LeakyReLU, a final affine to one logit, then sigmoid.

    Args:
        z: Input rows [B x d_in].
        layers: (weight, bias) pairs; the last one maps to a single unit.

    Returns:
        Click probabilities [B x 1], strictly inside (0, 1).
    """
    first_weight = layers[0][0]
    if z.cols != first_weight.rows:
        raise ShapeError(
            f"MLP input width {z.cols} does not match first layer {first_weight.shape}",
            z.shape,
            first_weight.shape,
        )
    hidden = z
    for weight, bias in layers[:-1]:
        hidden = leaky_relu(add(matmul(hidden, weight), bias), slope)
        hidden = dropout(hidden, dropout_rate, mode, rng)
    weight, bias = layers[-1]
    return sigmoid(add(matmul(hidden, weight), bias))
