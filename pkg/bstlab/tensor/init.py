"""Seeded parameter initialisers."""

import numpy as np

from bstlab.tensor.kernel import DTYPE, Tensor


def xavier_uniform(name: str, rows: int, cols: int, rng: np.random.Generator) -> Tensor:
    """Uniform in ±sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (rows + cols))
    return Tensor.param(name, rng.uniform(-bound, bound, size=(rows, cols)).astype(DTYPE))


def zeros(name: str, rows: int, cols: int) -> Tensor:
    return Tensor.param(name, np.zeros((rows, cols), dtype=DTYPE))


def ones(name: str, rows: int, cols: int) -> Tensor:
    return Tensor.param(name, np.ones((rows, cols), dtype=DTYPE))
