"""Bias-corrected adaptive-moment (Adam) optimizer."""

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from bstlab.core.config import TrainConfig
from bstlab.core.errors import OptimizerError, ShapeError
from bstlab.tensor import Tensor


@dataclass
class AdamState:
    """First/second moment estimates per parameter and the step count."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    config: TrainConfig,
) -> AdamState:
    """
    Update ``params`` in place with one Adam step.

    Raises:
        OptimizerError: If any gradient is non-finite; no parameter is touched.
        ShapeError: If a gradient does not match its parameter.
    """
    for name, tensor in params.items():
        grad = grads[name]
        if grad.shape != tensor.shape:
            raise ShapeError(f"Gradient for {name} has shape {grad.shape}", tensor.shape, grad.shape)
        if not np.isfinite(grad).all():
            raise OptimizerError(f"Non-finite gradient for parameter {name}", param_name=name)

    beta1, beta2 = config.betas
    state.t += 1
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t

    for name, tensor in params.items():
        grad = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1.0 - beta1) * grad if m is None else beta1 * m + (1.0 - beta1) * grad
        v = (1.0 - beta2) * grad * grad if v is None else beta2 * v + (1.0 - beta2) * grad * grad
        state.m[name], state.v[name] = m, v
        tensor.data -= config.lr * (m / correction1) / (np.sqrt(v / correction2) + config.eps)
    return state
