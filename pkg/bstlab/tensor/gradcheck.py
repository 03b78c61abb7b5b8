"""Central finite-difference verification of ``backward``."""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from bstlab.tensor.kernel import Tensor, backward

logger = logging.getLogger(__name__)

ABS_FALLBACK = 1e-8


@dataclass
class ParamCheck:
    """Worst entry of one parameter."""

    name: str
    max_rel_error: float
    worst_index: tuple[int, int] | None
    analytic: float
    numeric: float


@dataclass
class GradCheckReport:
    """Per-parameter results and the overall verdict."""

    tol: float
    step: float
    params: list[ParamCheck] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((p.max_rel_error for p in self.params), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol

    @property
    def worst(self) -> ParamCheck | None:
        return max(self.params, key=lambda p: p.max_rel_error, default=None)


def relative_error(analytic: float, numeric: float) -> float:
    """|a - n| / max(|a|, |n|), or the absolute error |a - n| when both magnitudes are below 1e-8."""
    magnitude = max(abs(analytic), abs(numeric))
    if magnitude < ABS_FALLBACK:
        return abs(analytic - numeric)
    return abs(analytic - numeric) / magnitude


def grad_check(
    forward: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    step: float = 1e-5,
    tol: float = 1e-4,
) -> GradCheckReport:
    """
    Compare backward gradients with (f(θ+h) - f(θ-h)) / 2h for every entry.

    Args:
        forward: Deterministic closure returning a 1x1 loss from ``params``
            (dropout must be in eval mode).
        params: Parameters to perturb in place; restored afterwards.
        step: Finite-difference step h.
        tol: Pass threshold on the maximum relative error.

    Returns:
        GradCheckReport with the worst entry per parameter.
    """
    report = GradCheckReport(tol=tol, step=step)
    if not params:
        return report

    analytic = backward(forward(), params)

    for name, tensor in params.items():
        data = tensor.data
        worst = ParamCheck(name=name, max_rel_error=0.0, worst_index=None, analytic=0.0, numeric=0.0)
        for index in np.ndindex(*data.shape):
            original = data[index]
            data[index] = original + step
            f_plus = forward().item()
            data[index] = original - step
            f_minus = forward().item()
            data[index] = original

            numeric = (f_plus - f_minus) / (2.0 * step)
            exact = float(analytic[name][index])
            error = relative_error(exact, numeric)
            if error > worst.max_rel_error or worst.worst_index is None:
                worst = ParamCheck(
                    name=name,
                    max_rel_error=error,
                    worst_index=(int(index[0]), int(index[1])),
                    analytic=exact,
                    numeric=numeric,
                )
        logger.debug(f"gradcheck {name}: max rel error {worst.max_rel_error:.3e}")
        report.params.append(worst)

    return report
