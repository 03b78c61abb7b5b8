"""Dense tensor kernel with reverse-mode gradients."""

from bstlab.tensor.gradcheck import GradCheckReport, ParamCheck, grad_check, relative_error
from bstlab.tensor.kernel import (
    Mode,
    Tensor,
    add,
    as_tensor,
    backward,
    bce_loss,
    concat_cols,
    concat_rows,
    dropout,
    gather_rows,
    layer_norm,
    leaky_relu,
    matmul,
    mul,
    reshape,
    scale,
    segment_matmul,
    segment_outer,
    sigmoid,
    slice_cols,
    softmax_rows,
    sum_all,
    sum_cols,
    transpose,
)

__all__ = [
    "Mode",
    "Tensor",
    "add",
    "as_tensor",
    "backward",
    "bce_loss",
    "concat_cols",
    "concat_rows",
    "dropout",
    "gather_rows",
    "layer_norm",
    "leaky_relu",
    "matmul",
    "mul",
    "reshape",
    "scale",
    "segment_matmul",
    "segment_outer",
    "sigmoid",
    "slice_cols",
    "softmax_rows",
    "sum_all",
    "sum_cols",
    "transpose",
    "GradCheckReport",
    "ParamCheck",
    "grad_check",
    "relative_error",
]
