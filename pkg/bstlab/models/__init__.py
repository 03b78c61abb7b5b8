"""Predictors: BST and the WDL, WDL(+Seq) and DIN-lite baselines."""

from bstlab.models.head import mlp_head
from bstlab.models.params import ModelParams, expected_shapes, init_params, mlp_input_width
from bstlab.models.predictors import (
    FORWARDS,
    bst_forward,
    din_attention,
    din_lite_forward,
    forward,
    get_forward,
    predict,
    wdl_forward,
    wdl_seq_forward,
)

__all__ = [
    "FORWARDS",
    "ModelParams",
    "bst_forward",
    "din_attention",
    "din_lite_forward",
    "expected_shapes",
    "forward",
    "get_forward",
    "init_params",
    "mlp_head",
    "mlp_input_width",
    "predict",
    "wdl_forward",
    "wdl_seq_forward",
]
