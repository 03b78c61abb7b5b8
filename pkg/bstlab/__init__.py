"""
bstlab - Behavior Sequence Transformer CTR engine at desk scale.

A self-contained click-through-rate toolkit: a small reverse-mode tensor kernel,
time-delta positional sequence embeddings, stacked Transformer blocks, the WDL,
WDL(+Seq) and DIN-lite baselines, a synthetic behavior-sequence generator, and
AUC / response-time evaluation.
"""

__version__ = "0.1.0"
__author__ = "bstlab team"
