"""Named parameter sets for every predictor kind."""

import logging
from dataclasses import dataclass

import numpy as np

from bstlab.core.config import ModelConfig, ModelKind
from bstlab.features.embedding import EmbeddingTables, embedding_shapes, init_embedding_tables
from bstlab.nn.transformer import BlockParams, block_shapes, init_block
from bstlab.tensor import Tensor
from bstlab.tensor.init import xavier_uniform, zeros

logger = logging.getLogger(__name__)

DIN_ATTENTION = "din.A"
MLP_LAYERS = 4


def block_prefix(index: int) -> str:
    return f"blocks.{index}"


def mlp_weight_name(layer: int) -> str:
    return f"mlp.w{layer}"


def mlp_bias_name(layer: int) -> str:
    return f"mlp.b{layer}"


def mlp_input_width(config: ModelConfig) -> int:
    """Width of z, the vector fed to the MLP head."""
    schema = config.schema
    if config.kind == ModelKind.BST:
        return schema.seq_len * schema.d_model + schema.d_other
    if config.kind == ModelKind.WDL:
        return schema.d_item_category + schema.d_other
    return 2 * schema.d_item_category + schema.d_other


def mlp_shapes(config: ModelConfig) -> dict[str, tuple[int, int]]:
    widths = [mlp_input_width(config), *config.mlp_hidden, 1]
    shapes: dict[str, tuple[int, int]] = {}
    for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:], strict=True)):
        shapes[mlp_weight_name(layer)] = (fan_in, fan_out)
        shapes[mlp_bias_name(layer)] = (1, fan_out)
    return shapes


def expected_shapes(config: ModelConfig) -> dict[str, tuple[int, int]]:
    """Every parameter name and shape a model of ``config`` owns."""
    shapes = embedding_shapes(config.schema)
    if config.kind == ModelKind.BST:
        for j in range(config.block.blocks):
            shapes.update(block_shapes(config.block, block_prefix(j)))
    if config.kind == ModelKind.DIN_LITE:
        width = config.schema.d_item_category
        shapes[DIN_ATTENTION] = (width, width)
    shapes.update(mlp_shapes(config))
    return shapes


@dataclass
class ModelParams:
    """All trainable tensors of one predictor, keyed by name."""

    tensors: dict[str, Tensor]
    config: ModelConfig

    @property
    def embeddings(self) -> EmbeddingTables:
        return EmbeddingTables(self.tensors)

    @property
    def blocks(self) -> list[BlockParams]:
        heads = self.config.block.heads
        return [
            BlockParams.from_named(self.tensors, block_prefix(j), heads)
            for j in range(self.config.block.blocks)
        ]

    @property
    def din_attention(self) -> Tensor:
        return self.tensors[DIN_ATTENTION]

    @property
    def mlp(self) -> list[tuple[Tensor, Tensor]]:
        return [
            (self.tensors[mlp_weight_name(i)], self.tensors[mlp_bias_name(i)])
            for i in range(MLP_LAYERS)
        ]

    @property
    def size(self) -> int:
        """Total number of scalar parameters."""
        return sum(t.data.size for t in self.tensors.values())

    def snapshot(self) -> dict[str, np.ndarray]:
        """Copies of every tensor, for comparisons across training."""
        return {name: t.data.copy() for name, t in self.tensors.items()}


def init_params(config: ModelConfig) -> ModelParams:
    """Seeded initialisation: Xavier-uniform matrices, zero biases, unit layer-norm gains."""
    rng = np.random.default_rng(config.seed)
    tensors = dict(init_embedding_tables(config.schema, rng).tensors)
    if config.kind == ModelKind.BST:
        for j in range(config.block.blocks):
            tensors.update(init_block(config.block, block_prefix(j), rng).named())
    if config.kind == ModelKind.DIN_LITE:
        width = config.schema.d_item_category
        tensors[DIN_ATTENTION] = xavier_uniform(DIN_ATTENTION, width, width, rng)
    for name, (rows, cols) in mlp_shapes(config).items():
        if name.startswith("mlp.b"):
            tensors[name] = zeros(name, rows, cols)
        else:
            tensors[name] = xavier_uniform(name, rows, cols, rng)

    params = ModelParams(tensors=tensors, config=config)
    logger.debug(f"Initialised {config.label} with {params.size} parameters (seed {config.seed})")
    return params
