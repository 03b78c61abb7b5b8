"""Finite-difference gradient checks of whole predictors on a tiny configuration."""

import logging

import numpy as np

from bstlab.core.config import BlockConfig, CrossSpec, FeatureSchema, FieldSpec, ModelConfig, ModelKind
from bstlab.features.records import BehaviorEvent, Example
from bstlab.models.params import init_params
from bstlab.models.predictors import forward
from bstlab.tensor import GradCheckReport, Mode, bce_loss, grad_check

logger = logging.getLogger(__name__)


def toy_schema() -> FeatureSchema:
    """d_model = 4 + 2 + 2 = 8 with n = 5 history slots."""
    return FeatureSchema(
        item=FieldSpec(name="item_id", vocab_size=9, width=4),
        category=FieldSpec(name="category_id", vocab_size=5, width=2),
        position_buckets=6,
        position_width=2,
        max_len=5,
        fields=[
            FieldSpec(name="gender", vocab_size=3, width=2),
            FieldSpec(name="city", vocab_size=4, width=2),
        ],
        crosses=[CrossSpec(left="gender", right="item_id", table_size=7, width=2)],
    )


def toy_model_config(kind: ModelKind, seed: int = 0, blocks: int = 1) -> ModelConfig:
    """b=1, d_model=8, h=2, n=5, MLP (16, 8, 4)."""
    return ModelConfig(
        schema=toy_schema(),
        block=BlockConfig(d_model=8, heads=2, d_ff=16, blocks=blocks),
        mlp_hidden=(16, 8, 4),
        kind=kind,
        seed=seed,
    )


def toy_examples(seed: int = 0) -> list[Example]:
    """Three examples: empty, short and over-long (truncated) histories."""
    rng = np.random.default_rng(seed)
    examples = []
    for label, length in ((1, 0), (0, 2), (1, 7)):
        gaps = rng.integers(1, 40, size=length + 1)
        times = np.cumsum(gaps)
        history = [
            BehaviorEvent(
                item_id=int(rng.integers(1, 9)),
                category_id=int(rng.integers(1, 5)),
                timestamp=int(t),
            )
            for t in times[:length]
        ]
        target = BehaviorEvent(
            item_id=int(rng.integers(1, 9)),
            category_id=int(rng.integers(1, 5)),
            timestamp=int(times[-1]),
        )
        examples.append(
            Example(
                user_id=len(examples) + 1,
                other_features={
                    "gender": int(rng.integers(1, 3)),
                    "city": int(rng.integers(1, 4)),
                },
                history=history,
                target=target,
                label=label,
            )
        )
    return examples


def check_model_gradients(
    kind: ModelKind,
    seed: int = 0,
    step: float = 1e-5,
    tol: float = 1e-4,
    blocks: int = 1,
) -> GradCheckReport:
    """Compare backward against central differences for every parameter of ``kind``."""
    config = toy_model_config(kind, seed=seed, blocks=blocks)
    params = init_params(config)
    examples = toy_examples(seed)
    labels = [e.label for e in examples]

    def loss():
        return bce_loss(forward(examples, params, config, Mode.EVAL), labels)

    report = grad_check(loss, params.tensors, step=step, tol=tol)
    logger.info(f"gradcheck {config.label}: max relative error {report.max_rel_error:.3e}")
    return report
