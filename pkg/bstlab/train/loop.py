"""Mini-batch training with mean binary cross-entropy."""

import logging
from collections.abc import Callable, Sequence

import numpy as np

from bstlab.core.config import ModelConfig, TrainConfig
from bstlab.core.errors import ConfigError
from bstlab.features.embedding import EncodedBatch, OovTally, as_batch
from bstlab.features.records import Example
from bstlab.models.params import ModelParams, init_params
from bstlab.models.predictors import get_forward
from bstlab.tensor import Mode, backward, bce_loss
from bstlab.train.optim import AdamState, adam_step

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, float], None]


def train(
    data: Sequence[Example] | EncodedBatch,
    model_config: ModelConfig,
    train_config: TrainConfig,
    params: ModelParams | None = None,
    on_epoch: EpochCallback | None = None,
) -> tuple[ModelParams, list[float]]:
    """
    Train the predictor named by ``model_config.kind``.

    Shuffling and dropout draw from two streams spawned from the training
    seed (falling back to the model seed), so runs are reproducible.

    Returns:
        (final parameters, mean loss per epoch)

    Raises:
        ConfigError: If ``data`` is empty.
    """
    tally = OovTally()
    batch = as_batch(data, model_config.schema, tally)
    if batch.size == 0:
        raise ConfigError("Training data is empty")
    if tally.total:
        logger.warning(f"Out-of-vocabulary ids mapped to row 0: {dict(tally.counts)}")

    params = params or init_params(model_config)
    fn = get_forward(model_config.kind)
    seed = train_config.seed if train_config.seed is not None else model_config.seed
    shuffle_rng, dropout_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2)
    )
    state = AdamState()
    history: list[float] = []

    logger.info(
        f"Training {model_config.label} on {batch.size} examples "
        f"({train_config.epochs} epochs, batch {train_config.batch_size})"
    )
    for epoch in range(1, train_config.epochs + 1):
        order = shuffle_rng.permutation(batch.size) if train_config.shuffle else np.arange(batch.size)
        total = 0.0
        for start in range(0, batch.size, train_config.batch_size):
            sub = batch.take(order[start : start + train_config.batch_size])
            p = fn(sub, params, model_config, Mode.TRAIN, dropout_rng)
            loss = bce_loss(p, sub.labels)
            adam_step(params.tensors, backward(loss, params.tensors), state, train_config)
            total += loss.item() * sub.size
            logger.debug(f"epoch {epoch} step {state.t}: loss {loss.item():.5f}")
        mean_loss = total / batch.size
        history.append(mean_loss)
        logger.info(f"Epoch {epoch}/{train_config.epochs}: loss {mean_loss:.5f}")
        if on_epoch is not None:
            on_epoch(epoch, mean_loss)

    return params, history
