"""
Synthetic behavior-sequence generator with a planted, order-dependent click signal.

Each user walks a category-level Markov chain that mixes a population chain
with a user-specific one (both row-wise Dirichlet(alpha)). A target is
either the chain's next state or a uniformly random category, and its click
probability is

    p = sigmoid(beta * (m - theta)),   m = sum_k w_k * P_u[c_{last-k}, c_target]

with recency weights w_k proportional to exp(-lambda * k). The observed label
is Bernoulli(p), flipped with probability eta. Train and test users are disjoint.
"""

import logging
from dataclasses import dataclass

import numpy as np

from bstlab.core.config import GenConfig
from bstlab.core.errors import GeneratorError
from bstlab.features.records import BehaviorEvent, Example

logger = logging.getLogger(__name__)

START_TIME_RANGE = 1_000_000


@dataclass
class GenStats:
    """Summary of a generated dataset."""

    n_train: int
    n_test: int
    n_train_users: int
    n_test_users: int
    expected_positive_rate: float
    train_positive_rate: float
    test_positive_rate: float
    in_pattern_share: float


@dataclass
class SyntheticDataset:
    """Examples plus the generator's latent click probability for each one."""

    train: list[Example]
    test: list[Example]
    train_latent: np.ndarray
    test_latent: np.ndarray
    stats: GenStats


def _dirichlet_rows(rng: np.random.Generator, alpha: float, shape: tuple[int, ...]) -> np.ndarray:
    """Row-stochastic matrices with Dirichlet(alpha) rows; underflowed rows become one-hot."""
    size = shape[-1]
    rows = rng.dirichlet(np.full(size, alpha), size=shape[:-1])
    bad = ~np.isfinite(rows).all(axis=-1) | (rows.sum(axis=-1) <= 0)
    if bad.any():
        rows[bad] = np.eye(size)[rng.integers(size, size=int(bad.sum()))]
    return rows


def recency_weights(length: int, recency: float) -> np.ndarray:
    """Normalized exp(-lambda * k) for k = 0 (most recent) .. length - 1."""
    weights = np.exp(-recency * np.arange(length))
    return weights / weights.sum()


def click_probability(
    chain: np.ndarray,
    history_categories: np.ndarray,
    target_category: int,
    gen: GenConfig,
) -> float:
    """Latent click probability before label noise."""
    recent_first = history_categories[::-1]
    weights = recency_weights(len(recent_first), gen.recency)
    match = float(weights @ chain[recent_first, target_category])
    return float(1.0 / (1.0 + np.exp(-gen.sharpness * (match - gen.threshold))))


def _check_feasible(gen: GenConfig) -> None:
    n_test_users = int(round(gen.n_users * gen.test_user_fraction))
    if n_test_users < 1 or n_test_users >= gen.n_users:
        raise GeneratorError(
            f"test_user_fraction={gen.test_user_fraction} with n_users={gen.n_users} "
            "leaves one side of the split without users"
        )
    if gen.n_items < gen.n_categories:
        raise GeneratorError(f"n_items={gen.n_items} is below n_categories={gen.n_categories}")
    if not 0.0 <= gen.noise < 0.5:
        raise GeneratorError(f"Label noise must lie in [0, 0.5), got {gen.noise}")


class _World:
    """Items, users and transition chains shared by every sampled example."""

    def __init__(self, gen: GenConfig, rng: np.random.Generator) -> None:
        self.gen = gen
        C = gen.n_categories
        # ids are 1-based; column/row 0 of every chain is unused
        categories = np.concatenate(
            [np.arange(1, C + 1), rng.integers(1, C + 1, size=gen.n_items - C)]
        )
        rng.shuffle(categories)
        self.item_category = np.concatenate([[0], categories])
        self.items_by_category = [np.flatnonzero(self.item_category == c) for c in range(C + 1)]
        self.item_shop = np.concatenate([[0], rng.integers(1, gen.n_shops + 1, size=gen.n_items)])
        self.item_tag = np.concatenate([[0], rng.integers(1, gen.n_tags + 1, size=gen.n_items)])

        shared = _dirichlet_rows(rng, gen.alpha, (C, C))
        personal = _dirichlet_rows(rng, gen.alpha, (gen.n_users, C, C))
        mixed = gen.shared_weight * shared[None] + (1.0 - gen.shared_weight) * personal
        self.chains = np.zeros((gen.n_users + 1, C + 1, C + 1))
        self.chains[1:, 1:, 1:] = mixed
        self.cumulative = np.cumsum(self.chains, axis=2)

        self.gender = rng.integers(1, gen.n_genders + 1, size=gen.n_users + 1)
        self.age = rng.integers(1, gen.n_age_bands + 1, size=gen.n_users + 1)
        self.city = rng.integers(1, gen.n_cities + 1, size=gen.n_users + 1)

    def next_category(self, user: int, category: int, u: float) -> int:
        row = self.cumulative[user, category]
        return int(min(np.searchsorted(row, u * row[-1], side="right"), self.gen.n_categories))

    def pick_item(self, category: int, rng: np.random.Generator) -> int:
        pool = self.items_by_category[category]
        return int(pool[rng.integers(len(pool))])


def _sample_example(
    world: _World,
    user: int,
    rng: np.random.Generator,
) -> tuple[Example, float, bool]:
    gen = world.gen
    length = int(rng.integers(gen.seq_len_min, gen.seq_len_max + 1))

    categories = np.empty(length, dtype=np.int64)
    categories[0] = rng.integers(1, gen.n_categories + 1)
    steps = rng.random(length)
    for k in range(1, length):
        categories[k] = world.next_category(user, int(categories[k - 1]), steps[k])

    gaps = 1 + np.floor(rng.exponential(gen.mean_gap_seconds, size=length + 1)).astype(np.int64)
    times = int(rng.integers(0, START_TIME_RANGE)) + np.cumsum(gaps)
    history = [
        BehaviorEvent(item_id=world.pick_item(int(c), rng), category_id=int(c), timestamp=int(t))
        for c, t in zip(categories, times[:length], strict=True)
    ]

    in_pattern = bool(rng.random() < gen.in_pattern_rate)
    if in_pattern:
        target_category = world.next_category(user, int(categories[-1]), rng.random())
    else:
        target_category = int(rng.integers(1, gen.n_categories + 1))
    target_item = world.pick_item(target_category, rng)
    target = BehaviorEvent(item_id=target_item, category_id=target_category, timestamp=int(times[-1]))

    p = click_probability(world.chains[user], categories, target_category, gen)
    label = int(rng.random() < p)
    if rng.random() < gen.noise:
        label = 1 - label
    observed = gen.noise + (1.0 - 2.0 * gen.noise) * p

    example = Example(
        user_id=user,
        other_features={
            "gender": int(world.gender[user]),
            "age": int(world.age[user]),
            "city": int(world.city[user]),
            "shop_id": int(world.item_shop[target_item]),
            "tag": int(world.item_tag[target_item]),
            "match_type": int(rng.integers(1, gen.n_match_types + 1)),
            "display_position": int(rng.integers(1, gen.n_display_positions + 1)),
            "page_no": int(rng.integers(1, gen.n_pages + 1)),
        },
        history=history,
        target=target,
        label=label,
    )
    return example, observed, in_pattern


def synthesize(gen: GenConfig) -> SyntheticDataset:
    """
    Generate train/test examples together with their latent click probabilities.

    Raises:
        GeneratorError: If the configuration cannot produce a valid split.
    """
    _check_feasible(gen)
    rng = np.random.default_rng(gen.seed)
    world = _World(gen, rng)

    users = rng.permutation(np.arange(1, gen.n_users + 1))
    n_test_users = int(round(gen.n_users * gen.test_user_fraction))
    test_users, train_users = users[:n_test_users], users[n_test_users:]

    def draw(pool: np.ndarray, count: int) -> tuple[list[Example], np.ndarray, int]:
        examples: list[Example] = []
        latent = np.empty(count)
        in_pattern = 0
        for i, user in enumerate(rng.choice(pool, size=count)):
            example, latent[i], hit = _sample_example(world, int(user), rng)
            examples.append(example)
            in_pattern += hit
        return examples, latent, in_pattern

    train, train_latent, train_hits = draw(train_users, gen.n_train)
    test, test_latent, test_hits = draw(test_users, gen.n_test)

    total = gen.n_train + gen.n_test
    stats = GenStats(
        n_train=len(train),
        n_test=len(test),
        n_train_users=len(train_users),
        n_test_users=len(test_users),
        expected_positive_rate=float((train_latent.sum() + test_latent.sum()) / total),
        train_positive_rate=float(np.mean([e.label for e in train])),
        test_positive_rate=float(np.mean([e.label for e in test])),
        in_pattern_share=(train_hits + test_hits) / total,
    )
    logger.info(
        f"Generated {stats.n_train} train / {stats.n_test} test examples "
        f"(positive rate {stats.train_positive_rate:.3f}, expected {stats.expected_positive_rate:.3f})"
    )
    return SyntheticDataset(train, test, train_latent, test_latent, stats)


def generate_dataset(gen: GenConfig) -> tuple[list[Example], list[Example]]:
    """Train and test examples for ``gen``; identical seeds give identical datasets."""
    dataset = synthesize(gen)
    return dataset.train, dataset.test
