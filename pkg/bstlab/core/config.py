"""Configuration management for bstlab."""

from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from bstlab.core.errors import ConfigError

ITEM_FIELD = "item_id"
CATEGORY_FIELD = "category_id"


class ModelKind(str, Enum):
    """Predictor families compared in the offline experiment."""

    BST = "bst"
    WDL = "wdl"
    WDL_SEQ = "wdl_seq"
    DIN_LITE = "din_lite"


class FieldSpec(BaseModel):
    """One categorical field: vocabulary size (id 0 reserved) and embedding width."""

    name: str = Field(..., description="Field name as it appears in the example record")
    vocab_size: int = Field(..., ge=2, description="Table rows including reserved row 0")
    width: int = Field(..., gt=0, description="Embedding width")


class CrossSpec(BaseModel):
    """Hashed conjunction of two categorical fields (ordered)."""

    left: str
    right: str
    table_size: int = Field(default=1000, ge=2, description="Hash table rows including row 0")
    width: int = Field(default=4, gt=0)

    @property
    def name(self) -> str:
        return f"{self.left}*{self.right}"


def _default_fields() -> list[FieldSpec]:
    return [
        FieldSpec(name="gender", vocab_size=3, width=4),
        FieldSpec(name="age", vocab_size=8, width=4),
        FieldSpec(name="city", vocab_size=21, width=4),
        FieldSpec(name="shop_id", vocab_size=51, width=4),
        FieldSpec(name="tag", vocab_size=21, width=4),
        FieldSpec(name="match_type", vocab_size=5, width=2),
        FieldSpec(name="display_position", vocab_size=11, width=2),
        FieldSpec(name="page_no", vocab_size=6, width=2),
    ]


def _default_crosses() -> list[CrossSpec]:
    return [
        CrossSpec(left="age", right=ITEM_FIELD, table_size=1000, width=4),
        CrossSpec(left="gender", right=CATEGORY_FIELD, table_size=64, width=4),
    ]


class FeatureSchema(BaseModel):
    """Vocabulary sizes and embedding widths for every categorical input."""

    item: FieldSpec = Field(
        default_factory=lambda: FieldSpec(name=ITEM_FIELD, vocab_size=501, width=16)
    )
    category: FieldSpec = Field(
        default_factory=lambda: FieldSpec(name=CATEGORY_FIELD, vocab_size=21, width=8)
    )
    position_buckets: int = Field(default=12, ge=2, description="Position-bucket count B")
    position_width: int = Field(default=8, gt=0)
    max_len: int = Field(default=20, ge=1, description="History slots n")
    fields: list[FieldSpec] = Field(default_factory=_default_fields)
    crosses: list[CrossSpec] = Field(default_factory=_default_crosses)
    hash_seed: int = Field(default=17, description="Fixed salt for cross-feature hashing")

    @model_validator(mode="after")
    def check_names(self) -> "FeatureSchema":
        """Field names are unique and crosses reference known fields."""
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate field names in schema: {names}")
        known = set(names) | {ITEM_FIELD, CATEGORY_FIELD}
        for cross in self.crosses:
            for part in (cross.left, cross.right):
                if part not in known:
                    raise ValueError(f"Cross feature {cross.name} references unknown field '{part}'")
        return self

    @property
    def d_model(self) -> int:
        return self.item.width + self.category.width + self.position_width

    @property
    def d_item_category(self) -> int:
        return self.item.width + self.category.width

    @property
    def d_other(self) -> int:
        return sum(f.width for f in self.fields) + sum(c.width for c in self.crosses)

    @property
    def seq_len(self) -> int:
        """History slots plus the appended target slot."""
        return self.max_len + 1


class BlockConfig(BaseModel):
    """Transformer block hyperparameters."""

    d_model: int = Field(default=32, gt=0)
    heads: int = Field(default=2, gt=0)
    d_ff: int | None = Field(default=None, description="FFN width, defaults to 4*d_model")
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    leaky_slope: float = Field(default=0.01, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    blocks: int = Field(default=1, ge=1, description="Number of stacked blocks b")

    @model_validator(mode="after")
    def check_heads(self) -> "BlockConfig":
        if self.d_model % self.heads:
            raise ValueError(f"d_model={self.d_model} is not divisible by heads={self.heads}")
        if self.d_ff is None:
            self.d_ff = 4 * self.d_model
        return self

    @property
    def d_head(self) -> int:
        return self.d_model // self.heads

    @property
    def ffn_width(self) -> int:
        return self.d_ff if self.d_ff is not None else 4 * self.d_model


class ModelConfig(BaseModel):
    """Everything needed to build and run one predictor."""

    schema_: FeatureSchema = Field(default_factory=FeatureSchema, alias="schema")
    block: BlockConfig = Field(default_factory=BlockConfig)
    mlp_hidden: tuple[int, int, int] = Field(default=(128, 64, 32))
    mlp_dropout: float = Field(default=0.0, ge=0.0, lt=1.0)
    kind: ModelKind = ModelKind.BST
    seed: int = 0

    model_config = {"populate_by_name": True}

    @field_validator("mlp_hidden")
    @classmethod
    def check_hidden(cls, v: tuple[int, int, int]) -> tuple[int, int, int]:
        if any(width <= 0 for width in v):
            raise ValueError(f"MLP widths must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def check_widths(self) -> "ModelConfig":
        if self.block.d_model != self.schema_.d_model:
            raise ValueError(
                f"block.d_model={self.block.d_model} but item+category+position widths "
                f"sum to {self.schema_.d_model}"
            )
        return self

    @property
    def schema(self) -> FeatureSchema:  # type: ignore[override]
        return self.schema_

    @property
    def label(self) -> str:
        """Display name used in reports."""
        return {
            ModelKind.BST: f"BST(b={self.block.blocks})",
            ModelKind.WDL: "WDL",
            ModelKind.WDL_SEQ: "WDL(+Seq)",
            ModelKind.DIN_LITE: "DIN-lite",
        }[self.kind]


class GenConfig(BaseModel):
    """Synthetic behavior-sequence generator settings."""

    n_users: int = Field(default=2000, ge=2)
    n_items: int = Field(default=500, ge=2)
    n_categories: int = Field(default=20, ge=2)
    n_genders: int = Field(default=2, ge=2)
    n_age_bands: int = Field(default=7, ge=2)
    n_cities: int = Field(default=20, ge=2)
    n_shops: int = Field(default=50, ge=2)
    n_tags: int = Field(default=20, ge=2)
    n_match_types: int = Field(default=4, ge=2)
    n_display_positions: int = Field(default=10, ge=2)
    n_pages: int = Field(default=5, ge=2)
    seq_len_min: int = Field(default=1, ge=1)
    seq_len_max: int = Field(default=30, ge=1)
    mean_gap_seconds: float = Field(default=600.0, gt=0.0)
    alpha: float = Field(default=0.1, gt=0.0, description="Dirichlet concentration of transitions")
    shared_weight: float = Field(
        default=0.8, ge=0.0, le=1.0, description="Weight of the population-level chain"
    )
    recency: float = Field(default=1.0, gt=0.0, description="Recency decay lambda")
    sharpness: float = Field(default=12.0, gt=0.0, description="Click logit scale beta")
    threshold: float = Field(default=0.3, description="Pattern-match level at p=0.5")
    in_pattern_rate: float = Field(default=0.5, ge=0.0, le=1.0)
    noise: float = Field(default=0.1, ge=0.0, lt=0.5, description="Label flip probability eta")
    n_train: int = Field(default=50000, ge=1)
    n_test: int = Field(default=10000, ge=1)
    test_user_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    seed: int | None = None

    @model_validator(mode="after")
    def check_ranges(self) -> "GenConfig":
        if self.seq_len_min > self.seq_len_max:
            raise ValueError(
                f"seq_len_min={self.seq_len_min} exceeds seq_len_max={self.seq_len_max}"
            )
        if self.n_items < self.n_categories:
            raise ValueError(
                f"n_items={self.n_items} must be at least n_categories={self.n_categories}"
            )
        return self

    def field_cardinalities(self) -> dict[str, int]:
        """Number of real ids (1..count) produced for each other-feature field."""
        return {
            "gender": self.n_genders,
            "age": self.n_age_bands,
            "city": self.n_cities,
            "shop_id": self.n_shops,
            "tag": self.n_tags,
            "match_type": self.n_match_types,
            "display_position": self.n_display_positions,
            "page_no": self.n_pages,
        }


class TrainConfig(BaseModel):
    """Mini-batch training settings."""

    epochs: int = Field(default=3, ge=1)
    batch_size: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-3, ge=0.0)
    betas: tuple[float, float] = Field(default=(0.9, 0.999))
    eps: float = Field(default=1e-8, gt=0.0)
    shuffle: bool = True
    seed: int | None = None

    @field_validator("betas")
    @classmethod
    def check_betas(cls, v: tuple[float, float]) -> tuple[float, float]:
        if not all(0.0 < b < 1.0 for b in v):
            raise ValueError(f"Moment decays must lie in (0, 1), got {v}")
        return v


class ModelSection(BaseModel):
    """Model hyperparameters as written in the run config (schema lives alongside)."""

    kind: ModelKind = ModelKind.BST
    blocks: int = Field(default=1, ge=1)
    heads: int = Field(default=2, gt=0)
    d_ff: int | None = None
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    leaky_slope: float = Field(default=0.01, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    mlp_hidden: tuple[int, int, int] = (128, 64, 32)
    mlp_dropout: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int | None = None


class PathsConfig(BaseModel):
    """Input/output locations."""

    data_dir: Path = Path("data")
    out_dir: Path = Path("runs")


class CompareConfig(BaseModel):
    """Settings for the multi-model comparison."""

    seeds: int = Field(default=5, ge=1)
    bench_examples: int = Field(default=200, ge=1)
    bench_repetitions: int = Field(default=5, ge=1)
    min_margin: float = Field(default=0.01, ge=0.0, description="AUC margin for --assert-order")


class RunConfig(BaseModel):
    """Complete experiment configuration loaded from one YAML file."""

    seed: int = 0
    schema_: FeatureSchema = Field(default_factory=FeatureSchema, alias="schema")
    gen: GenConfig = Field(default_factory=GenConfig)
    model: ModelSection = Field(default_factory=ModelSection)
    train: TrainConfig = Field(default_factory=TrainConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    compare: CompareConfig = Field(default_factory=CompareConfig)

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def check_vocab_coverage(self) -> "RunConfig":
        """Schema vocabularies must hold every id the generator can emit."""
        schema = self.schema_
        needed = {
            ITEM_FIELD: (schema.item.vocab_size, self.gen.n_items),
            CATEGORY_FIELD: (schema.category.vocab_size, self.gen.n_categories),
        }
        cardinalities = self.gen.field_cardinalities()
        for spec in schema.fields:
            if spec.name in cardinalities:
                needed[spec.name] = (spec.vocab_size, cardinalities[spec.name])
        for name, (vocab, count) in needed.items():
            if vocab < count + 1:
                raise ValueError(
                    f"schema vocabulary for '{name}' is {vocab} but the generator emits ids up to {count}"
                )
        return self

    @property
    def schema(self) -> FeatureSchema:  # type: ignore[override]
        return self.schema_

    def gen_config(self) -> GenConfig:
        """Generator settings with the seed resolved."""
        seed = self.gen.seed if self.gen.seed is not None else self.seed
        return self.gen.model_copy(update={"seed": seed})

    def train_config(self) -> TrainConfig:
        """Training settings with the seed resolved."""
        seed = self.train.seed if self.train.seed is not None else self.seed
        return self.train.model_copy(update={"seed": seed})

    def build_model_config(
        self,
        kind: ModelKind | None = None,
        blocks: int | None = None,
        seed: int | None = None,
    ) -> ModelConfig:
        """Assemble a ModelConfig from the schema and model sections."""
        section = self.model
        if seed is None:
            seed = section.seed if section.seed is not None else self.seed
        block = BlockConfig(
            d_model=self.schema_.d_model,
            heads=section.heads,
            d_ff=section.d_ff,
            dropout=section.dropout,
            leaky_slope=section.leaky_slope,
            eps=section.eps,
            blocks=blocks if blocks is not None else section.blocks,
        )
        return ModelConfig(
            schema=self.schema_,
            block=block,
            mlp_hidden=section.mlp_hidden,
            mlp_dropout=section.mlp_dropout,
            kind=kind if kind is not None else section.kind,
            seed=seed,
        )

    def with_overrides(
        self,
        seed: int | None = None,
        kind: ModelKind | None = None,
        blocks: int | None = None,
        out_dir: Path | None = None,
        data_dir: Path | None = None,
    ) -> "RunConfig":
        """Apply command-line overrides; an explicit seed replaces every section seed."""
        config = self.model_copy(deep=True)
        if seed is not None:
            config.seed = seed
            config.gen.seed = None
            config.train.seed = None
            config.model.seed = None
        if kind is not None:
            config.model.kind = kind
        if blocks is not None:
            config.model.blocks = blocks
        if out_dir is not None:
            config.paths.out_dir = out_dir
        if data_dir is not None:
            config.paths.data_dir = data_dir
        return config

    def to_manifest(self) -> dict[str, Any]:
        """Plain-data form for YAML manifests."""
        return self.model_dump(mode="json", by_alias=True)


def load_yaml_config(path: Path) -> dict[str, Any]:
    """Load a YAML configuration file."""
    if not path.exists():
        return {}

    try:
        with path.open() as f:
            data = yaml.safe_load(f) or {}
        return data
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {path}: {e}")


def save_yaml_config(path: Path, data: dict[str, Any]) -> None:
    """Save configuration to a YAML file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)


def _describe_validation_error(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "<root>"
    return f"{location}: {first.get('msg', 'invalid value')}"


def load_run_config(path: Path | None = None) -> RunConfig:
    """
    Load and validate a run configuration.

    Args:
        path: YAML file. If None, built-in defaults are used.

    Returns:
        Validated RunConfig instance.

    Raises:
        ConfigError: If the file is missing, unparsable or fails validation.
    """
    data: dict[str, Any] = {}
    if path is not None:
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        data = load_yaml_config(path)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config: {_describe_validation_error(e)}")


def parse_model_config(data: dict[str, Any]) -> ModelConfig:
    """Validate a ModelConfig from plain data (checkpoints, manifests)."""
    try:
        return ModelConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid model config: {_describe_validation_error(e)}")
