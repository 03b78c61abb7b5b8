"""Pydantic models for labeled impressions and their behavior history."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class BehaviorEvent(BaseModel):
    """One clicked item with its category and click time (seconds)."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    item_id: int = Field(..., ge=0, alias="item")
    category_id: int = Field(..., ge=0, alias="cat")
    timestamp: int = Field(..., ge=0, alias="ts")

    @property
    def is_padding(self) -> bool:
        """Id 0 is reserved for padding/unknown."""
        return self.item_id == 0


PAD_EVENT = BehaviorEvent(item_id=0, category_id=0, timestamp=0)


class Example(BaseModel):
    """
    One labeled impression.

    ``target.timestamp`` is the request time t(v_t); every history event must
    be at or before it, in ascending time order.
    """

    model_config = ConfigDict(populate_by_name=True)

    user_id: int = Field(..., ge=0)
    other_features: dict[str, int] = Field(default_factory=dict, alias="other")
    history: list[BehaviorEvent] = Field(default_factory=list)
    target: BehaviorEvent
    label: Literal[0, 1]

    @model_validator(mode="after")
    def check_timeline(self) -> "Example":
        previous = -1
        for event in self.history:
            if event.is_padding:
                continue
            if event.timestamp > self.target.timestamp:
                raise ValueError(
                    f"history event at ts={event.timestamp} is after request time "
                    f"{self.target.timestamp}"
                )
            if event.timestamp < previous:
                raise ValueError("history must be in ascending timestamp order")
            previous = event.timestamp
        return self

    @property
    def request_time(self) -> int:
        return self.target.timestamp

    def to_record(self) -> dict:
        """JSONL record form (`user_id`, `other`, `history`, `target`, `label`)."""
        return self.model_dump(by_alias=True)
