"""JSONL dataset store: one Example record per line."""

import json
import logging
from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from bstlab.core.errors import DataFormatError
from bstlab.features.records import Example

logger = logging.getLogger(__name__)


def write_jsonl(examples: Iterable[Example], path: str | Path) -> int:
    """
    Write examples as UTF-8 JSON lines.

    Returns:
        Number of records written.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with target.open("w", encoding="utf-8") as f:
        for example in examples:
            f.write(example.model_dump_json(by_alias=True))
            f.write("\n")
            count += 1
    logger.debug(f"Wrote {count} records to {target}")
    return count


def parse_record(line: str | bytes, line_number: int) -> Example:
    """
    Parse one JSONL line; raw bytes are decoded as UTF-8 first.

    Raises:
        DataFormatError: With the line number and, when known, the offending field.
    """
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataFormatError(f"invalid UTF-8 at byte {e.start}", line_number=line_number)
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid JSON: {e.msg}", line_number=line_number)
    if not isinstance(data, dict):
        raise DataFormatError("record is not a JSON object", line_number=line_number)
    try:
        return Example.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ())) or None
        raise DataFormatError(
            f"{field or 'record'}: {first.get('msg', 'invalid value')}",
            line_number=line_number,
            field=field,
        )


def read_jsonl(path: str | Path) -> list[Example]:
    """Read every record; blank lines are skipped and an empty file gives []."""
    source = Path(path)
    examples: list[Example] = []
    with source.open("rb") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            examples.append(parse_record(line, line_number))
    logger.debug(f"Read {len(examples)} records from {source}")
    return examples
