"""
Report rows and their serialization.

Rows are pydantic models; every row carries a `kind` field. JSON output is one
object per line, CSV output has a header fixed by the row model. Floats are written
with 17 significant digits so values survive a round trip unchanged.
"""

import json
import math
from enum import Enum
from typing import Any, List, Optional, Sequence

from pydantic import BaseModel


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class WeightedSumRow(BaseModel):
    kind: str = "weighted_sum"
    q: int
    l: int
    X: float
    eps_trunc: float
    diagonal: float
    off_diagonal: float
    sum: float
    main_term: float
    envelope: float
    envelope_ratio: float


class OrthogonalityRow(BaseModel):
    kind: str = "orthogonality"
    q: int
    weighted: int
    parity_bit: int
    pairs: int
    max_abs_diff: float
    passed: bool


class InvariantRow(BaseModel):
    kind: str = "invariant"
    name: str
    passed: bool
    skipped: bool = False
    detail: str = ""


def format_float(value: float) -> Optional[str]:
    if not math.isfinite(value):
        return None
    return format(value, ".17g")


def _json_value(value: Any) -> str:
    if isinstance(value, Enum):
        value = value.value
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        text = format_float(value)
        return "null" if text is None else text
    return json.dumps(value)


def _csv_value(value: Any) -> str:
    if isinstance(value, Enum):
        value = value.value
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value) or ""
    return str(value)


def to_json_line(row: BaseModel) -> str:
    fields = row.model_dump()
    return "{" + ", ".join(f"{json.dumps(key)}: {_json_value(value)}" for key, value in fields.items()) + "}"


def render(rows: Sequence[BaseModel], fmt: OutputFormat = OutputFormat.JSON) -> str:
    if fmt is OutputFormat.JSON:
        return "".join(to_json_line(row) + "\n" for row in rows)
    lines: List[str] = []
    if rows:
        header = list(type(rows[0]).model_fields)
        lines.append(",".join(header))
        for row in rows:
            values = row.model_dump()
            lines.append(",".join(_csv_quote(_csv_value(values[name])) for name in header))
    return "".join(line + "\n" for line in lines)


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text

