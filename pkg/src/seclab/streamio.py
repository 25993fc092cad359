"""Stream files (JSONL) and result tables (CSV).

One JSON object per line::

    {"id": "x17", "surrogate_loss": 2.31, "target_loss": 1.87, "fooled": true}

``surrogate_loss`` is what the online policy sees; ``target_loss`` and
``fooled`` are only used for scoring. Unknown keys are ignored.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, TextIO, Union

from .core import Stream, StreamItem

__all__ = [
    "StreamRecord",
    "StreamFormatError",
    "parse_record",
    "read_records",
    "load_stream",
    "records_to_stream",
    "stream_to_records",
    "dump_records",
    "write_csv",
    "format_cell",
]


class StreamFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class StreamRecord:
    id: str
    surrogate_loss: float
    target_loss: Optional[float] = None
    fooled: Optional[bool] = None

    def to_json(self) -> str:
        obj: dict[str, Any] = {"id": self.id, "surrogate_loss": self.surrogate_loss}
        if self.target_loss is not None:
            obj["target_loss"] = self.target_loss
        if self.fooled is not None:
            obj["fooled"] = self.fooled
        return json.dumps(obj, separators=(",", ":"))


def _loss(obj: dict, key: str, line: Optional[int], required: bool) -> Optional[float]:
    if key not in obj or obj[key] is None:
        if required:
            raise StreamFormatError(f"missing required field {key!r}", line)
        return None
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise StreamFormatError(f"{key!r} must be a number, got {val!r}", line)
    val = float(val)
    if not math.isfinite(val) or val < 0:
        raise StreamFormatError(f"{key!r} must be finite and >= 0, got {val!r}", line)
    return val


def parse_record(text: str, line: Optional[int] = None) -> StreamRecord:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"invalid JSON ({exc.msg})", line) from None
    if not isinstance(obj, dict):
        raise StreamFormatError("expected a JSON object", line)
    if "id" not in obj:
        raise StreamFormatError("missing required field 'id'", line)
    fooled = obj.get("fooled")
    if fooled is not None and not isinstance(fooled, bool):
        raise StreamFormatError(f"'fooled' must be true/false, got {fooled!r}", line)
    return StreamRecord(
        id=str(obj["id"]),
        surrogate_loss=_loss(obj, "surrogate_loss", line, True),  # type: ignore[arg-type]
        target_loss=_loss(obj, "target_loss", line, False),
        fooled=fooled,
    )


def read_records(fh: Iterable[str]) -> list[StreamRecord]:
    """Parse JSONL, skipping blank lines; errors carry the 1-based line number."""
    out = []
    for lineno, raw in enumerate(fh, start=1):
        if raw.strip():
            out.append(parse_record(raw, lineno))
    if not out:
        raise StreamFormatError("stream file has no records")
    return out


def records_to_stream(records: Sequence[StreamRecord]) -> Stream:
    return Stream(
        tuple(
            StreamItem(
                id=rec.id,
                arrival=i,
                observed_value=rec.surrogate_loss,
                true_value=rec.target_loss,
                fooled=rec.fooled,
            )
            for i, rec in enumerate(records, start=1)
        )
    )


def stream_to_records(stream: Stream) -> list[StreamRecord]:
    return [StreamRecord(it.id, it.observed_value, it.true_value, it.fooled) for it in stream]


def load_stream(path: Union[str, Path]) -> Stream:
    with open(path, encoding="utf-8") as fh:
        return records_to_stream(read_records(fh))


def dump_records(records: Iterable[StreamRecord], fh: TextIO) -> None:
    for rec in records:
        fh.write(rec.to_json() + "\n")


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Sequence[dict], fh: TextIO, columns: Optional[Sequence[str]] = None) -> None:
    """Header row plus one line per dict; CRLF line endings and minimal quoting."""
    columns = list(columns or (rows[0].keys() if rows else []))
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])


def csv_text(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, columns)
    return buf.getvalue()
