"""
Packet trace ingestion.

A trace is a CSV file with header ``timestamp_us,direction,size_bytes,flow_id``,
one captured packet per line, timestamps in microseconds since the start of
the capture.
"""

from dataclasses import dataclass
from enum import Enum
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Union
import warnings

import pandas as pd

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["timestamp_us", "direction", "size_bytes", "flow_id"]

# Share of malformed data lines above which a trace is rejected outright
MAX_MALFORMED_FRACTION = 0.01


class TraceFormatError(ValueError):
    pass


class TraceOrderWarning(UserWarning):
    pass


class Direction(Enum):
    uplink = "uplink"
    downlink = "downlink"

    @classmethod
    def parse(cls, tag: str) -> "Direction":
        tag = str(tag).strip().lower()
        aliases = {"ul": "uplink", "dl": "downlink"}
        return cls(aliases.get(tag, tag))


@dataclass(frozen=True)
class TraceRecord:
    timestamp_us: int
    direction: Direction
    size_bytes: int
    flow_id: str

    def __post_init__(self):
        if self.timestamp_us < 0 or self.size_bytes < 0:
            raise ValueError(f"Negative timestamp or size in {self}")


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer() or value < 0:
        raise ValueError(f"{text!r} is not a nonnegative integer")
    return int(value)


def _blank(value) -> bool:
    return not isinstance(value, str) or not value.strip()


def _parse_row(row) -> TraceRecord:
    if any(_blank(value) for value in row):
        raise ValueError("missing field")
    flow = row.flow_id.strip()
    if not flow:
        raise ValueError("empty flow id")
    return TraceRecord(
        timestamp_us=_parse_int(row.timestamp_us),
        direction=Direction.parse(row.direction),
        size_bytes=_parse_int(row.size_bytes),
        flow_id=flow,
    )


def load_trace(path: Union[str, Path]) -> List[TraceRecord]:
    """
    Parse a trace file into timestamp-sorted records.

    Malformed lines are skipped and logged with their line numbers. Records
    out of timestamp order are stably sorted, with a TraceOrderWarning.

    :raises TraceFormatError: on a wrong header or when more than 1% of the
        data lines are malformed
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No trace at {path}")
    if not path.read_text().strip():
        return []

    too_long: List[List[str]] = []

    def keep_too_long(fields):
        too_long.append(fields)
        return None

    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            engine="python",
            on_bad_lines=keep_too_long,
        )
    except pd.errors.ParserError as e:
        raise TraceFormatError(f"Cannot parse {path}: {e}") from e

    header = [str(c).strip() for c in frame.columns]
    if header != TRACE_COLUMNS:
        raise TraceFormatError(
            f"Trace header must be {','.join(TRACE_COLUMNS)}, got {','.join(header)}"
        )
    frame.columns = header

    records: List[TraceRecord] = []
    malformed: List[int] = []
    data_lines = len(too_long)
    # Line 1 is the header, so row i sits on line i + 2
    for (i, row) in enumerate(frame.itertuples(index=False)):
        if all(_blank(value) for value in row):
            continue
        data_lines += 1
        try:
            records.append(_parse_row(row))
        except ValueError:
            malformed.append(i + 2)

    n_bad = len(malformed) + len(too_long)
    if n_bad:
        logger.warning(
            "%s: skipped %d malformed line(s): %s%s",
            path,
            n_bad,
            ", ".join(str(n) for n in malformed[:20]),
            f" and {len(too_long)} with extra fields" if too_long else "",
        )
    if data_lines and n_bad > MAX_MALFORMED_FRACTION * data_lines:
        raise TraceFormatError(
            f"{path}: {n_bad} of {data_lines} lines malformed "
            f"(lines {', '.join(str(n) for n in malformed[:20])})"
        )
    return sort_records(records, source=str(path))


def sort_records(
    records: Iterable[TraceRecord], source: Optional[str] = None
) -> List[TraceRecord]:
    records = list(records)
    in_order = all(
        a.timestamp_us <= b.timestamp_us for (a, b) in zip(records, records[1:])
    )
    if in_order:
        return records
    where = f" in {source}" if source else ""
    message = f"Out-of-order timestamps{where}; sorting"
    logger.warning(message)
    warnings.warn(message, TraceOrderWarning)
    return sorted(records, key=lambda r: r.timestamp_us)


def records_to_frame(records: Iterable[TraceRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (r.timestamp_us, r.direction.value, r.size_bytes, r.flow_id)
            for r in records
        ],
        columns=TRACE_COLUMNS,
    )


def write_trace(records: Iterable[TraceRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    records_to_frame(records).to_csv(path, index=False)
    return path
