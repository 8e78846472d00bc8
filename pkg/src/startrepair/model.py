"""Event and activity-instance data model, CSV ingestion, and start/end pairing."""
from __future__ import annotations

import csv
import io
from bisect import bisect_left
from collections import defaultdict, deque
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence, TextIO, Union

INSTANCE_HEADER = ("case_id", "activity", "start_time", "end_time", "resource")


class LogFormatError(ValueError):
    """Raised for malformed input logs (bad CSV rows, unparseable timestamps)."""


class ConfigurationError(ValueError):
    """Raised for invalid configuration (bad column mapping, bad thresholds)."""


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp (``T`` or space separator, optional offset,
    trailing ``Z`` accepted). Offset-free values are assumed UTC."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise LogFormatError(f"unparseable timestamp: {raw!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def format_timestamp(ts: datetime) -> str:
    return ts.isoformat(sep=" ")


@dataclass(frozen=True)
class Event:
    """One raw log row: a start or end occurrence of an activity."""

    trace_id: str
    activity: str
    lifecycle: str  # "start" or "end"; other phases are dropped during pairing
    timestamp: datetime
    resource: Optional[str] = None

    def __post_init__(self):
        if not self.trace_id:
            raise LogFormatError("event with empty trace id")
        if not self.activity:
            raise LogFormatError("event with empty activity label")


@dataclass(frozen=True)
class ActivityInstance:
    """One paired execution record: (trace, activity, start, end, resource)."""

    trace_id: str
    activity: str
    start: datetime
    end: datetime
    resource: Optional[str] = None

    def __post_init__(self):
        if not self.trace_id:
            raise LogFormatError("instance with empty trace id")
        if not self.activity:
            raise LogFormatError("instance with empty activity label")
        if self.start > self.end:
            raise LogFormatError(
                f"instance start {self.start} after end {self.end} "
                f"(trace {self.trace_id}, activity {self.activity})"
            )


class ActivityInstanceLog:
    """Ordered collection of activity instances with per-resource and per-trace
    indexes sorted by end time. Immutable after construction."""

    def __init__(self, instances: Iterable[ActivityInstance]):
        self.instances: tuple[ActivityInstance, ...] = tuple(instances)
        by_resource: dict[Optional[str], list[ActivityInstance]] = defaultdict(list)
        by_trace: dict[str, list[ActivityInstance]] = defaultdict(list)
        for inst in self.instances:
            by_resource[inst.resource].append(inst)
            by_trace[inst.trace_id].append(inst)
        self.per_resource_index = {
            r: tuple(sorted(v, key=lambda i: i.end)) for r, v in by_resource.items()
        }
        self.per_trace_index = {
            t: tuple(sorted(v, key=lambda i: i.end)) for t, v in by_trace.items()
        }
        # cached end-time key arrays for O(log n) strictly-before lookups
        self._resource_ends = {
            r: [i.end for i in v] for r, v in self.per_resource_index.items()
        }
        self._trace_ends = {
            t: [i.end for i in v] for t, v in self.per_trace_index.items()
        }

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ActivityInstanceLog):
            return NotImplemented
        return self.instances == other.instances

    def activities(self) -> set[str]:
        return {inst.activity for inst in self.instances}

    def last_end_before(self, resource_or_trace: str, end: datetime, *,
                        by: str) -> Optional[datetime]:
        """Largest indexed end time strictly before `end` in the given bucket."""
        ends = (self._resource_ends if by == "resource" else self._trace_ends).get(
            resource_or_trace
        )
        if not ends:
            return None
        i = bisect_left(ends, end)
        return ends[i - 1] if i > 0 else None


@dataclass(frozen=True)
class ColumnMapping:
    """Names of the CSV columns carrying each field.

    Instance-per-row inputs set `start_time` and `end_time`; event-per-row
    inputs set `timestamp` and `lifecycle` instead.
    """

    trace_id: str = "case_id"
    activity: str = "activity"
    start_time: Optional[str] = "start_time"
    end_time: Optional[str] = "end_time"
    timestamp: Optional[str] = None
    lifecycle: Optional[str] = None
    resource: Optional[str] = "resource"

    def __post_init__(self):
        paired = self.start_time and self.end_time
        evented = self.timestamp and self.lifecycle
        if not paired and not evented:
            raise ConfigurationError(
                "mapping needs either start_time+end_time or timestamp+lifecycle columns"
            )

    @property
    def is_event_per_row(self) -> bool:
        return bool(self.timestamp and self.lifecycle)


EVENT_COLUMNS = ColumnMapping(
    start_time=None, end_time=None, timestamp="timestamp", lifecycle="lifecycle"
)
INSTANCE_COLUMNS = ColumnMapping()


@dataclass
class PairingSummary:
    """Anomaly counts from start/end pairing."""

    matched_pairs: int = 0
    orphan_ends: int = 0
    dropped_starts: int = 0
    dropped_other_lifecycle: int = 0


def _text_stream(source: Union[TextIO, io.RawIOBase, io.BufferedIOBase]) -> TextIO:
    if isinstance(source, (io.RawIOBase, io.BufferedIOBase)) or (
        hasattr(source, "mode") and "b" in getattr(source, "mode", "")
    ):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    return source


def _reader(source, mapping: ColumnMapping) -> tuple[csv.DictReader, list[str]]:
    reader = csv.DictReader(_text_stream(source))
    header = reader.fieldnames
    if header is None:
        raise LogFormatError("input has no header row")
    required = [mapping.trace_id, mapping.activity]
    if mapping.is_event_per_row:
        required += [mapping.timestamp, mapping.lifecycle]
    else:
        required += [mapping.start_time, mapping.end_time]
    missing = [c for c in required if c not in header]
    if missing:
        raise ConfigurationError(f"mapped columns missing from header: {missing}")
    return reader, header


def _cell(row: dict, column: Optional[str], row_number: int) -> Optional[str]:
    if column is None or column not in row:
        return None
    value = row[column]
    if value is None:
        raise LogFormatError(f"row {row_number}: malformed CSV row (missing fields)")
    value = value.strip()
    return value or None


def _required_cell(row: dict, column: str, row_number: int, what: str) -> str:
    value = _cell(row, column, row_number)
    if value is None:
        raise LogFormatError(f"row {row_number}: empty {what}")
    return value


def _row_timestamp(raw: str, row_number: int) -> datetime:
    try:
        return parse_timestamp(raw)
    except LogFormatError:
        raise LogFormatError(
            f"row {row_number}: unparseable timestamp {raw!r}"
        ) from None


def parse_event_log(source, mapping: ColumnMapping = EVENT_COLUMNS) -> list[Event]:
    """Read a CSV event log into Events, one per start/end occurrence.

    Instance-per-row inputs yield two Events per data row. Row numbers in
    error messages count the header as row 1.
    """
    reader, _ = _reader(source, mapping)
    events: list[Event] = []
    for row_number, row in enumerate(reader, start=2):
        if None in row:
            raise LogFormatError(f"row {row_number}: malformed CSV row (extra fields)")
        trace = _required_cell(row, mapping.trace_id, row_number, "trace id")
        activity = _required_cell(row, mapping.activity, row_number, "activity")
        resource = _cell(row, mapping.resource, row_number)
        if mapping.is_event_per_row:
            raw_ts = _required_cell(row, mapping.timestamp, row_number, "timestamp")
            lifecycle = _required_cell(row, mapping.lifecycle, row_number, "lifecycle")
            events.append(
                Event(trace, activity, lifecycle.lower(),
                      _row_timestamp(raw_ts, row_number), resource)
            )
        else:
            raw_start = _required_cell(row, mapping.start_time, row_number, "start time")
            raw_end = _required_cell(row, mapping.end_time, row_number, "end time")
            events.append(
                Event(trace, activity, "start", _row_timestamp(raw_start, row_number),
                      resource)
            )
            events.append(
                Event(trace, activity, "end", _row_timestamp(raw_end, row_number),
                      resource)
            )
    return events


def to_activity_instances(
    events: Sequence[Event],
) -> tuple[ActivityInstanceLog, PairingSummary]:
    """Pair start and end events into activity instances.

    Matching is FIFO per (trace, activity, resource) key over events sorted by
    timestamp (stable, so input order breaks ties). Unmatched end events become
    zero-duration instances; unmatched start events and non-start/end lifecycle
    phases are dropped and counted in the summary.
    """
    summary = PairingSummary()
    ordered = sorted(events, key=lambda e: e.timestamp)
    open_starts: dict[tuple, deque[Event]] = defaultdict(deque)
    instances: list[ActivityInstance] = []
    for event in ordered:
        key = (event.trace_id, event.activity, event.resource)
        if event.lifecycle == "start":
            open_starts[key].append(event)
        elif event.lifecycle == "end":
            if open_starts[key]:
                start = open_starts[key].popleft()
                summary.matched_pairs += 1
                instances.append(
                    ActivityInstance(event.trace_id, event.activity,
                                     start.timestamp, event.timestamp, event.resource)
                )
            else:
                summary.orphan_ends += 1
                instances.append(
                    ActivityInstance(event.trace_id, event.activity,
                                     event.timestamp, event.timestamp, event.resource)
                )
        else:
            summary.dropped_other_lifecycle += 1
    summary.dropped_starts = sum(len(q) for q in open_starts.values())
    return ActivityInstanceLog(instances), summary


def read_instance_log(source, mapping: ColumnMapping = INSTANCE_COLUMNS) -> ActivityInstanceLog:
    """Read an instance-per-row CSV directly, preserving row order.

    Unlike `parse_event_log` + `to_activity_instances`, this never re-pairs
    rows, so write -> read round trips are exact even when same-key instances
    overlap in time.
    """
    if mapping.is_event_per_row:
        raise ConfigurationError("read_instance_log needs an instance-per-row mapping")
    reader, _ = _reader(source, mapping)
    instances = []
    for row_number, row in enumerate(reader, start=2):
        if None in row:
            raise LogFormatError(f"row {row_number}: malformed CSV row (extra fields)")
        instances.append(
            ActivityInstance(
                _required_cell(row, mapping.trace_id, row_number, "trace id"),
                _required_cell(row, mapping.activity, row_number, "activity"),
                _row_timestamp(
                    _required_cell(row, mapping.start_time, row_number, "start time"),
                    row_number,
                ),
                _row_timestamp(
                    _required_cell(row, mapping.end_time, row_number, "end time"),
                    row_number,
                ),
                _cell(row, mapping.resource, row_number),
            )
        )
    return ActivityInstanceLog(instances)


def write_activity_instance_log(log: ActivityInstanceLog, sink) -> None:
    """Write the log as CSV with header `case_id,activity,start_time,end_time,resource`
    and ISO-8601 timestamps with explicit offset."""
    out = _text_stream(sink)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(INSTANCE_HEADER)
    for inst in log.instances:
        writer.writerow(
            (inst.trace_id, inst.activity, format_timestamp(inst.start),
             format_timestamp(inst.end), inst.resource or "")
        )
    out.flush()
