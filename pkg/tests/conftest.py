from __future__ import annotations

from datetime import datetime, timezone

import pytest

from startrepair import ActivityInstance, ActivityInstanceLog


def ts(text: str) -> datetime:
    return datetime.fromisoformat(text).replace(tzinfo=timezone.utc)


# 10-instance shipping log: orders are registered, then package and invoice
# are prepared in either order (sometimes overlapping), then delivered.
SHIPPING_ROWS = [
    ("23", "Register Order", "2021-03-07 12:59:21", "2021-03-07 13:05:37", "Fry"),
    ("24", "Register Order", "2021-03-07 13:06:53", "2021-03-07 13:12:11", "Fry"),
    ("23", "Prepare Package", "2021-03-07 13:11:07", "2021-03-07 14:17:29", "Leela"),
    ("23", "Prepare Invoice", "2021-03-07 13:15:21", "2021-03-07 14:21:56", "Bender"),
    ("24", "Prepare Invoice", "2021-03-07 14:23:12", "2021-03-07 15:43:01", "Bender"),
    ("23", "Deliver Package", "2021-03-07 14:30:00", "2021-03-07 16:34:10", "Leela"),
    ("25", "Prepare Package", "2021-03-08 10:02:32", "2021-03-08 10:31:00", "Zoidberg"),
    ("24", "Prepare Package", "2021-03-08 10:35:53", "2021-03-08 11:11:05", "Zoidberg"),
    ("24", "Deliver Package", "2021-03-08 11:15:07", "2021-03-08 14:37:06", "Leela"),
    ("25", "Prepare Invoice", "2021-03-08 14:40:23", "2021-03-08 14:57:48", "Leela"),
]


def shipping_instances() -> list[ActivityInstance]:
    return [
        ActivityInstance(trace, activity, ts(start), ts(end), resource)
        for trace, activity, start, end, resource in SHIPPING_ROWS
    ]


def shipping_csv() -> str:
    lines = ["case_id,activity,start_time,end_time,resource"]
    lines += [",".join(row) for row in SHIPPING_ROWS]
    return "\n".join(lines) + "\n"


@pytest.fixture
def shipping_log() -> ActivityInstanceLog:
    return ActivityInstanceLog(shipping_instances())


def find(log: ActivityInstanceLog, trace: str, activity: str) -> ActivityInstance:
    matches = [
        i for i in log.instances if i.trace_id == trace and i.activity == activity
    ]
    assert len(matches) == 1
    return matches[0]
