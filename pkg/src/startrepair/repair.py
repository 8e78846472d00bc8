"""Start-time repair: resource availability, enablement, earliest start, outlier cap."""
from __future__ import annotations

import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from math import floor
from typing import Optional

from .concurrency import ConcurrencyRelation
from .model import ActivityInstance, ActivityInstanceLog, ConfigurationError

RULE_ESTIMATED = "estimated"
RULE_CLAMPED = "clamped_to_recorded"
RULE_CAPPED = "outlier_capped"
RULE_BOT_OR_INSTANT = "bot_or_instant"
RULE_NO_EVIDENCE = "no_evidence"
ALL_RULES = (RULE_ESTIMATED, RULE_CLAMPED, RULE_CAPPED, RULE_BOT_OR_INSTANT,
             RULE_NO_EVIDENCE)


@dataclass(frozen=True)
class RepairConfig:
    statistic: str = "median"  # "median" or "mode"
    outlier_threshold: Optional[float] = None  # > 1; None disables capping
    bot_resources: frozenset = frozenset()
    instant_activities: frozenset = frozenset()
    allow_later_start: bool = False

    def __post_init__(self):
        if self.statistic not in ("median", "mode"):
            raise ConfigurationError(f"unknown statistic: {self.statistic!r}")
        if self.outlier_threshold is not None and self.outlier_threshold <= 1:
            raise ConfigurationError(
                f"outlier threshold must be > 1, got {self.outlier_threshold}"
            )
        object.__setattr__(self, "bot_resources", frozenset(self.bot_resources))
        object.__setattr__(self, "instant_activities",
                           frozenset(self.instant_activities))


@dataclass(frozen=True)
class InstanceRepair:
    """Per-instance audit record of the repair decision."""

    original_start: datetime
    rat: Optional[datetime]
    ent: Optional[datetime]
    earliest_start: Optional[datetime]
    repaired_start: datetime
    rule_applied: str


@dataclass(frozen=True)
class RepairOutcome:
    repaired_log: ActivityInstanceLog
    per_instance: tuple[InstanceRepair, ...]

    def rule_counts(self) -> dict[str, int]:
        counts = {rule: 0 for rule in ALL_RULES}
        counts.update(Counter(r.rule_applied for r in self.per_instance))
        return counts


def resource_availability_time(
    instance: ActivityInstance, log: ActivityInstanceLog
) -> Optional[datetime]:
    """Largest end time among instances of the same resource ending strictly
    before this instance's end; None for the resource's first instance."""
    if instance.resource is None:
        return None
    return log.last_end_before(instance.resource, instance.end, by="resource")


def enablement_time(
    instance: ActivityInstance,
    log: ActivityInstanceLog,
    relation: ConcurrencyRelation,
) -> Optional[datetime]:
    """Largest end time among same-trace instances ending strictly before this
    instance's end whose activity is not concurrent with it; None when empty."""
    candidates = log.per_trace_index.get(instance.trace_id, ())
    best: Optional[datetime] = None
    for other in reversed(candidates):
        if other.end >= instance.end:
            continue
        if relation.concurrent(other.activity, instance.activity):
            continue
        best = other.end  # index is end-sorted, first hit is the max
        break
    return best


def earliest_start(
    instance: ActivityInstance,
    log: ActivityInstanceLog,
    relation: ConcurrencyRelation,
    config: RepairConfig = RepairConfig(),
) -> Optional[datetime]:
    """Earliest instant the instance could have started: max of resource
    availability and enablement, with the bot/instant and missing-resource rules."""
    if instance.activity in config.instant_activities:
        return instance.end
    if instance.resource is not None and instance.resource in config.bot_resources:
        return instance.end
    ent = enablement_time(instance, log, relation)
    if instance.resource is None:
        return ent  # unknown performer: treated as a maximum-capacity pool
    rat = resource_availability_time(instance, log)
    if rat is None:
        return ent
    if ent is None:
        return rat
    return max(rat, ent)


def typical_repaired_duration(
    durations: list[timedelta], statistic: str
) -> Optional[timedelta]:
    """Median, or mode over whole-second buckets (ties to the smallest value).

    Returns None for empty input: the activity is exempt from outlier capping.
    """
    if not durations:
        return None
    if statistic == "median":
        return timedelta(seconds=statistics.median(d.total_seconds() for d in durations))
    if statistic == "mode":
        buckets = Counter(floor(d.total_seconds()) for d in durations)
        top = max(buckets.values())
        return timedelta(seconds=min(s for s, n in buckets.items() if n == top))
    raise ConfigurationError(f"unknown statistic: {statistic!r}")


def repair_start_times(
    log: ActivityInstanceLog,
    relation: ConcurrencyRelation,
    config: RepairConfig = RepairConfig(),
) -> RepairOutcome:
    """Repair every start time to the instance's earliest starting point.

    Pass 1 computes the earliest start per instance; pass 2 (when an outlier
    threshold is set) caps repaired durations at threshold * typical repaired
    duration per activity. Estimates are then clamped so starts never move past
    the recorded start (unless `allow_later_start`) nor past the end. Instances
    flagged bot/instant keep start = end regardless of clamping; instances with
    no evidence keep their recorded start.
    """
    records: list[dict] = []
    for instance in log.instances:
        instant = (
            instance.activity in config.instant_activities
            or (instance.resource is not None
                and instance.resource in config.bot_resources)
        )
        rat = resource_availability_time(instance, log)
        ent = enablement_time(instance, log, relation)
        if instant:
            earliest = instance.end
        elif instance.resource is None:
            earliest = ent
        elif rat is None:
            earliest = ent
        elif ent is None:
            earliest = rat
        else:
            earliest = max(rat, ent)
        records.append(
            {"instance": instance, "rat": rat, "ent": ent,
             "earliest": earliest, "instant": instant, "capped": False}
        )

    if config.outlier_threshold is not None:
        by_activity: dict[str, list[timedelta]] = defaultdict(list)
        for record in records:
            if record["earliest"] is not None:
                activity = record["instance"].activity
                by_activity[activity].append(record["instance"].end - record["earliest"])
        typical = {
            activity: typical_repaired_duration(durations, config.statistic)
            for activity, durations in by_activity.items()
        }
        for record in records:
            if record["earliest"] is None or record["instant"]:
                continue
            cap = typical.get(record["instance"].activity)
            if cap is None:
                continue
            bound = config.outlier_threshold * cap
            if record["instance"].end - record["earliest"] > bound:
                record["earliest"] = record["instance"].end - bound
                record["capped"] = True

    repaired_instances: list[ActivityInstance] = []
    per_instance: list[InstanceRepair] = []
    for record in records:
        instance: ActivityInstance = record["instance"]
        earliest = record["earliest"]
        if record["instant"]:
            repaired, rule = instance.end, RULE_BOT_OR_INSTANT
        elif earliest is None:
            repaired, rule = instance.start, RULE_NO_EVIDENCE
        else:
            repaired = earliest
            rule = RULE_CAPPED if record["capped"] else RULE_ESTIMATED
            if not config.allow_later_start and repaired > instance.start:
                repaired, rule = instance.start, RULE_CLAMPED
            if repaired > instance.end:
                repaired = instance.end
        repaired_instances.append(replace(instance, start=repaired))
        per_instance.append(
            InstanceRepair(instance.start, record["rat"], record["ent"],
                           earliest, repaired, rule)
        )
    return RepairOutcome(ActivityInstanceLog(repaired_instances), tuple(per_instance))
