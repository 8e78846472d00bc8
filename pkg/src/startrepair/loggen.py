"""Deterministic synthetic log generator with known ground-truth start times."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from itertools import combinations
from typing import Mapping, Optional

from .concurrency import ConcurrencyRelation
from .model import ActivityInstance, ActivityInstanceLog, ConfigurationError

_EPOCH = datetime(2021, 3, 1, 8, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class GenSpec:
    """Generation parameters. Identical specs always produce identical logs.

    `stages` is the activity template each trace follows: one entry per stage,
    each stage holding one activity or several executed concurrently. Ground
    truth is built so every start equals max(previous same-resource end,
    previous-stage end, trace arrival); the corrupted twin delays each recorded
    start by a sampled amount of non-recorded processing time, never past the
    end. `multitasking` drops the resource-serialization constraint to test
    graceful degradation.
    """

    seed: int
    trace_count: int
    stages: tuple = (("Register",), ("Pack", "Invoice"), ("Deliver",))
    resource_count: int = 3
    duration_range: tuple[int, int] = (60, 3600)
    duration_ranges: Optional[Mapping[str, tuple[int, int]]] = None
    delay_range: tuple[int, int] = (0, 1800)
    arrival_gap_range: tuple[int, int] = (60, 1800)
    missing_resource_rate: float = 0.0
    multitasking: bool = False
    first_arrival: datetime = _EPOCH

    def __post_init__(self):
        if self.trace_count < 1:
            raise ConfigurationError("trace_count must be >= 1")
        if self.resource_count < 1:
            raise ConfigurationError("resource_count must be >= 1")
        stages = tuple(tuple(stage) for stage in self.stages)
        if not stages or any(not stage for stage in stages):
            raise ConfigurationError("stages must be non-empty")
        object.__setattr__(self, "stages", stages)
        for name in ("duration_range", "delay_range", "arrival_gap_range"):
            low, high = getattr(self, name)
            if low > high or low < 0:
                raise ConfigurationError(f"bad {name}: ({low}, {high})")
        if self.duration_range[0] < 1:
            raise ConfigurationError("durations must be >= 1 second")
        if not 0.0 <= self.missing_resource_rate <= 1.0:
            raise ConfigurationError("missing_resource_rate must be in [0, 1]")

    def concurrency_pairs(self) -> ConcurrencyRelation:
        """The relation implied by the template: pairs sharing a stage."""
        pairs = [
            pair
            for stage in self.stages
            for pair in combinations(stage, 2)
        ]
        return ConcurrencyRelation(pairs)

    @classmethod
    def from_dict(cls, data: dict) -> "GenSpec":
        known = dict(data)
        if "stages" in known:
            known["stages"] = tuple(
                (stage,) if isinstance(stage, str) else tuple(stage)
                for stage in known["stages"]
            )
        for key in ("duration_range", "delay_range", "arrival_gap_range"):
            if key in known:
                known[key] = tuple(known[key])
        if "duration_ranges" in known and known["duration_ranges"] is not None:
            known["duration_ranges"] = {
                activity: tuple(bounds)
                for activity, bounds in known["duration_ranges"].items()
            }
        if "first_arrival" in known and isinstance(known["first_arrival"], str):
            from .model import parse_timestamp

            known["first_arrival"] = parse_timestamp(known["first_arrival"])
        try:
            return cls(**known)
        except TypeError as exc:
            raise ConfigurationError(f"bad generator spec: {exc}") from None

    @classmethod
    def from_json(cls, source) -> "GenSpec":
        return cls.from_dict(json.load(source))


def _duration_bounds(spec: GenSpec, activity: str) -> tuple[int, int]:
    if spec.duration_ranges and activity in spec.duration_ranges:
        return spec.duration_ranges[activity]
    return spec.duration_range


def generate(spec: GenSpec) -> tuple[ActivityInstanceLog, ActivityInstanceLog]:
    """Return (ground_truth_log, corrupted_log) for the spec.

    Both logs are identical except for start times: the corrupted log delays
    each start by a sampled amount, capped at the instance's end.
    """
    rng = random.Random(spec.seed)
    resources = [f"R{i:02d}" for i in range(spec.resource_count)]
    resource_free: dict[str, Optional[datetime]] = {r: None for r in resources}
    truth: list[ActivityInstance] = []
    corrupted: list[ActivityInstance] = []

    arrival = spec.first_arrival
    for trace_number in range(spec.trace_count):
        if trace_number > 0:
            arrival = arrival + timedelta(seconds=rng.randint(*spec.arrival_gap_range))
        trace_id = f"T{trace_number:04d}"
        enablement = arrival
        for stage in spec.stages:
            stage_ends = []
            for activity in stage:
                resource = min(
                    resources,
                    key=lambda r: (resource_free[r] or spec.first_arrival, r),
                )
                free = resource_free[resource]
                if spec.multitasking or free is None:
                    start = enablement
                else:
                    start = max(enablement, free)
                duration = rng.randint(*_duration_bounds(spec, activity))
                end = start + timedelta(seconds=duration)
                resource_free[resource] = end
                recorded_resource: Optional[str] = resource
                if (
                    spec.missing_resource_rate > 0.0
                    and rng.random() < spec.missing_resource_rate
                ):
                    recorded_resource = None
                delay = timedelta(seconds=rng.randint(*spec.delay_range))
                truth.append(
                    ActivityInstance(trace_id, activity, start, end, recorded_resource)
                )
                corrupted.append(
                    ActivityInstance(
                        trace_id, activity, min(start + delay, end), end,
                        recorded_resource,
                    )
                )
                stage_ends.append(end)
            enablement = max(stage_ends)
    return ActivityInstanceLog(truth), ActivityInstanceLog(corrupted)
