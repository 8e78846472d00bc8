from __future__ import annotations

from datetime import timedelta

import pytest
from hypothesis import given

from startrepair import (
    ActivityInstance,
    ActivityInstanceLog,
    ConcurrencyRelation,
    ConfigurationError,
    RepairConfig,
    discover_from_log,
    earliest_start,
    enablement_time,
    repair_start_times,
    resource_availability_time,
    typical_repaired_duration,
)
from startrepair.repair import (
    RULE_BOT_OR_INSTANT,
    RULE_CLAMPED,
    RULE_NO_EVIDENCE,
)

from .conftest import find, ts
from .strategies import instance_logs

EMPTY = ConcurrencyRelation()


def brute_force_rat(instance, log):
    """O(n^2) reference: max same-resource end strictly before this end."""
    if instance.resource is None:
        return None
    ends = [
        other.end
        for other in log.instances
        if other.resource == instance.resource and other.end < instance.end
    ]
    return max(ends) if ends else None


def brute_force_ent(instance, log, relation):
    ends = [
        other.end
        for other in log.instances
        if other.trace_id == instance.trace_id
        and other.end < instance.end
        and not relation.concurrent(other.activity, instance.activity)
    ]
    return max(ends) if ends else None


class TestResourceAvailability:
    def test_leela_deliver_package(self, shipping_log):
        instance = find(shipping_log, "24", "Deliver Package")
        assert resource_availability_time(instance, shipping_log) == ts(
            "2021-03-07 16:34:10"
        )

    def test_first_instance_of_resource_absent(self, shipping_log):
        instance = find(shipping_log, "23", "Register Order")
        assert resource_availability_time(instance, shipping_log) is None

    def test_fry_register_order_trace_24(self, shipping_log):
        instance = find(shipping_log, "24", "Register Order")
        assert resource_availability_time(instance, shipping_log) == ts(
            "2021-03-07 13:05:37"
        )

    def test_equal_end_is_not_previous(self):
        log = ActivityInstanceLog([
            ActivityInstance("1", "a", ts("2021-03-07 12:00:00"),
                             ts("2021-03-07 12:30:00"), "r"),
            ActivityInstance("2", "b", ts("2021-03-07 12:10:00"),
                             ts("2021-03-07 12:30:00"), "r"),
        ])
        for instance in log.instances:
            assert resource_availability_time(instance, log) is None


class TestEnablement:
    def test_deliver_package_trace_24(self, shipping_log):
        relation = discover_from_log(shipping_log)
        instance = find(shipping_log, "24", "Deliver Package")
        assert enablement_time(instance, shipping_log, relation) == ts(
            "2021-03-08 11:11:05"
        )

    def test_first_in_trace_absent(self, shipping_log):
        instance = find(shipping_log, "24", "Register Order")
        assert enablement_time(instance, shipping_log, EMPTY) is None

    def test_concurrent_predecessor_excluded(self, shipping_log):
        relation = ConcurrencyRelation([("Prepare Package", "Prepare Invoice")])
        instance = find(shipping_log, "24", "Prepare Package")
        # Prepare Invoice's end (15:43:01) is skipped; Register Order enables
        assert enablement_time(instance, shipping_log, relation) == ts(
            "2021-03-07 13:12:11"
        )


class TestEarliestStart:
    def test_max_of_rat_and_ent(self, shipping_log):
        relation = discover_from_log(shipping_log)
        instance = find(shipping_log, "24", "Deliver Package")
        assert earliest_start(instance, shipping_log, relation) == ts(
            "2021-03-08 11:11:05"
        )

    def test_bot_resource_pins_to_end(self, shipping_log):
        config = RepairConfig(bot_resources={"Leela"})
        instance = find(shipping_log, "24", "Deliver Package")
        assert earliest_start(instance, shipping_log, EMPTY, config) == instance.end

    def test_instant_activity_pins_to_end(self, shipping_log):
        config = RepairConfig(instant_activities={"Deliver Package"})
        instance = find(shipping_log, "24", "Deliver Package")
        assert earliest_start(instance, shipping_log, EMPTY, config) == instance.end

    def test_missing_resource_uses_enablement_only(self):
        log = ActivityInstanceLog([
            ActivityInstance("1", "a", ts("2021-03-07 12:00:00"),
                             ts("2021-03-07 12:30:00"), "r"),
            ActivityInstance("1", "b", ts("2021-03-07 12:45:00"),
                             ts("2021-03-07 13:00:00"), None),
        ])
        assert earliest_start(log.instances[1], log, EMPTY) == ts(
            "2021-03-07 12:30:00"
        )

    def test_no_evidence_is_absent(self):
        log = ActivityInstanceLog([
            ActivityInstance("1", "a", ts("2021-03-07 12:00:00"),
                             ts("2021-03-07 12:30:00"), "r"),
        ])
        assert earliest_start(log.instances[0], log, EMPTY) is None


class TestTypicalDuration:
    def seconds(self, values):
        return [timedelta(seconds=v) for v in values]

    def test_median_odd(self):
        assert typical_repaired_duration(self.seconds([10, 20, 30]), "median") == (
            timedelta(seconds=20)
        )

    def test_median_even_is_midpoint(self):
        assert typical_repaired_duration(
            self.seconds([10, 20, 30, 40]), "median"
        ) == timedelta(seconds=25)

    def test_mode_majority(self):
        assert typical_repaired_duration(
            self.seconds([10, 10, 500]), "mode"
        ) == timedelta(seconds=10)

    def test_mode_tie_breaks_to_smallest(self):
        assert typical_repaired_duration(
            self.seconds([30, 30, 10, 10, 500]), "mode"
        ) == timedelta(seconds=10)

    def test_mode_discretizes_to_whole_seconds(self):
        durations = [timedelta(seconds=10.2), timedelta(seconds=10.9),
                     timedelta(seconds=20)]
        assert typical_repaired_duration(durations, "mode") == timedelta(seconds=10)

    def test_empty_absent(self):
        assert typical_repaired_duration([], "median") is None


class TestRepairStartTimes:
    def test_shipping_deliver_package_repaired(self, shipping_log):
        relation = discover_from_log(shipping_log)
        outcome = repair_start_times(shipping_log, relation)
        repaired = find(outcome.repaired_log, "24", "Deliver Package")
        assert repaired.start == ts("2021-03-08 11:11:05")
        assert repaired.end - repaired.start == timedelta(hours=3, minutes=26,
                                                          seconds=1)

    def test_outlier_cap_re_estimates(self):
        # nine 1h instances and one 5h outlier; eta=2 caps the outlier at 2h
        instances = []
        base = ts("2021-03-07 08:00:00")
        for i in range(9):
            start = base + timedelta(hours=2 * i)
            instances.append(
                ActivityInstance("1", "a", start, start + timedelta(hours=1), "r")
            )
        tail = instances[-1].end
        instances.append(
            ActivityInstance("1", "a", tail + timedelta(hours=5),
                             tail + timedelta(hours=5, minutes=1), "r")
        )
        log = ActivityInstanceLog(instances)
        config = RepairConfig(statistic="median", outlier_threshold=2.0)
        outcome = repair_start_times(log, EMPTY, config)
        capped = outcome.per_instance[-1]
        # repaired durations run from the prior end: eight 2h values and the
        # 5h01m outlier, median 2h; the cap bounds the outlier at 4h
        assert capped.earliest_start == instances[-1].end - timedelta(hours=4)

    def test_fixpoint_log_unchanged(self):
        # sequential one-resource chain where each start equals the previous end
        base = ts("2021-03-07 08:00:00")
        instances = []
        cursor = base
        for activity in ("a", "b", "c"):
            instances.append(
                ActivityInstance("1", activity, cursor,
                                 cursor + timedelta(minutes=30), "r")
            )
            cursor += timedelta(minutes=30)
        log = ActivityInstanceLog(instances)
        outcome = repair_start_times(log, EMPTY)
        assert outcome.repaired_log == log

    def test_no_evidence_keeps_recorded_start(self):
        log = ActivityInstanceLog([
            ActivityInstance("1", "a", ts("2021-03-07 12:00:00"),
                             ts("2021-03-07 12:30:00"), "r"),
        ])
        outcome = repair_start_times(log, EMPTY)
        assert outcome.repaired_log == log
        assert outcome.per_instance[0].rule_applied == RULE_NO_EVIDENCE

    def test_bot_resource_start_set_to_end(self, shipping_log):
        config = RepairConfig(bot_resources={"Zoidberg"})
        outcome = repair_start_times(shipping_log, EMPTY, config)
        for record, instance in zip(outcome.per_instance, shipping_log.instances):
            if instance.resource == "Zoidberg":
                assert record.rule_applied == RULE_BOT_OR_INSTANT
                assert record.repaired_start == instance.end

    def test_later_estimate_clamped_by_default(self):
        # resource finishes "a" after "b" was recorded to start
        log = ActivityInstanceLog([
            ActivityInstance("1", "a", ts("2021-03-07 12:00:00"),
                             ts("2021-03-07 13:00:00"), "r"),
            ActivityInstance("2", "b", ts("2021-03-07 12:30:00"),
                             ts("2021-03-07 14:00:00"), "r"),
        ])
        outcome = repair_start_times(log, EMPTY)
        record = outcome.per_instance[1]
        assert record.earliest_start == ts("2021-03-07 13:00:00")
        assert record.repaired_start == ts("2021-03-07 12:30:00")
        assert record.rule_applied == RULE_CLAMPED

    def test_allow_later_start_moves_past_recorded(self):
        log = ActivityInstanceLog([
            ActivityInstance("1", "a", ts("2021-03-07 12:00:00"),
                             ts("2021-03-07 13:00:00"), "r"),
            ActivityInstance("2", "b", ts("2021-03-07 12:30:00"),
                             ts("2021-03-07 14:00:00"), "r"),
        ])
        outcome = repair_start_times(log, EMPTY,
                                     RepairConfig(allow_later_start=True))
        assert outcome.per_instance[1].repaired_start == ts("2021-03-07 13:00:00")

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            RepairConfig(statistic="mean")
        with pytest.raises(ConfigurationError):
            RepairConfig(outlier_threshold=1.0)


class TestRepairProperties:
    @given(instance_logs(max_size=12))
    def test_indexed_equals_brute_force(self, log):
        relation = discover_from_log(log)
        for instance in log.instances:
            assert resource_availability_time(instance, log) == brute_force_rat(
                instance, log
            )
            assert enablement_time(instance, log, relation) == brute_force_ent(
                instance, log, relation
            )

    @given(instance_logs(max_size=12))
    def test_repair_invariants(self, log):
        relation = discover_from_log(log)
        outcome = repair_start_times(log, relation)
        assert len(outcome.per_instance) == len(log)
        for record, before, after in zip(
            outcome.per_instance, log.instances, outcome.repaired_log.instances
        ):
            assert after.start <= after.end
            assert after.start <= before.start  # default clamp
            assert (after.trace_id, after.activity, after.end, after.resource) == (
                before.trace_id, before.activity, before.end, before.resource
            )
        # idempotence: repairing the repaired log never moves a start later
        again = repair_start_times(outcome.repaired_log, relation)
        for once, twice in zip(
            outcome.repaired_log.instances, again.repaired_log.instances
        ):
            assert twice.start <= once.start

    @given(instance_logs(max_size=12))
    def test_dominance_without_threshold(self, log):
        relation = discover_from_log(log)
        outcome = repair_start_times(log, relation)
        for record, instance in zip(outcome.per_instance, log.instances):
            if (
                record.rat is not None
                and record.ent is not None
                and max(record.rat, record.ent) <= instance.start
            ):
                assert record.repaired_start == max(record.rat, record.ent)

    @given(instance_logs(max_size=12))
    def test_rule_counts_sum_to_instances(self, log):
        outcome = repair_start_times(log, discover_from_log(log))
        assert sum(outcome.rule_counts().values()) == len(log)
