#!/usr/bin/env python3
"""Compare the six repair configurations (median/mode x no cap/5x/2x) on a
synthetic log with known ground truth.

For each configuration the corrupted log is repaired and scored against the
ground-truth log with timestamp and cycle-time EMD; lower is better. The
corrupted log itself is scored first as the baseline.
"""
from __future__ import annotations

import argparse

from startrepair import (
    GenSpec,
    RepairConfig,
    evaluate_logs,
    generate,
    repair_start_times,
)

CONFIGURATIONS = [
    ("MED", RepairConfig(statistic="median")),
    ("MED-5", RepairConfig(statistic="median", outlier_threshold=5.0)),
    ("MED-2", RepairConfig(statistic="median", outlier_threshold=2.0)),
    ("MOD", RepairConfig(statistic="mode")),
    ("MOD-5", RepairConfig(statistic="mode", outlier_threshold=5.0)),
    ("MOD-2", RepairConfig(statistic="mode", outlier_threshold=2.0)),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--traces", type=int, default=500)
    parser.add_argument("--resources", type=int, default=5)
    parser.add_argument("--max-delay", type=int, default=7200,
                        help="max injected start delay, seconds")
    args = parser.parse_args()

    spec = GenSpec(
        seed=args.seed,
        trace_count=args.traces,
        resource_count=args.resources,
        delay_range=(0, args.max_delay),
    )
    truth, corrupted = generate(spec)
    relation = spec.concurrency_pairs()

    print(f"{'config':8} {'timestamp EMD':>14} {'cycle-time EMD':>15}")
    baseline = evaluate_logs(truth, corrupted)
    print(f"{'RAW':8} {baseline.timestamp_emd:14.4f} "
          f"{baseline.cycle_time_emd:15.4f}")
    for name, config in CONFIGURATIONS:
        outcome = repair_start_times(corrupted, relation, config)
        result = evaluate_logs(truth, outcome.repaired_log)
        print(f"{name:8} {result.timestamp_emd:14.4f} "
              f"{result.cycle_time_emd:15.4f}")


if __name__ == "__main__":
    main()
