"""Command-line front end: repair, evaluate, generate, and concurrency subcommands."""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import concurrency as conc
from . import evaluate as ev
from . import loggen
from .model import (
    ActivityInstanceLog,
    ColumnMapping,
    ConfigurationError,
    LogFormatError,
    parse_event_log,
    read_instance_log,
    to_activity_instances,
    write_activity_instance_log,
)
from .repair import RepairConfig, repair_start_times

# keys accepted in the flat JSON config file; command-line flags override
CONFIG_KEYS = (
    "input", "output", "report",
    "case_column", "activity_column", "start_column", "end_column",
    "timestamp_column", "lifecycle_column", "resource_column",
    "statistic", "outlier_threshold", "bot_resources", "instant_activities",
    "allow_later_start",
    "balance_threshold", "df_threshold", "concurrency_file",
)


def _load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a flat JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {unknown}")
    return data


def _resolve(args: argparse.Namespace, file_values: dict) -> dict:
    """Merge config-file values with flags; flags win when given."""
    resolved = dict(file_values)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _label_set(value) -> frozenset:
    """A comma-separated list, a JSON list, or a path to a file of labels."""
    if value is None:
        return frozenset()
    if isinstance(value, (list, tuple, set, frozenset)):
        return frozenset(str(v) for v in value)
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as handle:
            return frozenset(line.strip() for line in handle if line.strip())
    return frozenset(part.strip() for part in value.split(",") if part.strip())


def _mapping_from(resolved: dict) -> ColumnMapping:
    if resolved.get("timestamp_column") or resolved.get("lifecycle_column"):
        return ColumnMapping(
            trace_id=resolved.get("case_column", "case_id"),
            activity=resolved.get("activity_column", "activity"),
            start_time=None,
            end_time=None,
            timestamp=resolved.get("timestamp_column", "timestamp"),
            lifecycle=resolved.get("lifecycle_column", "lifecycle"),
            resource=resolved.get("resource_column", "resource"),
        )
    return ColumnMapping(
        trace_id=resolved.get("case_column", "case_id"),
        activity=resolved.get("activity_column", "activity"),
        start_time=resolved.get("start_column", "start_time"),
        end_time=resolved.get("end_column", "end_time"),
        resource=resolved.get("resource_column", "resource"),
    )


def _read_log(path: str, mapping: ColumnMapping):
    with open(path, encoding="utf-8", newline="") as handle:
        if mapping.is_event_per_row:
            log, summary = to_activity_instances(parse_event_log(handle, mapping))
            return log, summary
        return read_instance_log(handle, mapping), None


def _relation_for(log: ActivityInstanceLog, resolved: dict) -> conc.ConcurrencyRelation:
    if resolved.get("concurrency_file"):
        with open(resolved["concurrency_file"], encoding="utf-8", newline="") as handle:
            return conc.load_concurrency(handle)
    thresholds = conc.OracleThresholds(
        df_threshold=float(resolved.get("df_threshold", 0.05)),
        balance_threshold=float(resolved.get("balance_threshold", 0.75)),
    )
    return conc.discover_from_log(log, thresholds)


def _emit_report(report: dict, path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _run_repair(args: argparse.Namespace) -> int:
    resolved = _resolve(args, _load_config_file(args.config))
    if "input" not in resolved or "output" not in resolved:
        raise ConfigurationError("repair needs --input and --output")
    mapping = _mapping_from(resolved)
    log, summary = _read_log(resolved["input"], mapping)
    relation = _relation_for(log, resolved)
    threshold = resolved.get("outlier_threshold")
    config = RepairConfig(
        statistic=resolved.get("statistic", "median"),
        outlier_threshold=float(threshold) if threshold is not None else None,
        bot_resources=_label_set(resolved.get("bot_resources")),
        instant_activities=_label_set(resolved.get("instant_activities")),
        allow_later_start=bool(resolved.get("allow_later_start", False)),
    )
    outcome = repair_start_times(log, relation, config)
    with open(resolved["output"], "w", encoding="utf-8", newline="") as handle:
        write_activity_instance_log(outcome.repaired_log, handle)
    report = {
        "instances": len(log),
        "rule_counts": outcome.rule_counts(),
        "concurrency_pairs": [list(p) for p in relation.sorted_pairs()],
        "config": {
            "statistic": config.statistic,
            "outlier_threshold": config.outlier_threshold,
            "bot_resources": sorted(config.bot_resources),
            "instant_activities": sorted(config.instant_activities),
            "allow_later_start": config.allow_later_start,
            "balance_threshold": float(resolved.get("balance_threshold", 0.75)),
            "df_threshold": float(resolved.get("df_threshold", 0.05)),
            "concurrency_file": resolved.get("concurrency_file"),
            "input": resolved["input"],
            "output": resolved["output"],
        },
    }
    if summary is not None:
        report["pairing"] = vars(summary)
    _emit_report(report, resolved.get("report"))
    return 0


def _run_evaluate(args: argparse.Namespace) -> int:
    mapping = _mapping_from(_resolve(args, _load_config_file(args.config)))
    reference, _ = _read_log(args.reference, mapping)
    other, _ = _read_log(args.other, mapping)
    report = ev.evaluate_logs(reference, other, dump_dir=args.dump_histograms)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"timestamp EMD (hours):      {report.timestamp_emd:.6f}")
        print(f"cycle-time EMD (bin units): {report.cycle_time_emd:.6f}")
        print(f"reference mass: {report.reference_mass:.0f} "
              f"({report.reference_bins} bins)")
        print(f"other mass:     {report.other_mass:.0f} ({report.other_bins} bins)")
        print(f"cycle bin width: {report.bin_width_seconds:.3f} s")
    return 0


def _run_generate(args: argparse.Namespace) -> int:
    with open(args.spec, encoding="utf-8") as handle:
        spec = loggen.GenSpec.from_json(handle)
    truth, corrupted = loggen.generate(spec)
    for path, log in ((args.out_truth, truth), (args.out_corrupted, corrupted)):
        with open(path, "w", encoding="utf-8", newline="") as handle:
            write_activity_instance_log(log, handle)
    return 0


def _run_concurrency(args: argparse.Namespace) -> int:
    resolved = _resolve(args, _load_config_file(args.config))
    if "input" not in resolved:
        raise ConfigurationError("concurrency needs --input")
    log, _ = _read_log(resolved["input"], _mapping_from(resolved))
    relation = _relation_for(log, resolved)
    if resolved.get("output"):
        with open(resolved["output"], "w", encoding="utf-8", newline="") as handle:
            conc.write_concurrency(relation, handle)
    else:
        conc.write_concurrency(relation, sys.stdout)
    return 0


def _add_mapping_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--case-column", dest="case_column")
    parser.add_argument("--activity-column", dest="activity_column")
    parser.add_argument("--start-column", dest="start_column")
    parser.add_argument("--end-column", dest="end_column")
    parser.add_argument("--timestamp-column", dest="timestamp_column")
    parser.add_argument("--lifecycle-column", dest="lifecycle_column")
    parser.add_argument("--resource-column", dest="resource_column")


def _add_oracle_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--balance-threshold", dest="balance_threshold", type=float)
    parser.add_argument("--df-threshold", dest="df_threshold", type=float)
    parser.add_argument("--concurrency-file", dest="concurrency_file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="startrepair",
        description="Repair event-log start times and compare logs with EMD.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    repair = sub.add_parser("repair", help="repair start times of an event log")
    repair.add_argument("--input", dest="input")
    repair.add_argument("--output", dest="output")
    repair.add_argument("--config")
    repair.add_argument("--report", dest="report")
    repair.add_argument("--statistic", choices=("median", "mode"))
    repair.add_argument("--outlier-threshold", dest="outlier_threshold", type=float)
    repair.add_argument("--bot-resources", dest="bot_resources",
                        help="comma list or file of bot resource labels")
    repair.add_argument("--instant-activities", dest="instant_activities",
                        help="comma list or file of instant activity labels")
    repair.add_argument("--allow-later-start", dest="allow_later_start",
                        action="store_const", const=True)
    _add_oracle_flags(repair)
    _add_mapping_flags(repair)
    repair.set_defaults(handler=_run_repair)

    evaluate = sub.add_parser("evaluate", help="EMD comparison of two logs")
    evaluate.add_argument("--reference", required=True)
    evaluate.add_argument("--other", required=True)
    evaluate.add_argument("--format", choices=("json", "text"), default="json")
    evaluate.add_argument("--dump-histograms", dest="dump_histograms")
    evaluate.add_argument("--config")
    _add_mapping_flags(evaluate)
    evaluate.set_defaults(handler=_run_evaluate)

    generate = sub.add_parser("generate", help="generate a synthetic log pair")
    generate.add_argument("--spec", required=True, help="JSON generator spec")
    generate.add_argument("--out-truth", required=True)
    generate.add_argument("--out-corrupted", required=True)
    generate.set_defaults(handler=_run_generate)

    concurrency = sub.add_parser("concurrency",
                                 help="discover or echo the concurrency relation")
    concurrency.add_argument("--input", dest="input")
    concurrency.add_argument("--output", dest="output")
    concurrency.add_argument("--config")
    _add_oracle_flags(concurrency)
    _add_mapping_flags(concurrency)
    concurrency.set_defaults(handler=_run_concurrency)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigurationError, LogFormatError, OSError, json.JSONDecodeError,
            ValueError) as exc:
        print(f"startrepair: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
