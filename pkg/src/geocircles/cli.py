"""Operator entry points: ingest CSVs into a snapshot, serve the API, and run
ad-hoc queries whose JSON output is byte-identical to the API bodies."""

from __future__ import annotations

import argparse
import csv
import io
import json
import socket
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import GeocirclesError
from .ingest import build_dataset, parse_population_csv, parse_timeseries_csv
from .model import VariableKind
from .server import ServerConfig, run_server
from .service import (
    SnapshotState,
    build_frame_payload,
    build_series_payload,
    build_threshold_payload,
    dump_json,
)
from .snapshot import load_snapshot, save_snapshot

VARIABLE_FLAGS = {
    "confirmed": VariableKind.CONFIRMED,
    "deaths": VariableKind.DEATHS,
    "recovered": VariableKind.RECOVERED,
    "vaccinations": VariableKind.VACCINATIONS,
}

FRAME_PARAMS = ("start", "end", "date", "mode", "window", "agg", "vars", "rates",
                "level", "bbox", "zoom", "cluster_px", "max_markers",
                "scale_method", "scale_factor", "lat", "lon")
SERIES_PARAMS = ("focus", "baseline", "start", "end", "window", "agg",
                 "vars", "rates")
THRESHOLD_PARAMS = ("metric", "op", "value", "level", "bbox", "zoom",
                    "start", "end", "window")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geocircles",
        description="Ingest epidemic time-series CSVs and serve geocircle frames.")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="parse CSVs and write a snapshot")
    for flag in VARIABLE_FLAGS:
        ingest.add_argument(f"--{flag}", type=Path, help=f"{flag} time-series CSV")
    ingest.add_argument("--population", type=Path, help="UID lookup CSV")
    ingest.add_argument("--out", type=Path, required=True, help="snapshot directory")

    serve = sub.add_parser("serve", help="serve the HTTP API from a snapshot")
    serve.add_argument("--config", type=Path, help="TOML config file")

    query = sub.add_parser("query", help="run one query against a snapshot")
    query.add_argument("--snapshot", type=Path, required=True)
    query.add_argument("--format", choices=("json", "csv"), default="json")
    query_sub = query.add_subparsers(dest="query_command", required=True)
    for name, params in (("frame", FRAME_PARAMS), ("series", SERIES_PARAMS),
                         ("threshold", THRESHOLD_PARAMS)):
        command = query_sub.add_parser(name)
        for param in params:
            command.add_argument(f"--{param.replace('_', '-')}", dest=param)
    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    tables = []
    current_file: Optional[Path] = None
    try:
        for flag, variable in VARIABLE_FLAGS.items():
            path = getattr(args, flag)
            if path is None:
                continue
            current_file = path
            with open(path, "rb") as handle:
                tables.append(parse_timeseries_csv(handle, variable))
        if not tables:
            print("error: need at least one time-series CSV", file=sys.stderr)
            return 1
        populations = None
        if args.population is not None:
            current_file = args.population
            with open(args.population, "rb") as handle:
                populations = parse_population_csv(handle)
        current_file = None
        dataset = build_dataset(tables, populations)
    except (GeocirclesError, OSError) as exc:
        location = f" in {current_file}" if current_file else ""
        print(f"error{location}: {exc}", file=sys.stderr)
        return 1
    save_snapshot(dataset, args.out)
    print(json.dumps(dataset.report.to_dict(), indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        config = ServerConfig.from_toml(args.config) if args.config \
            else ServerConfig().with_env_overrides()
    except (OSError, ValueError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 1
    try:
        load_snapshot(config.data_dir)
    except FileNotFoundError:
        print(f"error: no snapshot in {config.data_dir}; run `geocircles ingest` first",
              file=sys.stderr)
        return 1
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        print(f"error: cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        return 1
    finally:
        probe.close()
    run_server(config)
    return 0


def _frame_csv(payload: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["target", "label", "lat", "lon", "members", "highlight",
                     "kind", "name", "value", "radius_px", "stroke", "color"])
    for entry in payload["entries"]:
        for circle in entry["circles"]:
            writer.writerow([
                entry["target"], entry["label"], entry["lat"], entry["lon"],
                "|".join(entry["members"]), entry["highlight"],
                circle["kind"], circle["name"], circle["value"],
                circle["radius_px"], circle["stroke"], circle["color"],
            ])
    return out.getvalue()


def _series_csv(payload: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["date", "side", "region", "kind", "name", "value"])
    for row in payload["rows"]:
        sides = [("focus", payload["focus"], row["focus"])]
        if row["baseline"] is not None:
            sides.append(("baseline", payload["baseline"], row["baseline"]))
        for side, region, cells in sides:
            for name, value in cells["variables"].items():
                writer.writerow([row["date"], side, region, "variable", name,
                                 "" if value is None else value])
            for name, value in cells["rates"].items():
                writer.writerow([row["date"], side, region, "rate", name,
                                 "" if value is None else value])
    return out.getvalue()


def _threshold_csv(payload: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["region", "date"])
    for result in payload["results"]:
        for date in result["dates"]:
            writer.writerow([result["region"], date])
    return out.getvalue()


def cmd_query(args: argparse.Namespace) -> int:
    try:
        dataset = load_snapshot(args.snapshot)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    state = SnapshotState(dataset)

    builders = {
        "frame": (build_frame_payload, FRAME_PARAMS, _frame_csv),
        "series": (build_series_payload, SERIES_PARAMS, _series_csv),
        "threshold": (build_threshold_payload, THRESHOLD_PARAMS, _threshold_csv),
    }
    builder, param_names, to_csv = builders[args.query_command]
    raw = {name: getattr(args, name) for name in param_names
           if getattr(args, name, None) is not None}
    try:
        payload = builder(state, raw)
    except (GeocirclesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "csv":
        # _canonical is applied by dump_json for JSON; round-trip once here
        # so CSV cells use the same number formatting.
        payload = json.loads(dump_json(payload))
        sys.stdout.write(to_csv(payload))
    else:
        sys.stdout.write(dump_json(payload))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "ingest":
        return cmd_ingest(args)
    if args.command == "serve":
        return cmd_serve(args)
    return cmd_query(args)


if __name__ == "__main__":
    sys.exit(main())
