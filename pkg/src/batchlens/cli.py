"""Command line interface: batchlens {ingest|serve|report|synth}.

Exit codes: 0 success, 1 validation/processing failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .anomaly import DetectorConfig, events_csv, scan_window
from .api import ServiceConfig, serve
from .errors import BatchLensError
from .ingest import load_bundle, write_manifest
from .store import TimeWindow, build_store
from .synth import SynthConfig, generate_synthetic


def _cmd_ingest(args) -> int:
    try:
        bundle, report = load_bundle(args.path)
    except BatchLensError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    print(report.summary())
    manifest_path = write_manifest(bundle)
    print(f"manifest written to {manifest_path}")
    return 0 if report.ok else 1


def _cmd_serve(args) -> int:
    config = ServiceConfig.load(args.config)
    if args.bundle:
        config.bundle_path = args.bundle
    if args.addr:
        config.bind_address = args.addr
    try:
        serve(config)
    except BatchLensError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_report(args) -> int:
    try:
        bundle, report = load_bundle(args.path)
        store = build_store(bundle)
    except BatchLensError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    if not report.ok:
        print(report.summary(), file=sys.stderr)
        return 1

    t_from = args.t_from if args.t_from is not None else 0
    t_to = args.t_to if args.t_to is not None else store.horizon.t_to
    if t_from >= t_to:
        print(f"fatal: empty window [{t_from}, {t_to})", file=sys.stderr)
        return 1

    detector_cfg = DetectorConfig()
    if args.detector_config:
        detector_cfg = DetectorConfig.from_dict(
            json.loads(Path(args.detector_config).read_text("utf-8")))
    events = scan_window(store, TimeWindow(t_from, t_to), detector_cfg)

    out_dir = Path(args.out) if args.out else Path(args.path)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "anomalies.csv").write_text(events_csv(events), encoding="utf-8")
    (out_dir / "anomalies.json").write_text(
        json.dumps([e.to_dict() for e in events], indent=2) + "\n", encoding="utf-8")

    stats = store.distribution_stats()
    summary = "\n".join([
        f"window: [{t_from}, {t_to})",
        f"jobs: {stats.job_count}",
        f"machines: {stats.machine_count}",
        f"single-task job fraction: {stats.fraction_single_task_jobs:.4f}",
        f"multi-instance task fraction: {stats.fraction_multi_instance_tasks:.4f}",
        f"anomaly events: {len(events)}",
    ]) + "\n"
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")
    print(f"reports written to {out_dir}")
    return 0


def _cmd_synth(args) -> int:
    raw: dict = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text("utf-8"))
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.machines is not None:
        raw["machine_count"] = args.machines
    if args.jobs is not None:
        raw["job_count"] = args.jobs
    if args.horizon is not None:
        raw["horizon_seconds"] = args.horizon
    if args.resolution is not None:
        raw["usage_resolution_s"] = args.resolution
    if args.mix:
        mix = {}
        for part in args.mix.split(","):
            name, _, count = part.partition("=")
            mix[name.strip()] = int(count)
        raw["scenario_mix"] = mix
        raw.setdefault("job_count", sum(mix.values()))
    try:
        cfg = SynthConfig.from_dict(raw)
        bundle = generate_synthetic(cfg, args.out_dir)
    except (BatchLensError, TypeError, ValueError) as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    m = bundle.manifest
    print(f"bundle written to {bundle.root_path}: {m.machine_count} machines, "
          f"{m.job_count} jobs, horizon {m.horizon_seconds}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="batchlens",
                                     description="cluster-trace analytics workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a bundle directory and write its manifest")
    p.add_argument("path", help="bundle directory")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("serve", help="serve the HTTP JSON API over a bundle")
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--bundle", help="bundle directory (overrides config)")
    p.add_argument("--addr", help="host:port to bind (overrides config)")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("report", help="scan for anomalies and write CSV/JSON reports")
    p.add_argument("path", help="bundle directory")
    p.add_argument("--from", dest="t_from", type=int, help="window start (seconds)")
    p.add_argument("--to", dest="t_to", type=int, help="window end (seconds, exclusive)")
    p.add_argument("--out", help="output directory (default: bundle directory)")
    p.add_argument("--detector-config", help="JSON file with detector thresholds")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate a labeled synthetic bundle")
    p.add_argument("out_dir", help="output directory")
    p.add_argument("--config", help="JSON file with generator settings")
    p.add_argument("--seed", type=int)
    p.add_argument("--machines", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--horizon", type=int, help="horizon in seconds")
    p.add_argument("--resolution", type=int, help="usage resolution in seconds")
    p.add_argument("--mix", help="scenario mix, e.g. stable_low=15,spike=3")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
