"""Trace table parsing, validation, and bundle loading.

A trace bundle is a directory with three CSV tables plus a JSON manifest:

    server_usage.csv    timestamp,machine_id,cpu_util,mem_util,disk_util
    batch_task.csv      create_ts,end_ts,job_id,task_id,instance_count,status
    batch_instance.csv  start_ts,end_ts,job_id,task_id,machine_id,status
    manifest.json       counts, time range and resolutions (stable key order)

Timestamps are trace-relative integer seconds. An empty end_ts means the
entity was still running at the trace horizon. Every parser returns the
accepted records together with a ValidationReport; a malformed row is
always either accepted or reported, never silently dropped.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import (
    BAD_DEPENDENCIES,
    BAD_FIELD,
    BAD_ROW,
    CLAMPED,
    DANGLING_PARENT,
    DUPLICATE_KEY,
    EMPTY_TABLE,
    MANIFEST_DRIFT,
    MISSING_FIELD,
    MISSING_TABLE,
    NEGATIVE_DURATION,
    UNKNOWN_STATUS,
    FatalIngestError,
)

USAGE_TABLE = "server_usage"
TASK_TABLE = "batch_task"
INSTANCE_TABLE = "batch_instance"

USAGE_HEADER = "timestamp,machine_id,cpu_util,mem_util,disk_util"
TASK_HEADER = "create_ts,end_ts,job_id,task_id,instance_count,status"
INSTANCE_HEADER = "start_ts,end_ts,job_id,task_id,machine_id,status"

MANIFEST_NAME = "manifest.json"
LABELS_NAME = "labels.json"
FORMAT_VERSION = 1

# Manifest keys in canonical serialization order.
MANIFEST_KEYS = (
    "epoch_ts",
    "horizon_seconds",
    "usage_resolution_s",
    "scheduler_resolution_s",
    "machine_count",
    "job_count",
    "task_count",
    "instance_count",
    "format_version",
)


class Status(Enum):
    WAITING = "Waiting"
    RUNNING = "Running"
    TERMINATED = "Terminated"
    FAILED = "Failed"
    CANCELLED = "Cancelled"


_STATUS_BY_LOWER = {s.value.lower(): s for s in Status}


@dataclass(frozen=True)
class MetricSample:
    timestamp: int
    machine_id: str
    cpu_util: float
    mem_util: float
    disk_util: float


@dataclass(frozen=True)
class TaskRecord:
    job_id: str
    task_id: str
    create_ts: int
    end_ts: int | None
    instance_count: int
    status: Status
    dependencies: tuple[str, ...] = ()


@dataclass(frozen=True)
class InstanceRecord:
    job_id: str
    task_id: str
    machine_id: str
    start_ts: int
    end_ts: int | None
    status: Status


@dataclass(frozen=True)
class RowIssue:
    table: str
    row_number: int
    code: str
    message: str


@dataclass
class ValidationReport:
    errors: list[RowIssue] = field(default_factory=list)
    warnings: list[RowIssue] = field(default_factory=list)
    rows_accepted: dict[str, int] = field(default_factory=dict)
    rows_rejected: dict[str, int] = field(default_factory=dict)

    def error(self, table: str, row: int, code: str, message: str) -> None:
        self.errors.append(RowIssue(table, row, code, message))

    def warn(self, table: str, row: int, code: str, message: str) -> None:
        self.warnings.append(RowIssue(table, row, code, message))

    def count_accepted(self, table: str) -> None:
        self.rows_accepted[table] = self.rows_accepted.get(table, 0) + 1

    def count_rejected(self, table: str) -> None:
        self.rows_rejected[table] = self.rows_rejected.get(table, 0) + 1

    def rows_read(self, table: str) -> int:
        return self.rows_accepted.get(table, 0) + self.rows_rejected.get(table, 0)

    @property
    def ok(self) -> bool:
        return not self.errors

    def merge(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)
        for table, n in other.rows_accepted.items():
            self.rows_accepted[table] = self.rows_accepted.get(table, 0) + n
        for table, n in other.rows_rejected.items():
            self.rows_rejected[table] = self.rows_rejected.get(table, 0) + n

    def summary(self) -> str:
        lines = []
        for table in sorted(set(self.rows_accepted) | set(self.rows_rejected)):
            lines.append(
                f"{table}: {self.rows_accepted.get(table, 0)} accepted, "
                f"{self.rows_rejected.get(table, 0)} rejected"
            )
        lines.append(f"errors: {len(self.errors)}, warnings: {len(self.warnings)}")
        for issue in self.errors[:20]:
            lines.append(f"  ERROR {issue.table}:{issue.row_number} {issue.code} {issue.message}")
        if len(self.errors) > 20:
            lines.append(f"  ... and {len(self.errors) - 20} more errors")
        return "\n".join(lines)


@dataclass(frozen=True)
class BundleManifest:
    epoch_ts: int
    horizon_seconds: int
    usage_resolution_s: int
    scheduler_resolution_s: int
    machine_count: int
    job_count: int
    task_count: int
    instance_count: int
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in MANIFEST_KEYS}

    @classmethod
    def from_dict(cls, d: dict) -> "BundleManifest":
        return cls(**{k: int(d[k]) for k in MANIFEST_KEYS if k in d})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass
class TraceBundle:
    root_path: Path
    manifest: BundleManifest
    samples: list[MetricSample]
    tasks: list[TaskRecord]
    instances: list[InstanceRecord]


def _decode_lines(stream: IO[bytes] | IO[str] | Iterable[str]) -> Iterator[str]:
    """Yield text lines from a byte or text stream; raises FatalIngestError."""
    try:
        data = stream.read() if hasattr(stream, "read") else None
    except OSError as exc:
        raise FatalIngestError(f"unreadable stream: {exc}") from exc
    if data is None:
        yield from stream  # already an iterable of lines
        return
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FatalIngestError(f"stream is not UTF-8: {exc}") from exc
    for line in data.split("\n"):
        yield line


def _parse_int(token: str) -> int:
    token = token.strip()
    if not re.fullmatch(r"-?\d+", token):
        raise ValueError(f"not a base-10 integer: {token!r}")
    return int(token)


def _parse_float(token: str) -> float:
    value = float(token.strip())
    if not math.isfinite(value):
        raise ValueError(f"not finite: {token!r}")
    return value


def _parse_status(token: str, table: str, row: int, report: ValidationReport) -> Status:
    status = _STATUS_BY_LOWER.get(token.strip().lower())
    if status is None:
        report.warn(table, row, UNKNOWN_STATUS, f"unknown status {token!r}, treated as Running")
        return Status.RUNNING
    return status


_TASK_NAME_RE = re.compile(r"^([A-Za-z]+)(\d+)$")


def parse_task_dependencies(task_id: str) -> tuple[tuple[str, ...], bool]:
    """Decode prerequisite tasks from a task_id of the form task_<name>(_<dep>)*.

    Each numeric suffix k names the sibling task whose name shares this
    task's letter prefix, e.g. task_M3_1_2 depends on task_M1 and task_M2.
    Returns (dependencies, parse_ok); ids that do not follow the convention
    yield no dependencies, with parse_ok False when suffixes were present
    but unintelligible.
    """
    if not task_id.startswith("task_"):
        return (), True
    tokens = task_id[len("task_"):].split("_")
    if len(tokens) == 1:
        return (), True
    m = _TASK_NAME_RE.match(tokens[0])
    if m is None:
        return (), False
    prefix = m.group(1)
    deps = []
    for tok in tokens[1:]:
        if not tok.isdigit():
            return (), False
        deps.append(f"task_{prefix}{tok}")
    return tuple(deps), True


def parse_server_usage(stream) -> tuple[list[MetricSample], ValidationReport]:
    """Parse the machine-usage table; utilizations are clamped to [0, 100]."""
    report = ValidationReport()
    samples: list[MetricSample] = []
    lines = _decode_lines(stream)
    header = next(lines, None)
    if header is None or header.strip() != USAGE_HEADER:
        raise FatalIngestError(f"{USAGE_TABLE}: missing or wrong header row (expected {USAGE_HEADER!r})")
    for row, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split(",")
        if len(fields) != 5:
            report.error(USAGE_TABLE, row, BAD_ROW, f"expected 5 fields, got {len(fields)}")
            report.count_rejected(USAGE_TABLE)
            continue
        ts_s, machine_id, cpu_s, mem_s, disk_s = (f.strip() for f in fields)
        missing = [name for name, tok in
                   (("timestamp", ts_s), ("machine_id", machine_id),
                    ("cpu_util", cpu_s), ("mem_util", mem_s), ("disk_util", disk_s))
                   if not tok]
        if missing:
            report.error(USAGE_TABLE, row, MISSING_FIELD, f"missing {', '.join(missing)}")
            report.count_rejected(USAGE_TABLE)
            continue
        try:
            ts = _parse_int(ts_s)
            cpu, mem, disk = _parse_float(cpu_s), _parse_float(mem_s), _parse_float(disk_s)
        except ValueError as exc:
            report.error(USAGE_TABLE, row, BAD_FIELD, str(exc))
            report.count_rejected(USAGE_TABLE)
            continue
        if ts < 0:
            report.error(USAGE_TABLE, row, BAD_FIELD, f"negative timestamp {ts}")
            report.count_rejected(USAGE_TABLE)
            continue
        clamped = []
        values = []
        for name, v in (("cpu_util", cpu), ("mem_util", mem), ("disk_util", disk)):
            if v < 0.0 or v > 100.0:
                clamped.append(f"{name}={v}")
                v = min(100.0, max(0.0, v))
            values.append(v)
        if clamped:
            report.warn(USAGE_TABLE, row, CLAMPED, f"clamped to [0,100]: {', '.join(clamped)}")
        samples.append(MetricSample(ts, machine_id, *values))
        report.count_accepted(USAGE_TABLE)
    return samples, report


def _next_data_lines(stream, expected_header: str) -> Iterator[tuple[int, str]]:
    """Yield (row_number, line) pairs, skipping an optional header row."""
    lines = _decode_lines(stream)
    first = next(lines, None)
    if first is None:
        return
    if first.strip() != expected_header:
        yield 1, first
    for row, line in enumerate(lines, start=2):
        yield row, line


def parse_batch_tasks(stream) -> tuple[list[TaskRecord], ValidationReport]:
    """Parse the task table; dependencies are decoded from task_id suffixes."""
    report = ValidationReport()
    records: list[TaskRecord] = []
    seen: set[tuple[str, str]] = set()
    for row, line in _next_data_lines(stream, TASK_HEADER):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split(",")
        if len(fields) != 6:
            report.error(TASK_TABLE, row, BAD_ROW, f"expected 6 fields, got {len(fields)}")
            report.count_rejected(TASK_TABLE)
            continue
        create_s, end_s, job_id, task_id, count_s, status_s = (f.strip() for f in fields)
        missing = [name for name, tok in
                   (("create_ts", create_s), ("job_id", job_id),
                    ("task_id", task_id), ("instance_count", count_s), ("status", status_s))
                   if not tok]
        if missing:
            report.error(TASK_TABLE, row, MISSING_FIELD, f"missing {', '.join(missing)}")
            report.count_rejected(TASK_TABLE)
            continue
        try:
            create_ts = _parse_int(create_s)
            end_ts = _parse_int(end_s) if end_s else None
            instance_count = _parse_int(count_s)
        except ValueError as exc:
            report.error(TASK_TABLE, row, BAD_FIELD, str(exc))
            report.count_rejected(TASK_TABLE)
            continue
        if instance_count < 1:
            report.error(TASK_TABLE, row, BAD_FIELD, f"instance_count must be >= 1, got {instance_count}")
            report.count_rejected(TASK_TABLE)
            continue
        if end_ts is not None and end_ts < create_ts:
            report.error(TASK_TABLE, row, NEGATIVE_DURATION, f"end_ts {end_ts} < create_ts {create_ts}")
            report.count_rejected(TASK_TABLE)
            continue
        if (job_id, task_id) in seen:
            report.error(TASK_TABLE, row, DUPLICATE_KEY, f"duplicate ({job_id}, {task_id})")
            report.count_rejected(TASK_TABLE)
            continue
        status = _parse_status(status_s, TASK_TABLE, row, report)
        deps, deps_ok = parse_task_dependencies(task_id)
        if not deps_ok:
            report.warn(TASK_TABLE, row, BAD_DEPENDENCIES,
                        f"cannot decode dependencies from task_id {task_id!r}")
        seen.add((job_id, task_id))
        records.append(TaskRecord(job_id, task_id, create_ts, end_ts, instance_count, status, deps))
        report.count_accepted(TASK_TABLE)
    return records, report


def parse_batch_instances(stream) -> tuple[list[InstanceRecord], ValidationReport]:
    """Parse the instance table; each row binds exactly one machine."""
    report = ValidationReport()
    records: list[InstanceRecord] = []
    for row, line in _next_data_lines(stream, INSTANCE_HEADER):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split(",")
        if len(fields) != 6:
            report.error(INSTANCE_TABLE, row, BAD_ROW, f"expected 6 fields, got {len(fields)}")
            report.count_rejected(INSTANCE_TABLE)
            continue
        start_s, end_s, job_id, task_id, machine_id, status_s = (f.strip() for f in fields)
        missing = [name for name, tok in
                   (("start_ts", start_s), ("job_id", job_id), ("task_id", task_id),
                    ("machine_id", machine_id), ("status", status_s))
                   if not tok]
        if missing:
            report.error(INSTANCE_TABLE, row, MISSING_FIELD, f"missing {', '.join(missing)}")
            report.count_rejected(INSTANCE_TABLE)
            continue
        try:
            start_ts = _parse_int(start_s)
            end_ts = _parse_int(end_s) if end_s else None
        except ValueError as exc:
            report.error(INSTANCE_TABLE, row, BAD_FIELD, str(exc))
            report.count_rejected(INSTANCE_TABLE)
            continue
        if end_ts is not None and end_ts < start_ts:
            report.error(INSTANCE_TABLE, row, NEGATIVE_DURATION, f"end_ts {end_ts} < start_ts {start_ts}")
            report.count_rejected(INSTANCE_TABLE)
            continue
        status = _parse_status(status_s, INSTANCE_TABLE, row, report)
        records.append(InstanceRecord(job_id, task_id, machine_id, start_ts, end_ts, status))
        report.count_accepted(INSTANCE_TABLE)
    return records, report


def _fmt_opt(ts: int | None) -> str:
    return "" if ts is None else str(ts)


def usage_csv(samples: Iterable[MetricSample]) -> str:
    lines = [USAGE_HEADER]
    for s in samples:
        lines.append(f"{s.timestamp},{s.machine_id},{s.cpu_util},{s.mem_util},{s.disk_util}")
    return "\n".join(lines) + "\n"


def task_csv(records: Iterable[TaskRecord]) -> str:
    lines = [TASK_HEADER]
    for r in records:
        lines.append(f"{r.create_ts},{_fmt_opt(r.end_ts)},{r.job_id},{r.task_id},{r.instance_count},{r.status.value}")
    return "\n".join(lines) + "\n"


def instance_csv(records: Iterable[InstanceRecord]) -> str:
    lines = [INSTANCE_HEADER]
    for r in records:
        lines.append(f"{r.start_ts},{_fmt_opt(r.end_ts)},{r.job_id},{r.task_id},{r.machine_id},{r.status.value}")
    return "\n".join(lines) + "\n"


def _modal_gap(values: list[int]) -> int | None:
    """Most frequent positive gap between consecutive values; ties go small."""
    gaps = Counter(b - a for a, b in zip(values, values[1:]) if b > a)
    if not gaps:
        return None
    best = max(sorted(gaps), key=lambda g: gaps[g])
    return best


def infer_usage_resolution(samples: list[MetricSample]) -> int:
    per_machine: dict[str, list[int]] = {}
    for s in samples:
        per_machine.setdefault(s.machine_id, []).append(s.timestamp)
    gap_counts: Counter[int] = Counter()
    for ts_list in per_machine.values():
        ts_list.sort()
        gap = _modal_gap(ts_list)
        if gap is not None:
            gap_counts[gap] += 1
    if not gap_counts:
        return 1
    return max(sorted(gap_counts), key=lambda g: gap_counts[g])


def infer_scheduler_resolution(tasks: list[TaskRecord], instances: list[InstanceRecord]) -> int:
    stamps = [t.create_ts for t in tasks] + [t.end_ts for t in tasks if t.end_ts is not None]
    stamps += [i.start_ts for i in instances] + [i.end_ts for i in instances if i.end_ts is not None]
    g = 0
    for ts in stamps:
        g = math.gcd(g, ts)
    return g if g > 0 else 1


def compute_manifest(
    samples: list[MetricSample],
    tasks: list[TaskRecord],
    instances: list[InstanceRecord],
    epoch_ts: int = 0,
    usage_resolution_s: int | None = None,
    scheduler_resolution_s: int | None = None,
) -> BundleManifest:
    """Derive the manifest from parsed tables; resolutions may be supplied."""
    if usage_resolution_s is None:
        usage_resolution_s = infer_usage_resolution(samples)
    if scheduler_resolution_s is None:
        scheduler_resolution_s = infer_scheduler_resolution(tasks, instances)
    machines = {s.machine_id for s in samples} | {i.machine_id for i in instances}
    jobs = {t.job_id for t in tasks} | {i.job_id for i in instances}
    max_ts = 0
    for s in samples:
        max_ts = max(max_ts, s.timestamp)
    for t in tasks:
        max_ts = max(max_ts, t.create_ts, t.end_ts or 0)
    for i in instances:
        max_ts = max(max_ts, i.start_ts, i.end_ts or 0)
    horizon = max_ts + usage_resolution_s
    return BundleManifest(
        epoch_ts=epoch_ts,
        horizon_seconds=horizon,
        usage_resolution_s=usage_resolution_s,
        scheduler_resolution_s=scheduler_resolution_s,
        machine_count=len(machines),
        job_count=len(jobs),
        task_count=len({(t.job_id, t.task_id) for t in tasks}),
        instance_count=len(instances),
    )


_COUNT_KEYS = ("horizon_seconds", "machine_count", "job_count", "task_count", "instance_count")


def load_bundle(root_path: str | Path) -> tuple[TraceBundle, ValidationReport]:
    """Load and validate a bundle directory; the manifest is recomputed."""
    root = Path(root_path)
    report = ValidationReport()
    paths = {
        USAGE_TABLE: root / "server_usage.csv",
        TASK_TABLE: root / "batch_task.csv",
        INSTANCE_TABLE: root / "batch_instance.csv",
    }
    for table, path in paths.items():
        if not path.is_file():
            raise FatalIngestError(f"missing required table {path.name}", code=MISSING_TABLE)

    with paths[USAGE_TABLE].open("rb") as f:
        samples, r = parse_server_usage(f)
    report.merge(r)
    with paths[TASK_TABLE].open("rb") as f:
        tasks, r = parse_batch_tasks(f)
    report.merge(r)
    with paths[INSTANCE_TABLE].open("rb") as f:
        instances, r = parse_batch_instances(f)
    report.merge(r)

    if not samples:
        raise FatalIngestError("server_usage table has no valid rows", code=EMPTY_TABLE)
    if not tasks:
        raise FatalIngestError("batch_task table has no valid rows", code=EMPTY_TABLE)

    task_keys = {(t.job_id, t.task_id) for t in tasks}
    dangling = sorted({(i.job_id, i.task_id) for i in instances} - task_keys)
    for job_id, task_id in dangling:
        report.warn(INSTANCE_TABLE, 0, DANGLING_PARENT,
                    f"instances reference ({job_id}, {task_id}) absent from batch_task")

    existing = None
    manifest_path = root / MANIFEST_NAME
    if manifest_path.is_file():
        try:
            existing = BundleManifest.from_dict(json.loads(manifest_path.read_text("utf-8")))
        except (ValueError, TypeError, KeyError) as exc:
            report.warn("manifest", 0, MANIFEST_DRIFT, f"manifest unreadable, recomputed: {exc}")

    manifest = compute_manifest(
        samples,
        tasks,
        instances,
        epoch_ts=existing.epoch_ts if existing else 0,
        usage_resolution_s=existing.usage_resolution_s if existing else None,
        scheduler_resolution_s=existing.scheduler_resolution_s if existing else None,
    )
    if existing is not None:
        for key in _COUNT_KEYS:
            got, computed = getattr(existing, key), getattr(manifest, key)
            if got != computed:
                report.warn("manifest", 0, MANIFEST_DRIFT,
                            f"manifest says {key}={got} but data has {computed}; corrected")

    return TraceBundle(root, manifest, samples, tasks, instances), report


def write_manifest(bundle: TraceBundle) -> Path:
    path = bundle.root_path / MANIFEST_NAME
    path.write_text(bundle.manifest.to_json(), encoding="utf-8")
    return path
