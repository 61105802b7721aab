"""Per-machine and per-job metric series, aggregation, and downsampling.

Series are extracted from the store over half-open windows [t_from, t_to).
A job's series bundle carries one series per machine executing the job,
start/end annotations for its instances, and a stable task -> color-index
map so overview and detail charts color tasks identically. Cluster-wide
timelines aggregate every machine into per-step mean/min/max envelopes.
Display decimation uses largest-triangle-three-buckets, which keeps the
spikes and drops that matter for anomaly reading.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, replace

from .errors import NotFoundError
from .store import TimeWindow, TraceStore

METRIC_FIELDS = {"cpu": "cpu_util", "mem": "mem_util", "disk": "disk_util"}


def _metric_field(metric: str) -> str:
    try:
        return METRIC_FIELDS[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; expected one of {sorted(METRIC_FIELDS)}") from None


@dataclass(frozen=True)
class Series:
    machine_id: str
    metric: str
    points: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {
            "machine_id": self.machine_id,
            "metric": self.metric,
            "points": [[t, v] for t, v in self.points],
        }


@dataclass(frozen=True)
class Annotation:
    kind: str  # "start" | "end"
    timestamp: int
    task_id: str
    machine_id: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "timestamp": self.timestamp,
            "task_id": self.task_id,
            "machine_id": self.machine_id,
        }


@dataclass(frozen=True)
class SeriesBundle:
    job_id: str
    metric: str
    series: tuple[Series, ...]
    annotations: tuple[Annotation, ...]
    task_color_index: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "metric": self.metric,
            "series": [s.to_dict() for s in self.series],
            "annotations": [a.to_dict() for a in self.annotations],
            "task_color_index": dict(sorted(self.task_color_index.items())),
        }


@dataclass(frozen=True)
class AggregateSeries:
    metric: str
    points: tuple[tuple[int, float, float, float], ...]  # (t, mean, min, max)

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "points": [
                {"timestamp": t, "mean": mean, "min": lo, "max": hi}
                for t, mean, lo, hi in self.points
            ],
        }


def machine_series(store: TraceStore, machine_id: str, metric: str, window: TimeWindow) -> Series:
    """Samples of one machine inside [t_from, t_to)."""
    field = _metric_field(metric)
    samples = store.machine_usage(machine_id)  # raises NotFoundError
    ts = store.usage_timestamps.get(machine_id, [])
    lo = bisect_left(ts, window.t_from)
    hi = bisect_left(ts, window.t_to)
    points = tuple((s.timestamp, getattr(s, field)) for s in samples[lo:hi])
    return Series(machine_id, metric, points)


def job_series_bundle(store: TraceStore, job_id: str, metric: str,
                      window: TimeWindow | None = None) -> SeriesBundle:
    """One series per machine executing the job, plus instance annotations.

    An instance contributes annotations when its active interval intersects
    the window; start annotations sit at the instance start, end annotations
    only exist for finished instances. Duplicate (kind, timestamp, task,
    machine) tuples collapse to one.
    """
    summary = store.job(job_id)  # raises NotFoundError for unknown jobs
    window = window or store.horizon
    series = tuple(
        machine_series(store, m, metric, window) for m in sorted(summary.machine_set)
    )

    seen: set[tuple] = set()
    annotations: list[Annotation] = []
    for inst in store.instances_of_job(job_id):
        inst_end = inst.end_ts if inst.end_ts is not None else store.horizon.t_to
        if inst.start_ts == inst_end:
            # Zero-length instance: a momentary point at its start.
            if not window.contains(inst.start_ts):
                continue
        elif not (inst.start_ts < window.t_to and inst_end > window.t_from):
            continue
        candidates = [Annotation("start", inst.start_ts, inst.task_id, inst.machine_id)]
        if inst.end_ts is not None:
            candidates.append(Annotation("end", inst.end_ts, inst.task_id, inst.machine_id))
        for ann in candidates:
            key = (ann.kind, ann.timestamp, ann.task_id, ann.machine_id)
            if key not in seen:
                seen.add(key)
                annotations.append(ann)
    annotations.sort(key=lambda a: (a.timestamp, a.kind, a.task_id, a.machine_id))

    task_ids = sorted(
        {t.task_id for t in store.tasks_by_job.get(job_id, [])}
        | {i.task_id for i in store.instances_of_job(job_id)}
    )
    color_index = {task_id: i for i, task_id in enumerate(task_ids)}
    return SeriesBundle(job_id, metric, series, tuple(annotations), color_index)


def cluster_timeline(store: TraceStore, metric: str, resolution_s: int) -> AggregateSeries:
    """Mean/min/max of every machine's samples per resolution step; empty
    steps are omitted. Step key is the step's start timestamp."""
    if resolution_s < store.manifest.usage_resolution_s:
        raise ValueError(
            f"resolution {resolution_s}s finer than usage data "
            f"({store.manifest.usage_resolution_s}s)"
        )
    field = _metric_field(metric)
    buckets: dict[int, list[float]] = {}
    for samples in store.usage.values():
        for s in samples:
            step = (s.timestamp // resolution_s) * resolution_s
            buckets.setdefault(step, []).append(getattr(s, field))
    points = tuple(
        (step, sum(vals) / len(vals), min(vals), max(vals))
        for step, vals in sorted(buckets.items())
    )
    return AggregateSeries(metric, points)


def downsample(series: Series, target_points: int) -> Series:
    """Largest-triangle-three-buckets decimation to exactly target_points
    (identity when the series is already short enough)."""
    if target_points < 2:
        raise ValueError("target_points must be >= 2")
    pts = series.points
    n = len(pts)
    if n <= target_points:
        return series
    every = (n - 2) / (target_points - 2)
    out = [pts[0]]
    a = 0  # index of the previously selected point
    for i in range(target_points - 2):
        bucket_lo = int(every * i) + 1
        bucket_hi = min(int(every * (i + 1)) + 1, n - 1)
        next_lo = bucket_hi
        next_hi = min(int(every * (i + 2)) + 1, n)
        span = pts[next_lo:next_hi] or pts[n - 1:n]
        avg_t = sum(p[0] for p in span) / len(span)
        avg_v = sum(p[1] for p in span) / len(span)
        a_t, a_v = pts[a]
        best_idx = bucket_lo
        best_area = -1.0
        for j in range(bucket_lo, bucket_hi):
            area = abs(
                (a_t - avg_t) * (pts[j][1] - a_v) - (a_t - pts[j][0]) * (avg_v - a_v)
            )
            if area > best_area:
                best_area = area
                best_idx = j
        out.append(pts[best_idx])
        a = best_idx
    out.append(pts[-1])
    return replace(series, points=tuple(out))


def brush_slice(bundle: SeriesBundle, window: TimeWindow) -> SeriesBundle:
    """Restrict series and annotations to the window; colors stay stable."""
    series = tuple(
        replace(s, points=tuple(p for p in s.points if window.contains(p[0])))
        for s in bundle.series
    )
    annotations = tuple(a for a in bundle.annotations if window.contains(a.timestamp))
    return SeriesBundle(bundle.job_id, bundle.metric, series, annotations,
                        bundle.task_color_index)
