"""Deterministic detectors for the three utilization anomaly signatures.

    spike      cpu and mem jump well above the machine's pre-start baseline
               and into high absolute territory right after a job starts
    sync_drop  most machines of one job lose a large chunk of cpu within a
               couple of steps of the job's creation, in lockstep
    thrashing  memory pinned high while cpu slides downward, and the
               machines keep reporting nonzero usage after the job ended

All thresholds live in DetectorConfig. Baselines are medians of pre-start
samples, which shrug off earlier anomalies. Event severity is the excess
over the triggering threshold normalized by the remaining headroom,
clamped to [0, 1]. Detectors are pure functions: identical inputs and
config give identical event lists.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from statistics import median

from .errors import NotApplicableError
from .series import SeriesBundle, job_series_bundle
from .store import TimeWindow, TraceStore

logger = logging.getLogger(__name__)


class Band(enum.IntEnum):
    IDLE = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return self.name.title()


def classify_band(value: float) -> Band:
    """Utilization band: Idle [0,20), Low [20,40), Medium [40,80), High [80,100]."""
    if value < 20.0:
        return Band.IDLE
    if value < 40.0:
        return Band.LOW
    if value < 80.0:
        return Band.MEDIUM
    return Band.HIGH


class AnomalyKind(enum.Enum):
    SPIKE = "spike"
    SYNC_DROP = "sync_drop"
    THRASHING = "thrashing"


@dataclass(frozen=True)
class SpikeConfig:
    baseline_window_s: int = 1800
    min_rise_points: float = 25.0
    min_abs_level: float = 70.0


@dataclass(frozen=True)
class SyncDropConfig:
    machine_fraction: float = 0.8
    min_drop_points: float = 30.0
    max_lag_steps: int = 2


@dataclass(frozen=True)
class ThrashingConfig:
    mem_floor: float = 85.0
    cpu_decline_points: float = 20.0
    persist_steps_after_end: int = 2
    min_duration_s: int = 600


@dataclass(frozen=True)
class DetectorConfig:
    spike: SpikeConfig = field(default_factory=SpikeConfig)
    sync_drop: SyncDropConfig = field(default_factory=SyncDropConfig)
    thrashing: ThrashingConfig = field(default_factory=ThrashingConfig)

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        return cls(
            spike=SpikeConfig(**d.get("spike", {})),
            sync_drop=SyncDropConfig(**d.get("sync_drop", {})),
            thrashing=ThrashingConfig(**d.get("thrashing", {})),
        )


@dataclass(frozen=True)
class AnomalyEvent:
    kind: AnomalyKind
    job_id: str
    machine_ids: tuple[str, ...]
    interval: TimeWindow
    severity: float
    evidence: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "job_id": self.job_id,
            "machine_ids": list(self.machine_ids),
            "t_from": self.interval.t_from,
            "t_to": self.interval.t_to,
            "severity": self.severity,
            "evidence": self.evidence,
        }


def _severity(excess_base: float, threshold: float) -> float:
    if threshold >= 100.0:
        return 1.0
    return min(1.0, max(0.0, (excess_base - threshold) / (100.0 - threshold)))


def _baseline_median(points, start_ts: int, window_s: int) -> float | None:
    values = [v for t, v in points if start_ts - window_s <= t < start_ts]
    if len(values) < 3:
        return None
    return median(values)


def detect_spikes(cpu: SeriesBundle, mem: SeriesBundle, job_bounds: tuple[int, int | None],
                  cfg: SpikeConfig, resolution_s: int) -> list[AnomalyEvent]:
    """Per-machine spike events where cpu and mem both rise past baseline +
    min_rise_points and the joint level reaches min_abs_level in-job."""
    start_ts, end_ts = job_bounds
    if start_ts is None:
        return []
    mem_by_machine = {s.machine_id: dict(s.points) for s in mem.series}
    events = []
    for s in cpu.series:
        mem_points = mem_by_machine.get(s.machine_id, {})
        cpu_base = _baseline_median(s.points, start_ts, cfg.baseline_window_s)
        mem_base = _baseline_median(
            [(t, v) for t, v in mem_points.items()], start_ts, cfg.baseline_window_s)
        if cpu_base is None or mem_base is None:
            logger.warning("spike detector: %s skipped for job %s, too few pre-start samples",
                           s.machine_id, cpu.job_id)
            continue
        exceed_ts = []
        joint_peak = None
        for t, cpu_v in s.points:
            if t < start_ts or (end_ts is not None and t > end_ts):
                continue
            mem_v = mem_points.get(t)
            if mem_v is None:
                continue
            if cpu_v > cpu_base + cfg.min_rise_points and mem_v > mem_base + cfg.min_rise_points:
                exceed_ts.append(t)
                joint = min(cpu_v, mem_v)
                joint_peak = joint if joint_peak is None else max(joint_peak, joint)
        if not exceed_ts or joint_peak is None or joint_peak < cfg.min_abs_level:
            continue
        events.append(AnomalyEvent(
            kind=AnomalyKind.SPIKE,
            job_id=cpu.job_id,
            machine_ids=(s.machine_id,),
            interval=TimeWindow(exceed_ts[0], exceed_ts[-1] + resolution_s),
            severity=_severity(joint_peak, cfg.min_abs_level),
            evidence={
                "cpu": {"baseline_median": cpu_base},
                "mem": {"baseline_median": mem_base},
                "joint": {"peak": joint_peak},
            },
        ))
    return events


def detect_sync_drop(cpu: SeriesBundle, job_bounds: tuple[int, int | None],
                     cfg: SyncDropConfig, resolution_s: int,
                     baseline_window_s: int = 1800) -> list[AnomalyEvent]:
    """One event when enough of the job's machines drop cpu in lockstep
    within max_lag_steps of the job start."""
    start_ts, end_ts = job_bounds
    if start_ts is None:
        return []
    if len(cpu.series) < 2:
        logger.warning("sync-drop detector: job %s has fewer than 2 machines", cpu.job_id)
        return []
    lag_end = start_ts + cfg.max_lag_steps * resolution_s
    dropping = []
    drops = []
    first_low = None
    last_low = None
    for s in cpu.series:
        base = _baseline_median(s.points, start_ts, baseline_window_s)
        if base is None:
            continue
        low_cut = base - cfg.min_drop_points
        window_vals = [(t, v) for t, v in s.points if start_ts <= t <= lag_end]
        if not window_vals or min(v for _, v in window_vals) > low_cut:
            continue
        dropping.append(s.machine_id)
        drops.append(base - min(v for _, v in window_vals))
        in_job = [
            (t, v) for t, v in s.points
            if start_ts <= t and (end_ts is None or t <= end_ts) and v <= low_cut
        ]
        if in_job:
            lo, hi = in_job[0][0], in_job[-1][0]
            first_low = lo if first_low is None else min(first_low, lo)
            last_low = hi if last_low is None else max(last_low, hi)
    if not dropping or len(dropping) / len(cpu.series) < cfg.machine_fraction:
        return []
    mean_drop = sum(drops) / len(drops)
    return [AnomalyEvent(
        kind=AnomalyKind.SYNC_DROP,
        job_id=cpu.job_id,
        machine_ids=tuple(sorted(dropping)),
        interval=TimeWindow(first_low, last_low + resolution_s),
        severity=_severity(mean_drop, cfg.min_drop_points),
        evidence={
            "cpu": {
                "mean_drop": mean_drop,
                "machines_dropped": float(len(dropping)),
                "machines_total": float(len(cpu.series)),
            },
        },
    )]


def _high_mem_runs(points, floor: float):
    """Maximal consecutive runs of points with value >= floor."""
    run = []
    for t, v in points:
        if v >= floor:
            run.append(t)
        else:
            if run:
                yield run
            run = []
    if run:
        yield run


def detect_thrashing(store: TraceStore, job_id: str, cfg: ThrashingConfig) -> list[AnomalyEvent]:
    """Per-machine thrashing events for a finished job: a long high-memory
    window with declining cpu, and nonzero samples persisting past job end."""
    start_ts, end_ts = store.job_time_bounds(job_id)
    if end_ts is None or start_ts is None:
        raise NotApplicableError(f"job {job_id} has not finished; thrashing needs an end_ts")
    res = store.manifest.usage_resolution_s
    events = []
    for machine_id in store.machines_of_job(job_id):
        samples = store.usage.get(machine_id, [])
        in_job = [s for s in samples if start_ts <= s.timestamp <= end_ts]
        post = [s for s in samples if s.timestamp > end_ts][:cfg.persist_steps_after_end]
        nonzero_steps = 0
        for s in post:
            if max(s.cpu_util, s.mem_util, s.disk_util) > 0.0:
                nonzero_steps += 1
            else:
                break
        if len(post) < cfg.persist_steps_after_end or nonzero_steps < cfg.persist_steps_after_end:
            continue
        cpu_at = {s.timestamp: s.cpu_util for s in in_job}
        best = None
        for run in _high_mem_runs([(s.timestamp, s.mem_util) for s in in_job], cfg.mem_floor):
            if run[-1] - run[0] < cfg.min_duration_s:
                continue
            decline = cpu_at[run[0]] - cpu_at[run[-1]]
            if decline < cfg.cpu_decline_points:
                continue
            if best is None or decline > best[0]:
                best = (decline, run)
        if best is None:
            continue
        decline, run = best
        events.append(AnomalyEvent(
            kind=AnomalyKind.THRASHING,
            job_id=job_id,
            machine_ids=(machine_id,),
            interval=TimeWindow(run[0], run[-1] + res),
            severity=_severity(decline, cfg.cpu_decline_points),
            evidence={
                "cpu": {"decline": decline},
                "mem": {"min_in_window": min(
                    s.mem_util for s in in_job if run[0] <= s.timestamp <= run[-1])},
                "post_end": {"nonzero_steps": float(nonzero_steps)},
            },
        ))
    return events


def scan_window(store: TraceStore, window: TimeWindow,
                cfg: DetectorConfig | None = None) -> list[AnomalyEvent]:
    """Run all three detectors over every job whose active interval
    intersects the window; result sorted by (t_from, job_id, kind)."""
    cfg = cfg or DetectorConfig()
    res = store.manifest.usage_resolution_s
    events: list[AnomalyEvent] = []
    for job_id in sorted(store.jobs):
        start_ts, end_ts = store.job_time_bounds(job_id)
        if start_ts is None:
            continue
        job_end = end_ts if end_ts is not None else store.horizon.t_to
        if not (start_ts < window.t_to and job_end > window.t_from):
            continue
        pad = cfg.spike.baseline_window_s
        wide = TimeWindow(
            max(0, start_ts - pad),
            min(store.horizon.t_to, job_end + pad),
        )
        cpu = job_series_bundle(store, job_id, "cpu", wide)
        mem = job_series_bundle(store, job_id, "mem", wide)
        events.extend(detect_spikes(cpu, mem, (start_ts, end_ts), cfg.spike, res))
        events.extend(detect_sync_drop(cpu, (start_ts, end_ts), cfg.sync_drop, res,
                                       baseline_window_s=cfg.spike.baseline_window_s))
        if end_ts is not None:
            events.extend(detect_thrashing(store, job_id, cfg.thrashing))
    events.sort(key=lambda e: (e.interval.t_from, e.job_id, e.kind.value))
    return events


def events_csv(events: list[AnomalyEvent]) -> str:
    lines = ["kind,job_id,t_from,t_to,severity,machines"]
    for e in events:
        machines = ";".join(e.machine_ids)
        lines.append(
            f"{e.kind.value},{e.job_id},{e.interval.t_from},{e.interval.t_to},"
            f"{e.severity},{machines}"
        )
    return "\n".join(lines) + "\n"
