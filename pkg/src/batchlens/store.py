"""Immutable indexed view of a trace bundle.

Built once from a bundle, then shared read-only: per-job and per-machine
instance indices, per-machine time-sorted usage series, and job summaries.
Activity semantics are half-open: an instance is active at t when
start_ts <= t and (end_ts is absent or end_ts > t). An absent end_ts means
the instance was still running at the trace horizon. All query results are
sorted by identifier so repeated calls produce identical output.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CorruptBundleError, NotFoundError, ZeroDenominatorError
from .ingest import InstanceRecord, MetricSample, TaskRecord, TraceBundle, BundleManifest


@dataclass(frozen=True)
class TimeWindow:
    t_from: int  # inclusive
    t_to: int  # exclusive

    def __post_init__(self):
        if self.t_from >= self.t_to:
            raise ValueError(f"empty window [{self.t_from}, {self.t_to})")

    def contains(self, t: int) -> bool:
        return self.t_from <= t < self.t_to

    def intersect(self, other: "TimeWindow") -> "TimeWindow | None":
        lo, hi = max(self.t_from, other.t_from), min(self.t_to, other.t_to)
        return TimeWindow(lo, hi) if lo < hi else None


@dataclass(frozen=True)
class JobSummary:
    job_id: str
    task_count: int
    instance_count: int
    start_ts: int | None
    end_ts: int | None
    machine_set: frozenset[str]


@dataclass(frozen=True)
class DistributionStats:
    fraction_single_task_jobs: float
    fraction_multi_instance_tasks: float
    machine_count: int
    job_count: int


def _interval_active(start: int, end: int | None, t: int) -> bool:
    return start <= t and (end is None or end > t)


@dataclass
class TraceStore:
    manifest: BundleManifest
    machines: tuple[str, ...]
    jobs: dict[str, JobSummary]
    tasks_by_job: dict[str, list[TaskRecord]]
    instances_by_task: dict[tuple[str, str], list[InstanceRecord]]
    instances_by_machine: dict[str, list[InstanceRecord]]
    usage: dict[str, list[MetricSample]]
    usage_timestamps: dict[str, list[int]]
    horizon: TimeWindow
    orphan_instances: int = 0
    _job_instances: dict[str, list[InstanceRecord]] = field(default_factory=dict, repr=False)

    # -- queries ----------------------------------------------------------

    def in_horizon(self, t: int) -> bool:
        return self.horizon.contains(t)

    def job(self, job_id: str) -> JobSummary:
        try:
            return self.jobs[job_id]
        except KeyError:
            raise NotFoundError(f"unknown job {job_id!r}") from None

    def instances_of_job(self, job_id: str) -> list[InstanceRecord]:
        return self._job_instances.get(job_id, [])

    def machines_of_job(self, job_id: str) -> list[str]:
        return sorted(self.job(job_id).machine_set)

    def machine_usage(self, machine_id: str) -> list[MetricSample]:
        if machine_id not in self.instances_by_machine and machine_id not in self.usage:
            raise NotFoundError(f"unknown machine {machine_id!r}")
        return self.usage.get(machine_id, [])

    def active_jobs_at(self, t: int) -> list[str]:
        """Jobs with at least one instance active at t; [] outside the horizon."""
        if not self.in_horizon(t):
            return []
        active = [
            job_id
            for job_id, instances in self._job_instances.items()
            if any(_interval_active(i.start_ts, i.end_ts, t) for i in instances)
        ]
        active.sort()
        return active

    def job_time_bounds(self, job_id: str) -> tuple[int | None, int | None]:
        summary = self.job(job_id)
        return summary.start_ts, summary.end_ts

    def multi_job_machines_at(self, t: int) -> dict[str, list[str]]:
        """machine_id -> sorted jobs, for machines running >= 2 jobs at t."""
        if not self.in_horizon(t):
            return {}
        out: dict[str, list[str]] = {}
        for machine_id in self.machines:
            jobs = {
                i.job_id
                for i in self.instances_by_machine.get(machine_id, [])
                if _interval_active(i.start_ts, i.end_ts, t)
            }
            if len(jobs) >= 2:
                out[machine_id] = sorted(jobs)
        return out

    def distribution_stats(self) -> DistributionStats:
        if not self.jobs:
            raise ZeroDenominatorError("store has no jobs")
        single = sum(1 for s in self.jobs.values() if s.task_count == 1)
        tasks_with_instances = [
            key for key, instances in self.instances_by_task.items() if instances
        ]
        if tasks_with_instances:
            multi = sum(1 for key in tasks_with_instances
                        if len(self.instances_by_task[key]) >= 2)
            multi_fraction = multi / len(tasks_with_instances)
        else:
            multi_fraction = 0.0
        return DistributionStats(
            fraction_single_task_jobs=single / len(self.jobs),
            fraction_multi_instance_tasks=multi_fraction,
            machine_count=len(self.machines),
            job_count=len(self.jobs),
        )


def build_store(bundle: TraceBundle) -> TraceStore:
    """Index a validated bundle; raises CorruptBundleError if the tables
    look mismatched (more than half the instances reference unknown tasks)."""
    tasks_by_job: dict[str, list[TaskRecord]] = {}
    for task in bundle.tasks:
        tasks_by_job.setdefault(task.job_id, []).append(task)
    for records in tasks_by_job.values():
        records.sort(key=lambda t: t.task_id)

    task_keys = {(t.job_id, t.task_id) for t in bundle.tasks}
    orphans = sum(1 for i in bundle.instances if (i.job_id, i.task_id) not in task_keys)
    if bundle.instances and orphans / len(bundle.instances) > 0.5:
        raise CorruptBundleError(
            f"{orphans}/{len(bundle.instances)} instances reference unknown tasks; "
            "bundle tables are likely mismatched"
        )

    instances_by_task: dict[tuple[str, str], list[InstanceRecord]] = {
        key: [] for key in task_keys
    }
    instances_by_machine: dict[str, list[InstanceRecord]] = {}
    job_instances: dict[str, list[InstanceRecord]] = {}
    for inst in bundle.instances:
        instances_by_task.setdefault((inst.job_id, inst.task_id), []).append(inst)
        instances_by_machine.setdefault(inst.machine_id, []).append(inst)
        job_instances.setdefault(inst.job_id, []).append(inst)

    usage: dict[str, list[MetricSample]] = {}
    for sample in bundle.samples:
        usage.setdefault(sample.machine_id, []).append(sample)
    for machine_id, series in usage.items():
        series.sort(key=lambda s: s.timestamp)
        deduped = []
        for sample in series:
            if deduped and deduped[-1].timestamp == sample.timestamp:
                deduped[-1] = sample  # keep the last record for a timestamp
            else:
                deduped.append(sample)
        usage[machine_id] = deduped

    usage_timestamps = {m: [s.timestamp for s in series] for m, series in usage.items()}
    machines = tuple(sorted(set(usage) | set(instances_by_machine)))

    jobs: dict[str, JobSummary] = {}
    for job_id in sorted(set(tasks_by_job) | set(job_instances)):
        instances = job_instances.get(job_id, [])
        starts = [i.start_ts for i in instances]
        unfinished = any(i.end_ts is None for i in instances)
        ends = [i.end_ts for i in instances if i.end_ts is not None]
        jobs[job_id] = JobSummary(
            job_id=job_id,
            task_count=len(tasks_by_job.get(job_id, [])),
            instance_count=len(instances),
            start_ts=min(starts) if starts else None,
            end_ts=None if (unfinished or not ends) else max(ends),
            machine_set=frozenset(i.machine_id for i in instances),
        )

    return TraceStore(
        manifest=bundle.manifest,
        machines=machines,
        jobs=jobs,
        tasks_by_job=tasks_by_job,
        instances_by_task=instances_by_task,
        instances_by_machine=instances_by_machine,
        usage=usage,
        usage_timestamps=usage_timestamps,
        horizon=TimeWindow(0, bundle.manifest.horizon_seconds),
        orphan_instances=orphans,
        _job_instances=job_instances,
    )
