"""Deterministic synthetic trace bundles with labeled anomalies.

Four job scenarios are generated:

    stable_low  all three metrics stay inside the 20-40 band (plus noise)
    spike       cpu and mem jump to ~90 for the whole job execution, then
                the machines read zero for a few steps after the job ends
    sync_drop   cpu on every machine of the job falls ~35 points in the
                first step after job creation, recovering mid-execution
    thrashing   mem pinned ~90 while cpu slides from ~60 to ~25; elevated
                nonzero samples persist past the job's end timestamp

Each anomalous job gets dedicated machines and a ground-truth entry in
labels.json, so detector recall/precision can be scored exactly. The same
seed always produces byte-identical bundle files.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FatalIngestError
from .ingest import (
    LABELS_NAME,
    InstanceRecord,
    MetricSample,
    Status,
    TaskRecord,
    TraceBundle,
    compute_manifest,
    instance_csv,
    load_bundle,
    task_csv,
    usage_csv,
    write_manifest,
)

SCENARIOS = ("stable_low", "spike", "sync_drop", "thrashing")

# Steps spike machines read zero after job end, and steps thrashing
# machines stay elevated; both exceed the default detector's
# persist_steps_after_end=2 with margin.
_POST_END_STEPS = 5


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    machine_count: int = 50
    job_count: int = 24
    horizon_seconds: int = 7200
    usage_resolution_s: int = 60
    scenario_mix: dict[str, int] = field(
        default_factory=lambda: {"stable_low": 15, "spike": 3, "sync_drop": 3, "thrashing": 3}
    )
    noise_amplitude: float = 2.0

    def validate(self) -> None:
        if self.machine_count < 1:
            raise FatalIngestError("machine_count must be >= 1")
        unknown = set(self.scenario_mix) - set(SCENARIOS)
        if unknown:
            raise FatalIngestError(f"unknown scenarios: {sorted(unknown)}")
        total = sum(self.scenario_mix.values())
        if total != self.job_count:
            raise FatalIngestError(
                f"scenario mix sums to {total}, expected job_count={self.job_count}"
            )
        if self.horizon_seconds < 20 * self.usage_resolution_s:
            raise FatalIngestError("horizon too short for the configured resolution")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        kwargs = dict(d)
        if "scenario_mix" in kwargs:
            kwargs["scenario_mix"] = {k: int(v) for k, v in kwargs["scenario_mix"].items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class AnomalyLabel:
    job_id: str
    kind: str
    t_start: int
    t_end: int
    machine_ids: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "machine_ids": list(self.machine_ids),
        }


def load_labels(root_path: str | Path) -> list[AnomalyLabel]:
    path = Path(root_path) / LABELS_NAME
    raw = json.loads(path.read_text("utf-8"))
    return [
        AnomalyLabel(e["job_id"], e["kind"], int(e["t_start"]), int(e["t_end"]),
                     tuple(e["machine_ids"]))
        for e in raw
    ]


@dataclass
class _JobPlan:
    job_id: str
    scenario: str
    machines: list[str]
    start: int
    end: int
    drop_end: int  # sync_drop recovery point; == start for other scenarios
    cpu_base: dict[str, float]


def _align(t: float, step: int) -> int:
    return int(round(t / step)) * step


def _plan_jobs(cfg: SynthConfig, rng: random.Random) -> list[_JobPlan]:
    scenarios: list[str] = []
    for name in SCENARIOS:
        scenarios.extend([name] * cfg.scenario_mix.get(name, 0))
    rng.shuffle(scenarios)

    per_job = cfg.machine_count // cfg.job_count
    needs_pairs = any(cfg.scenario_mix.get(s, 0) > 0 for s in ("spike", "sync_drop", "thrashing"))
    if per_job < 1 or (needs_pairs and per_job < 2):
        raise FatalIngestError(
            f"{cfg.machine_count} machines cannot give each of {cfg.job_count} jobs "
            f"{'two dedicated machines' if needs_pairs else 'a dedicated machine'}"
        )

    width = max(3, len(str(cfg.machine_count - 1)))
    machine_ids = [f"m_{i:0{width}d}" for i in range(cfg.machine_count)]
    job_width = max(2, len(str(cfg.job_count - 1)))

    h, res = cfg.horizon_seconds, cfg.usage_resolution_s
    plans: list[_JobPlan] = []
    for k, scenario in enumerate(scenarios):
        job_id = f"j_{k:0{job_width}d}"
        machines = machine_ids[k * per_job:(k + 1) * per_job]
        start = _align(rng.uniform(0.25 * h, 0.5 * h), res)
        duration = _align(rng.uniform(0.25 * h, 0.375 * h), res)
        end = min(start + duration, h - (_POST_END_STEPS + 2) * res)
        drop_end = start
        if scenario == "sync_drop":
            drop_end = min(start + 10 * res, end - res)
        cpu_base = {}
        for m in machines:
            base = rng.uniform(36.0, 38.0) if scenario == "sync_drop" else rng.uniform(25.0, 35.0)
            cpu_base[m] = base
        plans.append(_JobPlan(job_id, scenario, machines, start, end, drop_end, cpu_base))

    # The first two stable_low jobs host the shared leftover machines; make
    # sure they overlap each other (and the horizon midpoint) in time.
    hosts = [p for p in plans if p.scenario == "stable_low"][:2]
    if len(hosts) == 2:
        floor = _align(0.625 * h, res)
        for p in hosts:
            p.end = max(p.end, min(floor, h - (_POST_END_STEPS + 2) * res))
    return plans


def _scenario_value(plan: _JobPlan, metric: str, base: float, t: int, res: int,
                    rng_noise: float) -> float:
    """Metric value for a machine owned by `plan` at time t (noise already drawn)."""
    s, e = plan.start, plan.end
    kind = plan.scenario

    if kind == "spike":
        if s <= t <= e:
            if metric in ("cpu", "mem"):
                ramp = 4.0 * (t - s) / max(e - s, 1)
                return 88.0 + ramp + rng_noise
            return base + rng_noise
        if e < t <= e + _POST_END_STEPS * res:
            return 0.0
        return base + rng_noise

    if kind == "sync_drop":
        if metric == "cpu" and s <= t < plan.drop_end:
            return 1.5 + rng_noise / 2.0
        return base + rng_noise

    if kind == "thrashing":
        if s <= t <= e:
            if metric == "mem":
                return 90.0 + rng_noise
            if metric == "cpu":
                frac = (t - s) / max(e - s, 1)
                return 60.0 - 35.0 * frac + rng_noise
            return base + rng_noise
        if e < t <= e + _POST_END_STEPS * res:
            if metric == "mem":
                return 70.0 + rng_noise
            if metric == "cpu":
                return 20.0 + rng_noise
            return base + rng_noise
        return base + rng_noise

    # stable_low: small bump while the job executes
    if s <= t <= e:
        return base + 2.0 + rng_noise
    return base + rng_noise


def _make_schedule(plans: list[_JobPlan], rng: random.Random, res: int,
                   shared_machines: list[str]) -> tuple[list[TaskRecord], list[InstanceRecord]]:
    """Tasks and instances for every planned job.

    Machines left over after the per-job partition are attached to the first
    two stable_low jobs as extra instances, so the bundle contains machines
    executing several jobs at once (the cross-linking the UI highlights).
    """
    task_specs: list[dict] = []
    instances: list[InstanceRecord] = []
    first_task_end: dict[str, int] = {}
    for plan in plans:
        n_tasks = 1 if (rng.random() < 0.75 or len(plan.machines) < 2) else rng.choice((2, 3))
        n_tasks = min(n_tasks, len(plan.machines))
        # Chain-dependent task names: task_M1, task_M2_1, task_M3_2, ...
        task_ids = ["task_M1"] + [f"task_M{i}_{i - 1}" for i in range(2, n_tasks + 1)]
        # Contiguous machine slices; each machine serves exactly one task.
        cuts = [round(i * len(plan.machines) / n_tasks) for i in range(n_tasks + 1)]
        for idx, task_id in enumerate(task_ids):
            slice_machines = plan.machines[cuts[idx]:cuts[idx + 1]]
            task_end = plan.end - (n_tasks - 1 - idx) * res
            if idx == 0:
                first_task_end[plan.job_id] = task_end
            task_specs.append({
                "job_id": plan.job_id, "task_id": task_id, "start": plan.start,
                "end": task_end, "deps": (task_ids[idx - 1],) if idx else (),
            })
            for m in slice_machines:
                instances.append(InstanceRecord(
                    plan.job_id, task_id, m, plan.start, task_end, Status.TERMINATED))

    hosts = [p for p in plans if p.scenario == "stable_low"][:2]
    if len(hosts) == 2:
        for m in shared_machines:
            for plan in hosts:
                instances.append(InstanceRecord(
                    plan.job_id, "task_M1", m, plan.start,
                    first_task_end[plan.job_id], Status.TERMINATED))

    rows_per_task: dict[tuple[str, str], int] = {}
    for inst in instances:
        key = (inst.job_id, inst.task_id)
        rows_per_task[key] = rows_per_task.get(key, 0) + 1
    tasks = [
        TaskRecord(
            spec["job_id"], spec["task_id"], spec["start"], spec["end"],
            rows_per_task[(spec["job_id"], spec["task_id"])], Status.TERMINATED,
            dependencies=spec["deps"],
        )
        for spec in task_specs
    ]
    tasks.sort(key=lambda t: (t.job_id, t.task_id))
    instances.sort(key=lambda i: (i.job_id, i.task_id, i.machine_id))
    return tasks, instances


def generate_synthetic(cfg: SynthConfig, out_dir: str | Path) -> TraceBundle:
    """Write a labeled synthetic bundle to out_dir and load it back."""
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(cfg.seed)

    plans = _plan_jobs(cfg, rng)
    width = max(3, len(str(cfg.machine_count - 1)))
    machine_ids = [f"m_{i:0{width}d}" for i in range(cfg.machine_count)]
    assigned = {m for plan in plans for m in plan.machines}
    shared = [m for m in machine_ids if m not in assigned]
    tasks, instances = _make_schedule(plans, rng, cfg.usage_resolution_s, shared)
    owner: dict[str, _JobPlan] = {}
    for plan in plans:
        for m in plan.machines:
            owner[m] = plan

    bases: dict[str, dict[str, float]] = {}
    for m in machine_ids:
        plan = owner.get(m)
        bases[m] = {
            "cpu": plan.cpu_base[m] if plan else rng.uniform(25.0, 35.0),
            "mem": rng.uniform(25.0, 35.0),
            "disk": rng.uniform(25.0, 35.0),
        }

    res = cfg.usage_resolution_s
    samples: list[MetricSample] = []
    for t in range(0, cfg.horizon_seconds, res):
        for m in machine_ids:
            plan = owner.get(m)
            values = {}
            for metric in ("cpu", "mem", "disk"):
                noise = rng.uniform(-cfg.noise_amplitude, cfg.noise_amplitude)
                if plan is None:
                    v = bases[m][metric] + noise
                else:
                    v = _scenario_value(plan, metric, bases[m][metric], t, res, noise)
                values[metric] = round(min(100.0, max(0.0, v)), 3)
            samples.append(MetricSample(t, m, values["cpu"], values["mem"], values["disk"]))

    labels = []
    for plan in sorted(plans, key=lambda p: p.job_id):
        if plan.scenario == "stable_low":
            continue
        # Label intervals are half-open [t_start, t_end): the last affected
        # sample sits one resolution step before t_end.
        t_end = plan.drop_end if plan.scenario == "sync_drop" else plan.end + res
        labels.append(AnomalyLabel(plan.job_id, plan.scenario, plan.start, t_end,
                                   tuple(plan.machines)))

    (out / "server_usage.csv").write_text(usage_csv(samples), encoding="utf-8")
    (out / "batch_task.csv").write_text(task_csv(tasks), encoding="utf-8")
    (out / "batch_instance.csv").write_text(instance_csv(instances), encoding="utf-8")
    (out / LABELS_NAME).write_text(
        json.dumps([lb.to_dict() for lb in labels], indent=2) + "\n", encoding="utf-8")

    manifest = compute_manifest(
        samples, tasks, instances,
        usage_resolution_s=cfg.usage_resolution_s,
        scheduler_resolution_s=cfg.usage_resolution_s,
    )
    bundle = TraceBundle(out, manifest, samples, tasks, instances)
    write_manifest(bundle)

    loaded, report = load_bundle(out)
    if not report.ok:
        raise FatalIngestError(f"generated bundle failed validation:\n{report.summary()}")
    return loaded
