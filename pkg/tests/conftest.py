from __future__ import annotations

import random

import pytest

from batchlens.ingest import (
    InstanceRecord,
    MetricSample,
    Status,
    TaskRecord,
    TraceBundle,
    compute_manifest,
)
from batchlens.store import build_store
from batchlens.synth import SynthConfig, generate_synthetic

# The seed-fixed detector acceptance configuration.
FIXED_CONFIG = SynthConfig(
    seed=7,
    machine_count=50,
    job_count=24,
    horizon_seconds=7200,
    usage_resolution_s=60,
    scenario_mix={"stable_low": 15, "spike": 3, "sync_drop": 3, "thrashing": 3},
    noise_amplitude=2.0,
)


@pytest.fixture(scope="session")
def fixed_bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixed_bundle")
    return generate_synthetic(FIXED_CONFIG, out)


@pytest.fixture(scope="session")
def fixed_store(fixed_bundle):
    return build_store(fixed_bundle)


def bundle_from_records(samples, tasks, instances, root="memory") -> TraceBundle:
    """In-memory bundle for store-level tests, bypassing the filesystem."""
    manifest = compute_manifest(list(samples), list(tasks), list(instances))
    return TraceBundle(root, manifest, list(samples), list(tasks), list(instances))


def random_snapshot(rng: random.Random, max_jobs=30, max_tasks=10, max_machines=40):
    """Random HierarchySnapshot tree for layout-geometry checks."""
    from batchlens.layout import HierarchySnapshot, JobNode, MachineNode, TaskNode

    roots = []
    for j in range(rng.randint(1, max_jobs)):
        tasks = []
        for k in range(rng.randint(1, max_tasks)):
            machines = tuple(
                MachineNode(
                    f"m_{j}_{k}_{i}",
                    rng.uniform(0, 100),
                    rng.uniform(0, 100) if rng.random() > 0.1 else None,
                    rng.uniform(0, 100),
                )
                for i in range(rng.randint(1, max_machines))
            )
            tasks.append(TaskNode(f"task_M{k + 1}", machines))
        roots.append(JobNode(f"j_{j:02d}", tuple(tasks)))
    return HierarchySnapshot(3600, tuple(roots))


def random_records(rng: random.Random, machine_count=8, job_count=6, horizon=1200, res=60):
    """Random but well-formed tables for oracle comparisons."""
    machines = [f"m_{i}" for i in range(machine_count)]
    samples = [
        MetricSample(t, m, rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 100))
        for t in range(0, horizon, res)
        for m in machines
    ]
    tasks, instances = [], []
    for j in range(job_count):
        job_id = f"j_{j}"
        for k in range(1, rng.randint(1, 3) + 1):
            task_id = f"task_M{k}" if k == 1 else f"task_M{k}_{k - 1}"
            start = rng.randrange(0, horizon - res, res)
            end = None if rng.random() < 0.2 else rng.randrange(start, horizon, res) + res
            n_inst = rng.randint(1, 3)
            tasks.append(TaskRecord(job_id, task_id, start, end, n_inst, Status.TERMINATED))
            for _ in range(n_inst):
                instances.append(InstanceRecord(
                    job_id, task_id, rng.choice(machines), start, end,
                    Status.TERMINATED if end is not None else Status.RUNNING))
    return samples, tasks, instances
