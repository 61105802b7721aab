from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from batchlens.anomaly import (
    AnomalyKind,
    Band,
    DetectorConfig,
    SpikeConfig,
    SyncDropConfig,
    ThrashingConfig,
    classify_band,
    detect_spikes,
    detect_sync_drop,
    detect_thrashing,
    events_csv,
    scan_window,
)
from batchlens.errors import NotApplicableError
from batchlens.ingest import InstanceRecord, MetricSample, Status, TaskRecord
from batchlens.series import Series, SeriesBundle
from batchlens.store import TimeWindow, build_store
from batchlens.synth import load_labels

from conftest import bundle_from_records


class TestClassifyBand:
    def test_paper_anchored_examples(self):
        assert classify_band(30) is Band.LOW
        assert classify_band(65) is Band.MEDIUM

    def test_boundaries(self):
        assert classify_band(0) is Band.IDLE
        assert classify_band(19.999) is Band.IDLE
        assert classify_band(20) is Band.LOW
        assert classify_band(39.999) is Band.LOW
        assert classify_band(40) is Band.MEDIUM
        assert classify_band(79.999) is Band.MEDIUM
        assert classify_band(80) is Band.HIGH
        assert classify_band(100) is Band.HIGH

    def test_band_order(self):
        assert Band.IDLE < Band.LOW < Band.MEDIUM < Band.HIGH

    @given(st.floats(0, 100), st.floats(0, 100))
    def test_monotone(self, a, b):
        if a <= b:
            assert classify_band(a) <= classify_band(b)

    def test_labels(self):
        assert [b.label for b in Band] == ["Idle", "Low", "Medium", "High"]


def flat_bundle(job_id="j_1", machines=("m_1", "m_2"), level=30.0, metric="cpu",
                horizon=3600, res=60):
    series = tuple(
        Series(m, metric, tuple((t, level) for t in range(0, horizon, res)))
        for m in machines
    )
    return SeriesBundle(job_id, metric, series, (), {"task_M1": 0})


def bundle_with(points_by_machine, metric="cpu", job_id="j_1"):
    series = tuple(
        Series(m, metric, tuple(points)) for m, points in sorted(points_by_machine.items())
    )
    return SeriesBundle(job_id, metric, series, (), {"task_M1": 0})


BOUNDS = (1800, 3000)


class TestDetectSpikes:
    def test_flat_series_no_events(self):
        cpu = flat_bundle(metric="cpu")
        mem = flat_bundle(metric="mem")
        assert detect_spikes(cpu, mem, BOUNDS, SpikeConfig(), 60) == []

    def spiking_points(self, peak=90.0):
        return [(t, 30.0) for t in range(0, 1800, 60)] + \
            [(t, peak) for t in range(1800, 3060, 60)] + \
            [(t, 30.0) for t in range(3060, 3600, 60)]

    def test_joint_spike_detected(self):
        pts = self.spiking_points()
        cpu = bundle_with({"m_1": pts})
        mem = bundle_with({"m_1": pts}, metric="mem")
        events = detect_spikes(cpu, mem, BOUNDS, SpikeConfig(), 60)
        assert len(events) == 1
        e = events[0]
        assert e.kind is AnomalyKind.SPIKE
        assert e.machine_ids == ("m_1",)
        assert e.interval == TimeWindow(1800, 3060)
        assert e.severity == pytest.approx((90 - 70) / 30)

    def test_cpu_only_rise_not_enough(self):
        cpu = bundle_with({"m_1": self.spiking_points()})
        mem = flat_bundle(machines=("m_1",), metric="mem")
        assert detect_spikes(cpu, mem, BOUNDS, SpikeConfig(), 60) == []

    def test_rise_below_abs_level_not_enough(self):
        pts = self.spiking_points(peak=65.0)  # above base+25, below 70
        cpu = bundle_with({"m_1": pts})
        mem = bundle_with({"m_1": pts}, metric="mem")
        assert detect_spikes(cpu, mem, BOUNDS, SpikeConfig(), 60) == []

    def test_insufficient_baseline_skips_machine(self, caplog):
        pts = [(t, 90.0) for t in range(1800, 3000, 60)]
        cpu = bundle_with({"m_1": pts})
        mem = bundle_with({"m_1": pts}, metric="mem")
        with caplog.at_level("WARNING"):
            events = detect_spikes(cpu, mem, BOUNDS, SpikeConfig(), 60)
        assert events == []
        assert any("too few pre-start samples" in r.message for r in caplog.records)

    def test_raising_min_rise_never_adds_events(self):
        pts = self.spiking_points()
        cpu = bundle_with({"m_1": pts})
        mem = bundle_with({"m_1": pts}, metric="mem")
        counts = []
        for rise in (10.0, 25.0, 45.0, 61.0):
            cfg = SpikeConfig(min_rise_points=rise)
            counts.append(len(detect_spikes(cpu, mem, BOUNDS, cfg, 60)))
        assert counts == sorted(counts, reverse=True)


class TestDetectSyncDrop:
    def dropping_points(self, base=36.0, low=2.0, drop_at=1800, recover_at=2400):
        return [
            (t, low if drop_at <= t < recover_at else base)
            for t in range(0, 3600, 60)
        ]

    def test_all_flat_no_event(self):
        assert detect_sync_drop(flat_bundle(), BOUNDS, SyncDropConfig(), 60) == []

    def test_synchronized_drop_detected(self):
        cpu = bundle_with({
            "m_1": self.dropping_points(),
            "m_2": self.dropping_points(),
        })
        events = detect_sync_drop(cpu, BOUNDS, SyncDropConfig(), 60)
        assert len(events) == 1
        e = events[0]
        assert e.kind is AnomalyKind.SYNC_DROP
        assert e.machine_ids == ("m_1", "m_2")
        assert e.interval == TimeWindow(1800, 2400)

    def test_half_of_machines_below_fraction_no_event(self):
        cpu = bundle_with({
            "m_1": self.dropping_points(),
            "m_2": [(t, 36.0) for t in range(0, 3600, 60)],
        })
        assert detect_sync_drop(cpu, BOUNDS, SyncDropConfig(machine_fraction=0.8), 60) == []

    def test_late_drop_outside_lag_no_event(self):
        cpu = bundle_with({
            "m_1": self.dropping_points(drop_at=2400, recover_at=2700),
            "m_2": self.dropping_points(drop_at=2400, recover_at=2700),
        })
        assert detect_sync_drop(cpu, BOUNDS, SyncDropConfig(max_lag_steps=2), 60) == []

    def test_single_machine_job_no_event(self, caplog):
        cpu = bundle_with({"m_1": self.dropping_points()})
        with caplog.at_level("WARNING"):
            events = detect_sync_drop(cpu, BOUNDS, SyncDropConfig(), 60)
        assert events == []
        assert any("fewer than 2 machines" in r.message for r in caplog.records)

    def test_raising_min_drop_never_adds_events(self):
        cpu = bundle_with({
            "m_1": self.dropping_points(),
            "m_2": self.dropping_points(),
        })
        counts = [
            len(detect_sync_drop(cpu, BOUNDS, SyncDropConfig(min_drop_points=d), 60))
            for d in (10.0, 30.0, 35.0, 50.0)
        ]
        assert counts == sorted(counts, reverse=True)
        assert counts[0] == 1 and counts[-1] == 0


def thrashing_store(persist_steps=3, cpu_flat=False):
    """One finished job [600, 2400) on m_1 with a thrashing-shaped series."""
    res = 60
    samples = []
    for t in range(0, 3600, res):
        disk = 10.0
        if 600 <= t <= 2400:
            mem = 90.0
            cpu = 60.0 if cpu_flat else 60.0 - 30.0 * (t - 600) / 1800
        elif 2400 < t <= 2400 + persist_steps * res:
            mem, cpu = 50.0, 15.0
        elif t > 2400:
            mem, cpu, disk = 0.0, 0.0, 0.0  # machine released, reads all-zero
        else:
            mem, cpu = 30.0, 30.0
        samples.append(MetricSample(t, "m_1", cpu, mem, disk))
    tasks = [TaskRecord("j_1", "task_M1", 600, 2400, 1, Status.TERMINATED)]
    instances = [InstanceRecord("j_1", "task_M1", "m_1", 600, 2400, Status.TERMINATED)]
    return build_store(bundle_from_records(samples, tasks, instances))


class TestDetectThrashing:
    def test_detected_with_persistence(self):
        events = detect_thrashing(thrashing_store(), "j_1", ThrashingConfig())
        assert len(events) == 1
        e = events[0]
        assert e.kind is AnomalyKind.THRASHING
        assert e.interval == TimeWindow(600, 2460)
        assert e.evidence["post_end"]["nonzero_steps"] == 2.0

    def test_high_mem_flat_cpu_no_event(self):
        events = detect_thrashing(thrashing_store(cpu_flat=True), "j_1", ThrashingConfig())
        assert events == []

    def test_no_post_end_persistence_no_event(self):
        events = detect_thrashing(thrashing_store(persist_steps=0), "j_1", ThrashingConfig())
        assert events == []

    def test_unfinished_job_not_applicable(self):
        samples = [MetricSample(0, "m_1", 1, 1, 1)]
        tasks = [TaskRecord("j_1", "task_M1", 0, None, 1, Status.RUNNING)]
        instances = [InstanceRecord("j_1", "task_M1", "m_1", 0, None, Status.RUNNING)]
        store = build_store(bundle_from_records(samples, tasks, instances))
        with pytest.raises(NotApplicableError):
            detect_thrashing(store, "j_1", ThrashingConfig())

    def test_short_high_mem_window_no_event(self):
        events = detect_thrashing(
            thrashing_store(), "j_1", ThrashingConfig(min_duration_s=10000))
        assert events == []

    def test_raising_decline_threshold_never_adds_events(self):
        store = thrashing_store()
        counts = [
            len(detect_thrashing(store, "j_1", ThrashingConfig(cpu_decline_points=d)))
            for d in (5.0, 20.0, 29.0, 40.0)
        ]
        assert counts == sorted(counts, reverse=True)
        assert counts[0] == 1 and counts[-1] == 0


class TestScanWindow:
    def test_window_before_all_jobs_empty(self, fixed_store):
        assert scan_window(fixed_store, TimeWindow(0, 600)) == []

    def test_deterministic_and_sorted(self, fixed_store):
        w = fixed_store.horizon
        a = scan_window(fixed_store, w)
        b = scan_window(fixed_store, w)
        assert a == b
        keys = [(e.interval.t_from, e.job_id, e.kind.value) for e in a]
        assert keys == sorted(keys)

    def test_full_recall_and_precision_on_fixture(self, fixed_bundle, fixed_store):
        labels = load_labels(fixed_bundle.root_path)
        events = scan_window(fixed_store, fixed_store.horizon)
        got = {(e.job_id, e.kind.value) for e in events}
        want = {(lb.job_id, lb.kind) for lb in labels}
        assert got == want

    def test_stable_jobs_produce_no_events(self, fixed_bundle, fixed_store):
        labeled = {lb.job_id for lb in load_labels(fixed_bundle.root_path)}
        events = scan_window(fixed_store, fixed_store.horizon)
        assert all(e.job_id in labeled for e in events)


class TestSeverityAndSerialization:
    def test_severity_clamped(self, fixed_store):
        for e in scan_window(fixed_store, fixed_store.horizon):
            assert 0.0 <= e.severity <= 1.0

    def test_event_to_dict_shape(self, fixed_store):
        events = scan_window(fixed_store, fixed_store.horizon)
        d = events[0].to_dict()
        assert set(d) == {"kind", "job_id", "machine_ids", "t_from", "t_to",
                          "severity", "evidence"}

    def test_events_csv_shape(self, fixed_store):
        events = scan_window(fixed_store, fixed_store.horizon)
        text = events_csv(events)
        lines = text.strip().split("\n")
        assert lines[0] == "kind,job_id,t_from,t_to,severity,machines"
        assert len(lines) == len(events) + 1
        first = lines[1].split(",")
        assert first[0] in {"spike", "sync_drop", "thrashing"}

    def test_detector_config_from_dict(self):
        cfg = DetectorConfig.from_dict({"spike": {"min_abs_level": 80}})
        assert cfg.spike.min_abs_level == 80
        assert cfg.sync_drop.machine_fraction == 0.8
