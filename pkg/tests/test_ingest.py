from __future__ import annotations

import io
import json
import random

import pytest

from batchlens import errors
from batchlens.ingest import (
    INSTANCE_HEADER,
    TASK_HEADER,
    USAGE_HEADER,
    BundleManifest,
    Status,
    instance_csv,
    load_bundle,
    parse_batch_instances,
    parse_batch_tasks,
    parse_server_usage,
    parse_task_dependencies,
    task_csv,
    usage_csv,
)


def usage_stream(*rows: str) -> io.BytesIO:
    return io.BytesIO(("\n".join([USAGE_HEADER, *rows]) + "\n").encode())


def task_stream(*rows: str) -> io.BytesIO:
    return io.BytesIO(("\n".join([TASK_HEADER, *rows]) + "\n").encode())


def instance_stream(*rows: str) -> io.BytesIO:
    return io.BytesIO(("\n".join([INSTANCE_HEADER, *rows]) + "\n").encode())


class TestParseServerUsage:
    def test_plain_row(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,35.5,40.0,12.0"))
        assert report.ok
        assert len(samples) == 1
        s = samples[0]
        assert (s.timestamp, s.machine_id) == (0, "m_1")
        assert (s.cpu_util, s.mem_util, s.disk_util) == (35.5, 40.0, 12.0)

    def test_missing_field_rejected(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,,40.0,12.0"))
        assert samples == []
        assert report.errors[0].code == errors.MISSING_FIELD
        assert report.rows_rejected["server_usage"] == 1

    def test_out_of_range_clamped_with_warning(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,104.0,40.0,12.0"))
        assert samples[0].cpu_util == 100.0
        assert [w.code for w in report.warnings] == [errors.CLAMPED]
        assert report.ok  # warning, not rejection

    def test_negative_clamped_to_zero(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,-3.5,40.0,12.0"))
        assert samples[0].cpu_util == 0.0
        assert report.warnings[0].code == errors.CLAMPED

    def test_non_numeric_rejected(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,abc,40.0,12.0"))
        assert samples == []
        assert report.errors[0].code == errors.BAD_FIELD

    def test_nan_rejected(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,nan,40.0,12.0"))
        assert samples == []
        assert report.errors[0].code == errors.BAD_FIELD

    def test_negative_timestamp_rejected(self):
        samples, report = parse_server_usage(usage_stream("-5,m_1,10,10,10"))
        assert samples == []
        assert report.errors[0].code == errors.BAD_FIELD

    def test_wrong_column_count_rejected(self):
        samples, report = parse_server_usage(usage_stream("0,m_1,10,10"))
        assert report.errors[0].code == errors.BAD_ROW

    def test_missing_header_is_fatal(self):
        with pytest.raises(errors.FatalIngestError):
            parse_server_usage(io.BytesIO(b"0,m_1,10,10,10\n"))

    def test_non_utf8_is_fatal(self):
        with pytest.raises(errors.FatalIngestError):
            parse_server_usage(io.BytesIO(b"\xff\xfe" + USAGE_HEADER.encode()))

    def test_row_numbers_match_file_lines(self):
        _, report = parse_server_usage(usage_stream("0,m_1,10,10,10", "bad"))
        assert report.errors[0].row_number == 3  # header is line 1


class TestParseBatchTasks:
    def test_plain_row(self):
        records, report = parse_batch_tasks(task_stream("86400,90000,j_1,task_M1,3,Terminated"))
        assert report.ok
        r = records[0]
        assert (r.job_id, r.task_id) == ("j_1", "task_M1")
        assert (r.create_ts, r.end_ts, r.instance_count) == (86400, 90000, 3)
        assert r.status is Status.TERMINATED
        assert r.dependencies == ()

    def test_dependency_suffix_decoded(self):
        records, _ = parse_batch_tasks(task_stream("0,,j_1,task_M2_1,1,Running"))
        assert records[0].dependencies == ("task_M1",)
        assert records[0].end_ts is None

    def test_multi_dependency_chain(self):
        records, _ = parse_batch_tasks(task_stream("0,10,j_1,task_M3_1_2,1,Terminated"))
        assert records[0].dependencies == ("task_M1", "task_M2")

    def test_unparsable_dependency_tokens_warn(self):
        records, report = parse_batch_tasks(task_stream("0,10,j_1,task_M2_x,1,Terminated"))
        assert records[0].dependencies == ()
        assert any(w.code == errors.BAD_DEPENDENCIES for w in report.warnings)

    def test_opaque_task_id_no_warning(self):
        records, report = parse_batch_tasks(
            task_stream("0,10,j_1,task_Nzg3ODAwNDgz,1,Terminated"))
        assert records[0].dependencies == ()
        assert not report.warnings

    def test_duplicate_key_rejected(self):
        rows = ["0,10,j_1,task_M1,1,Terminated", "5,20,j_1,task_M1,2,Failed"]
        records, report = parse_batch_tasks(task_stream(*rows))
        assert len(records) == 1
        assert records[0].create_ts == 0
        assert report.errors[0].code == errors.DUPLICATE_KEY

    def test_unknown_status_maps_to_running_with_warning(self):
        records, report = parse_batch_tasks(task_stream("0,10,j_1,task_M1,1,Exploded"))
        assert records[0].status is Status.RUNNING
        assert report.warnings[0].code == errors.UNKNOWN_STATUS

    def test_status_case_insensitive(self):
        records, _ = parse_batch_tasks(task_stream("0,10,j_1,task_M1,1,tErMiNaTeD"))
        assert records[0].status is Status.TERMINATED

    def test_end_before_create_rejected(self):
        _, report = parse_batch_tasks(task_stream("100,50,j_1,task_M1,1,Terminated"))
        assert report.errors[0].code == errors.NEGATIVE_DURATION

    def test_zero_instance_count_rejected(self):
        _, report = parse_batch_tasks(task_stream("0,10,j_1,task_M1,0,Terminated"))
        assert report.errors[0].code == errors.BAD_FIELD


class TestParseBatchInstances:
    def test_plain_row(self):
        records, report = parse_batch_instances(
            instance_stream("86400,87000,j_1,task_M1,m_7,Terminated"))
        assert report.ok
        assert records[0].machine_id == "m_7"

    def test_empty_machine_rejected(self):
        _, report = parse_batch_instances(instance_stream("0,10,j_1,task_M1,,Terminated"))
        assert report.errors[0].code == errors.MISSING_FIELD

    def test_end_before_start_rejected(self):
        _, report = parse_batch_instances(instance_stream("100,50,j_1,task_M1,m_1,Terminated"))
        assert report.errors[0].code == errors.NEGATIVE_DURATION

    def test_duplicate_rows_are_distinct_instances(self):
        rows = ["0,10,j_1,task_M1,m_1,Terminated"] * 2
        records, report = parse_batch_instances(instance_stream(*rows))
        assert len(records) == 2
        assert report.ok


def test_dependency_convention_examples():
    assert parse_task_dependencies("task_M1") == ((), True)
    assert parse_task_dependencies("task_M2_1") == (("task_M1",), True)
    assert parse_task_dependencies("task_R5_3_4") == (("task_R3", "task_R4"), True)
    assert parse_task_dependencies("weird") == ((), True)
    assert parse_task_dependencies("task_M2_1x") == ((), False)


class TestRoundTrip:
    def test_usage_round_trip(self):
        rows = ["0,m_1,35.5,40.0,12.0", "60,m_2,0.0,100.0,55.25"]
        samples, _ = parse_server_usage(usage_stream(*rows))
        reparsed, report = parse_server_usage(io.BytesIO(usage_csv(samples).encode()))
        assert reparsed == samples
        assert report.ok

    def test_task_round_trip_preserves_absent_end(self):
        rows = ["0,,j_1,task_M1,2,Running", "5,900,j_2,task_M2_1,1,Failed"]
        records, _ = parse_batch_tasks(task_stream(*rows))
        reparsed, _ = parse_batch_tasks(io.BytesIO(task_csv(records).encode()))
        assert reparsed == records

    def test_instance_round_trip(self):
        rows = ["0,10,j_1,task_M1,m_1,Terminated", "7,,j_1,task_M1,m_2,Cancelled"]
        records, _ = parse_batch_instances(instance_stream(*rows))
        reparsed, _ = parse_batch_instances(io.BytesIO(instance_csv(records).encode()))
        assert reparsed == records


def test_rejection_completeness_random_rows():
    """Every input row lands in exactly one of: output, error report."""
    rng = random.Random(99)
    fragments = ["0", "-1", "3.5", "m_1", "", "abc", "120", "Terminated", "nan", "1e3"]
    for trial in range(200):
        n_rows = rng.randint(1, 12)
        rows = [",".join(rng.choice(fragments) for _ in range(rng.randint(3, 7)))
                for _ in range(n_rows)]
        samples, report = parse_server_usage(usage_stream(*rows))
        assert len(samples) == report.rows_accepted.get("server_usage", 0)
        assert len(samples) + report.rows_rejected.get("server_usage", 0) == n_rows
        assert len(report.errors) == report.rows_rejected.get("server_usage", 0)


class TestLoadBundle:
    def write(self, root, usage=None, tasks=None, instances=None):
        usage = usage if usage is not None else ["0,m_1,10,10,10", "60,m_1,12,11,10"]
        tasks = tasks if tasks is not None else ["0,60,j_1,task_M1,1,Terminated"]
        instances = instances if instances is not None else ["0,60,j_1,task_M1,m_1,Terminated"]
        (root / "server_usage.csv").write_text("\n".join([USAGE_HEADER, *usage]) + "\n")
        (root / "batch_task.csv").write_text("\n".join([TASK_HEADER, *tasks]) + "\n")
        (root / "batch_instance.csv").write_text("\n".join([INSTANCE_HEADER, *instances]) + "\n")

    def test_manifest_computed_fresh(self, tmp_path):
        self.write(tmp_path)
        bundle, report = load_bundle(tmp_path)
        assert report.ok
        m = bundle.manifest
        assert (m.machine_count, m.job_count, m.task_count, m.instance_count) == (1, 1, 1, 1)
        assert m.horizon_seconds == 60 + m.usage_resolution_s

    def test_manifest_drift_warns_and_corrects(self, tmp_path):
        self.write(tmp_path)
        bundle, _ = load_bundle(tmp_path)
        drifted = dict(bundle.manifest.to_dict())
        drifted["machine_count"] = 10
        (tmp_path / "manifest.json").write_text(json.dumps(drifted))
        bundle, report = load_bundle(tmp_path)
        assert bundle.manifest.machine_count == 1
        assert any(w.code == errors.MANIFEST_DRIFT for w in report.warnings)

    def test_existing_resolutions_kept(self, tmp_path):
        self.write(tmp_path)
        manifest = BundleManifest(
            epoch_ts=0, horizon_seconds=120, usage_resolution_s=60,
            scheduler_resolution_s=300, machine_count=1, job_count=1,
            task_count=1, instance_count=1)
        (tmp_path / "manifest.json").write_text(manifest.to_json())
        bundle, report = load_bundle(tmp_path)
        assert bundle.manifest.scheduler_resolution_s == 300
        assert report.ok

    def test_empty_usage_table_fatal(self, tmp_path):
        self.write(tmp_path, usage=[])
        with pytest.raises(errors.FatalIngestError) as exc:
            load_bundle(tmp_path)
        assert exc.value.code == errors.EMPTY_TABLE

    def test_missing_table_fatal(self, tmp_path):
        self.write(tmp_path)
        (tmp_path / "batch_instance.csv").unlink()
        with pytest.raises(errors.FatalIngestError) as exc:
            load_bundle(tmp_path)
        assert exc.value.code == errors.MISSING_TABLE

    def test_dangling_instance_warns(self, tmp_path):
        self.write(tmp_path, instances=["0,60,j_9,task_M9,m_1,Terminated"])
        _, report = load_bundle(tmp_path)
        assert any(w.code == errors.DANGLING_PARENT for w in report.warnings)

    def test_manifest_json_stable_key_order(self, tmp_path):
        self.write(tmp_path)
        bundle, _ = load_bundle(tmp_path)
        text = bundle.manifest.to_json()
        keys = [line.split('"')[1] for line in text.splitlines() if '":' in line]
        assert keys == list(BundleManifest.to_dict(bundle.manifest).keys())
