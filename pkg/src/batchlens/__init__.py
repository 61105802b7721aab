"""batchlens: analytics workbench for batch-scheduler cluster traces."""

from .anomaly import AnomalyEvent, AnomalyKind, Band, DetectorConfig, classify_band, scan_window
from .ingest import TraceBundle, ValidationReport, load_bundle
from .layout import LayoutStyle, build_snapshot, layout_snapshot
from .series import cluster_timeline, downsample, job_series_bundle, machine_series
from .store import TimeWindow, TraceStore, build_store
from .synth import SynthConfig, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AnomalyEvent",
    "AnomalyKind",
    "Band",
    "DetectorConfig",
    "LayoutStyle",
    "SynthConfig",
    "TimeWindow",
    "TraceBundle",
    "TraceStore",
    "ValidationReport",
    "build_snapshot",
    "build_store",
    "classify_band",
    "cluster_timeline",
    "downsample",
    "generate_synthetic",
    "job_series_bundle",
    "layout_snapshot",
    "load_bundle",
    "machine_series",
    "scan_window",
]
