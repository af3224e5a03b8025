"""Trace-driven multicore cache simulation and synthetic sharing workloads."""

from .curve import CurvePoint, miss_curve
from .generate import SharingSpec, SharingSpecError, generate_trace, private_offsets
from .sim import CacheCounters, CacheGeometry, GeometryError, SimStats, parse_stats_csv, simulate
from .trace import Trace, TraceError, read_trace, write_trace

__all__ = [
    "CacheCounters", "CacheGeometry", "CurvePoint", "GeometryError", "SharingSpec",
    "SharingSpecError", "SimStats", "Trace", "TraceError", "generate_trace", "miss_curve",
    "parse_stats_csv", "private_offsets", "read_trace", "simulate", "write_trace",
]
