"""Trace serialization (NDJSON + CSV mirror) and median-over-seeds curves."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .optimizers import RunTrace, TraceRecord

CSV_COLUMNS = ("k", "sim_time", "econ_cost", "total_shots", "exact_cost")
AXES = ("sim_time", "econ_cost", "total_shots")


def csv_path(path: str | os.PathLike) -> Path:
    return Path(path).with_suffix(".csv")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def _cell(value) -> str:
    # repr of a builtin float round-trips exactly
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def trace_emit(trace: RunTrace, path: str | os.PathLike) -> tuple[Path, Path]:
    """Write ``path`` as NDJSON (one header line, one line per record) plus a CSV mirror."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps({"type": "header", **trace.header}) + "\n")
        for rec in trace.records:
            fh.write(_dumps({"type": "record", **asdict(rec)}) + "\n")
    mirror = csv_path(path)
    with open(mirror, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in trace.records:
            writer.writerow([_cell(getattr(rec, c)) for c in CSV_COLUMNS])
    return path, mirror


_RECORD_FIELDS = {f.name for f in fields(TraceRecord)}


def trace_parse(path: str | os.PathLike) -> RunTrace:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise ValueError(f"{path} does not start with a header record")
    header = {k: v for k, v in lines[0].items() if k != "type"}
    records = []
    for doc in lines[1:]:
        if doc.get("type") != "record":
            raise ValueError(f"unexpected entry in {path}: {doc.get('type')!r}")
        records.append(TraceRecord(**{k: v for k, v in doc.items() if k in _RECORD_FIELDS}))
    return RunTrace(header=header, records=records)


def trace_errors(trace: RunTrace) -> np.ndarray:
    """Exact cost relative to the task reference: ``(cost - E0) / scale``."""
    ref = trace.header.get("reference_energy", 0.0)
    scale = trace.header.get("energy_scale", 1.0)
    return (trace.column("exact_cost") - ref) / scale


@dataclass
class SweepResult:
    grid: np.ndarray
    median: np.ndarray
    available: np.ndarray
    axis: str = "sim_time"


def lower_median(values: Sequence[float]) -> float:
    vals = sorted(values)
    return vals[(len(vals) - 1) // 2]


def step_values(x: np.ndarray, y: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Last observation at or before each grid point; NaN before the first one."""
    idx = np.searchsorted(x, grid, side="right") - 1
    return np.where(idx >= 0, y[np.maximum(idx, 0)], np.nan)


def default_grid(traces: Sequence[RunTrace], axis: str = "sim_time", points: int = 200) -> np.ndarray:
    starts = [t.column(axis)[0] for t in traces if len(t)]
    ends = [t.column(axis)[-1] for t in traces if len(t)]
    if not starts:
        raise ValueError("all traces are empty")
    lo = max(min(starts), 1e-12)
    hi = max(max(ends), lo * (1 + 1e-9))
    return np.geomspace(lo, hi, points)


def median_curve(
    traces: Sequence[RunTrace],
    grid: Sequence[float] | None = None,
    axis: str = "sim_time",
    relative: bool = True,
) -> SweepResult:
    """Pointwise lower median over traces of the step function ``x -> cost``.

    A trace contributes to a grid point only once its first record is at or
    before that point. ``relative`` subtracts the task reference energy and
    divides by its scale (both taken from the trace header).
    """
    if not traces:
        raise ValueError("median_curve needs at least one trace")
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    grid = default_grid(traces, axis) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    table = np.full((len(traces), grid.size), np.nan)
    for row, trace in enumerate(traces):
        if not len(trace):
            continue
        y = trace_errors(trace) if relative else trace.column("exact_cost")
        table[row] = step_values(trace.column(axis).astype(float), y, grid)
    available = np.sum(~np.isnan(table), axis=0)
    median = np.array(
        [lower_median(col[~np.isnan(col)]) if n else np.nan for col, n in zip(table.T, available)]
    )
    return SweepResult(grid=grid, median=median, available=available, axis=axis)


def time_to_threshold(curve: SweepResult, threshold: float) -> float:
    """First grid point where the median is at or below ``threshold`` (``inf`` if never)."""
    hit = np.flatnonzero(curve.median <= threshold)
    return float(curve.grid[hit[0]]) if hit.size else math.inf
