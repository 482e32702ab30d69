"""CSV readers and writers for clouds, time series and synthetic samples."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .data import SyntheticSample, TimeSeries


def _read_table(path) -> tuple[list[str] | None, np.ndarray]:
    """Numeric CSV with an optional header row (detected as a non-numeric first row)."""
    text = Path(path).read_text()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no rows")
    header = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: header but no data")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if header is not None and len(header) != width:
        raise ValueError(f"{path}: header has {len(header)} names for {width} columns")
    return header, data


def read_point_cloud(path, truth_column: str | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """One row per point.  ``truth_column`` (by header name) is split off as angles."""
    header, data = _read_table(path)
    truth = None
    if truth_column is not None:
        if header is None or truth_column not in header:
            raise ValueError(f"{path}: no column named {truth_column!r}")
        j = header.index(truth_column)
        truth = data[:, j].copy()
        data = np.delete(data, j, axis=1)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite coordinates")
    return data, truth


def read_time_series(path, rate: float = 1.0) -> TimeSeries:
    """Rows are frames, columns channels; header names become channel labels."""
    header, data = _read_table(path)
    channels = header or [f"ch{j}" for j in range(data.shape[1])]
    return TimeSeries(samples=data, rate=rate, channels=channels)


def synthetic_csv(sample: SyntheticSample) -> str:
    dim = sample.cloud.shape[1]
    lines = [",".join([f"x{j}" for j in range(dim)] + ["true_parameter"])]
    for row, t in zip(sample.cloud, sample.true_parameter):
        lines.append(",".join(repr(float(v)) for v in (*row, t)))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
