"""Time-series CSV and binary field snapshots.

Snapshot layout (all little-endian)::

    b"KKF1"
    u64 n_omega, u64 n_theta, u64 n_Omega
    f64 d_omega, f64 d_t, f64 d_Omega, f64 G_omega, f64 t
    f64 values[n_omega][n_theta][n_Omega]      (row-major, Omega fastest)
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .model import GridSpec
from .solver import SERIES_FIELDS, DensityField, SeriesRecord

MAGIC = b"KKF1"
_HEADER = struct.Struct("<4s3Q5d")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_series(path, records, fields=SERIES_FIELDS) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(fields)
            for rec in records:
                w.writerow([_fmt(getattr(rec, f) if not isinstance(rec, dict) else rec[f])
                            for f in fields])
    except OSError as exc:
        raise OSError(f"cannot write series to {path}: {exc}") from exc


def read_series(path) -> list[SeriesRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [SeriesRecord(**{k: (int(v) if k == "step" else float(v)) for k, v in r.items()})
            for r in rows]


def write_snapshot(path, field: DensityField) -> None:
    g = field.grid
    header = _HEADER.pack(MAGIC, g.n_omega, g.n_theta, g.n_Omega,
                          g.d_omega, g.d_t, g.d_Omega, g.G_omega, field.t)
    data = np.ascontiguousarray(field.values, dtype="<f8").tobytes(order="C")
    try:
        Path(path).write_bytes(header + data)
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc


def read_snapshot(path) -> DensityField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a KKF1 snapshot")
    magic, n_w, n_th, n_k, d_w, d_t, d_W, G, t = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 8 * n_w * n_th * n_k
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n_w, n_th, n_k)
    grid = GridSpec(d_omega=d_w, d_t=d_t, G_omega=G, T=max(t, d_t), n_theta=int(n_th),
                    d_Omega=d_W, n_Omega=int(n_k))
    if grid.n_omega != n_w:
        raise ValueError(f"{path}: n_omega {n_w} inconsistent with G_omega/d_omega")
    return DensityField(values.astype(float), grid, t)
