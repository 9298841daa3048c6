"""ZKF1 binary field files, JSON sidecars and CSV exports.

ZKF1 layout (little endian): ``b"ZKF1"``, u32 nx, u32 ny, f64 lx, f64 ly,
then nx*ny f64 values with the x-index fastest.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .grid import Field2D, Grid2D, Profile1D

MAGIC = b"ZKF1"
_HEADER = struct.Struct("<4sIIdd")
MAX_NODES = 1 << 28


class FieldFormatError(ValueError):
    """Raised for malformed ZKF1 input."""


def field_to_bytes(f: Field2D) -> bytes:
    g = f.grid
    head = _HEADER.pack(MAGIC, g.nx, g.ny, g.lx, g.ly)
    return head + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def field_from_bytes(buf: bytes) -> Field2D:
    if len(buf) < _HEADER.size:
        raise FieldFormatError("truncated header")
    magic, nx, ny, lx, ly = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if nx * ny > MAX_NODES:
        raise FieldFormatError(f"dimensions {nx}x{ny} exceed limit")
    need = _HEADER.size + 8 * nx * ny
    if len(buf) != need:
        raise FieldFormatError(f"expected {need} bytes, got {len(buf)}")
    try:
        grid = Grid2D(nx, ny, lx, ly)
    except ValueError as exc:
        raise FieldFormatError(str(exc)) from exc
    vals = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).astype(float)
    return Field2D(grid, vals.reshape(ny, nx))


def write_field(path, f: Field2D) -> Path:
    path = Path(path)
    f.check_finite()
    path.write_bytes(field_to_bytes(f))
    return path


def read_field(path) -> Field2D:
    return field_from_bytes(Path(path).read_bytes())


def write_field_csv(path, f: Field2D) -> Path:
    path = Path(path)
    g = f.grid
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for j in range(g.ny):
            for i in range(g.nx):
                w.writerow([repr(float(g.x[i])), repr(float(g.y[j])), repr(float(f.values[j, i]))])
    return path


def write_profiles_csv(path, columns: dict[str, np.ndarray]) -> Path:
    """Write equal-length 1D columns under a header row."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    if len({len(d) for d in data}) > 1:
        raise ValueError("columns have different lengths")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([repr(float(v)) for v in row])
    return path


def profile_columns(p: Profile1D, name: str) -> dict[str, np.ndarray]:
    return {"y": p.coords, name: p.values}


def write_json(path, doc) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path
