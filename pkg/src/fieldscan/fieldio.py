"""Field file I/O.

Binary FLD1 layout (little-endian):

    magic "FLD1" | version u16 = 1 | d u8 | reserved u8 = 0 | n u32
    | dims: d x u64 | payload: n * prod(dims) x f64, site-major

Round-tripping a field through save/load preserves every payload byte.
A CSV import is provided for d <= 2 debugging: one row per site with
columns k1..kd, c1..cn.
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile

import numpy as np

from .errors import DataError, DimensionError, FormatError, TruncationError
from .field import FieldDims, MultiField

__all__ = ["save_field", "load_field", "load_field_csv", "atomic_write_bytes"]

MAGIC = b"FLD1"
VERSION = 1
_HEADER = struct.Struct("<4sHBBI")


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temp file in the same directory plus rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_field(field: MultiField, path) -> None:
    """Serialize ``field`` to ``path`` in FLD1 format (atomic write)."""
    dims = field.dims
    header = _HEADER.pack(MAGIC, VERSION, dims.d, 0, dims.n)
    body = struct.pack(f"<{dims.d}Q", *dims.dims)
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    atomic_write_bytes(path, header + body + payload)


def load_field(path) -> MultiField:
    """Load an FLD1 file, validating header, payload length, and finiteness."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: too short for an FLD1 header")
    magic, version, d, reserved, n = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if d < 1:
        raise FormatError(f"{path}: d must be >= 1")
    if reserved != 0:
        raise FormatError(f"{path}: reserved header byte is {reserved}, expected 0")
    offset = _HEADER.size
    dims_bytes = d * 8
    if len(raw) < offset + dims_bytes:
        raise TruncationError(f"{path}: header truncated before axis extents")
    dims = struct.unpack_from(f"<{d}Q", raw, offset)
    offset += dims_bytes
    try:
        fdims = FieldDims(dims, n)
    except (DimensionError, ValueError) as exc:
        raise FormatError(f"{path}: invalid dimensions in header: {exc}") from exc
    expected = fdims.total_values * 8
    actual = len(raw) - offset
    if actual != expected:
        raise TruncationError(
            f"{path}: payload is {actual} bytes, header promises {expected}"
        )
    values = np.frombuffer(raw, dtype="<f8", count=fdims.total_values, offset=offset)
    if not np.isfinite(values).all():
        raise DataError(f"{path}: payload contains non-finite values")
    return MultiField(fdims, values.astype(np.float64))


def load_field_csv(path, d: int) -> MultiField:
    """Import a field from CSV for ``d`` in {1, 2}.

    Each row holds the 0-based site coordinates followed by the n component
    values. Axis extents are inferred as max coordinate + 1; every site must
    appear exactly once. An optional non-numeric header row is skipped.
    """
    if d not in (1, 2):
        raise DimensionError(f"CSV import supports d in {{1, 2}}, got d={d}")
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise FormatError(f"{path}:{lineno}: non-numeric cell")
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError(f"{path}: rows have inconsistent column counts")
    n = width - d
    if n < 1:
        raise FormatError(f"{path}: expected at least {d + 1} columns, got {width}")
    data = np.asarray(rows, dtype=np.float64)
    coords = data[:, :d]
    if not np.array_equal(coords, np.floor(coords)) or (coords < 0).any():
        raise FormatError(f"{path}: site coordinates must be non-negative integers")
    coords = coords.astype(np.int64)
    extents = tuple(int(coords[:, i].max()) + 1 for i in range(d))
    fdims = FieldDims(extents, n)
    if len(rows) != fdims.total_sites:
        raise FormatError(
            f"{path}: {len(rows)} rows for a {extents} window of "
            f"{fdims.total_sites} sites"
        )
    flat = np.ravel_multi_index(tuple(coords[:, i] for i in range(d)), extents)
    if np.unique(flat).size != flat.size:
        raise FormatError(f"{path}: duplicate site rows")
    values = np.empty((fdims.total_sites, n), dtype=np.float64)
    values[flat] = data[:, d:]
    return MultiField(fdims, values.reshape(-1))
