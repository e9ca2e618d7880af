"""Window enumeration, prefix-sum tables, and the CUSUM scan statistic.

The scan contrasts the sample mean inside each admissible window against the
sample mean over its complement and maximizes a p-norm of that contrast over
the window family. Window sums come from a zero-padded d-dimensional prefix
table, so each window costs 2^d table lookups instead of a rescan.

The per-window inner loop runs on a compiled extension when available; set
``FIELDSCAN_NO_EXT=1`` to force the pure-numpy fallback. Both backends are
importable directly for benchmarking.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import _scan_np
from .errors import (
    DegenerateWindowError,
    DimensionError,
    DomainError,
    EmptyScanSpaceError,
)
from .field import Box, FieldDims, MultiField

__all__ = [
    "CubicWindows",
    "AllWindows",
    "ExplicitWindows",
    "ScanSpace",
    "PrefixTable",
    "ContrastWeights",
    "ScanResult",
    "enumerate_windows",
    "build_prefix",
    "window_sum",
    "contrast_weights",
    "compute_L",
    "scan",
    "active_backend",
]

if os.environ.get("FIELDSCAN_NO_EXT"):
    _backend = _scan_np
else:
    try:
        from . import _scanext as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _scan_np


def active_backend() -> str:
    """Name of the kernel backend selected at import, 'cython' or 'numpy'."""
    return "numpy" if _backend is _scan_np else "cython"


@dataclass(frozen=True)
class CubicWindows:
    """Every placement of a cube with ``side`` sites per axis."""

    side: int

    def __post_init__(self):
        if self.side < 1:
            raise DomainError(f"cubic window side must be >= 1, got {self.side}")


@dataclass(frozen=True)
class AllWindows:
    """Every box contained in the observation window."""


@dataclass(frozen=True)
class ExplicitWindows:
    """A caller-supplied window list (kept with duplicates, sorted)."""

    boxes: tuple[Box, ...]

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))


WindowGenerator = Union[CubicWindows, AllWindows, ExplicitWindows]


@dataclass(frozen=True)
class ScanSpace:
    """The admissible window family: a generator filtered by volume fraction.

    A generated box is kept iff ``gamma0 * |W| <= volume <= gamma1 * |W|``,
    which screens out windows too small to matter or so large they swallow
    the complement.
    """

    dims: FieldDims
    generator: WindowGenerator
    gamma0: float = 0.05
    gamma1: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.gamma0 < 1.0 and 0.0 < self.gamma1 < 1.0):
            raise DomainError("gamma0 and gamma1 must lie in (0, 1)")
        if self.gamma0 > self.gamma1:
            raise DomainError(
                f"gamma0 must not exceed gamma1, got ({self.gamma0}, {self.gamma1})"
            )

    def volume_bounds(self) -> tuple[float, float]:
        total = self.dims.total_sites
        return self.gamma0 * total, self.gamma1 * total


@dataclass(frozen=True)
class PrefixTable:
    """Zero-padded cumulative sums: entry (j1..jd, c) sums component c over all
    sites k with k_i < j_i on every axis. Stored flat, C order."""

    dims: FieldDims
    cums: np.ndarray

    def as_ndarray(self) -> np.ndarray:
        shape = tuple(e + 1 for e in self.dims.dims) + (self.dims.n,)
        return self.cums.reshape(shape)


@dataclass(frozen=True)
class ContrastWeights:
    """Norm summary of the implicit contrast weights of one window.

    The weight vector assigns ``1/vol_in`` inside the window and
    ``-1/vol_out`` on the complement, so its 1-norm is exactly 2 and its
    squared 2-norm is ``total / (vol_in * vol_out)``.
    """

    vol_in: int
    vol_out: int
    l1_norm: float
    l2_norm_sq: float


@dataclass(frozen=True)
class ScanResult:
    """Outcome of one scan: the max-norm statistic and where it was attained."""

    statistic: float
    argmax: Box
    p: float
    per_window: Optional[list[tuple[Box, np.ndarray, float]]] = None


def _window_volume_ok(volume: int, lo: float, hi: float) -> bool:
    return lo <= volume <= hi


def enumerate_windows(space: ScanSpace) -> list[Box]:
    """Materialize the window family in lexicographic (origin, size) order.

    Raises
    ------
    EmptyScanSpaceError
        If no box passes containment and the volume-fraction test.
    """
    dims = space.dims
    lo, hi = space.volume_bounds()
    boxes: list[Box] = []
    gen = space.generator
    if isinstance(gen, CubicWindows):
        k = gen.side
        if all(k <= e for e in dims.dims) and _window_volume_ok(k**dims.d, lo, hi):
            size = (k,) * dims.d
            for origin in product(*(range(e - k + 1) for e in dims.dims)):
                boxes.append(Box(origin, size))
    elif isinstance(gen, AllWindows):
        for origin in product(*(range(e) for e in dims.dims)):
            for size in product(*(range(1, e - o + 1) for o, e in zip(origin, dims.dims))):
                if _window_volume_ok(math.prod(size), lo, hi):
                    boxes.append(Box(origin, size))
    elif isinstance(gen, ExplicitWindows):
        for box in gen.boxes:
            box.require_within(dims)
        boxes = sorted(
            box for box in gen.boxes if _window_volume_ok(box.volume, lo, hi)
        )
    else:
        raise TypeError(f"unknown window generator {gen!r}")
    if not boxes:
        raise EmptyScanSpaceError(
            f"no admissible windows for {gen!r} on dims {dims.dims} "
            f"with gamma=({space.gamma0}, {space.gamma1})"
        )
    return boxes


def _boxes_to_arrays(boxes: Sequence[Box]) -> tuple[np.ndarray, np.ndarray]:
    origins = np.array([b.origin for b in boxes], dtype=np.int64)
    sizes = np.array([b.size for b in boxes], dtype=np.int64)
    return origins, sizes


@lru_cache(maxsize=16)
def _cached_layout(space: ScanSpace) -> tuple[tuple[Box, ...], np.ndarray, np.ndarray]:
    """Enumeration plus kernel-ready arrays, memoized per (hashable) space.

    Repeated scans of the same space (Monte Carlo calibration) would
    otherwise rebuild thousands of Box objects per replication. All callers
    share the cached arrays; the kernels only read them.
    """
    boxes = tuple(enumerate_windows(space))
    origins, sizes = _boxes_to_arrays(boxes)
    return boxes, origins, sizes


def build_prefix(field: MultiField) -> PrefixTable:
    """Cumulative-sum table over all site axes, zero-padded at index 0."""
    arr = field.as_ndarray()
    d = field.dims.d
    cums = arr
    for axis in range(d):
        cums = cums.cumsum(axis=axis)
    cums = np.pad(cums, [(1, 0)] * d + [(0, 0)])
    return PrefixTable(field.dims, np.ascontiguousarray(cums).reshape(-1))


def window_sum(table: PrefixTable, box: Box) -> np.ndarray:
    """Componentwise sum of field values over ``box``, via 2^d signed corners."""
    box.require_within(table.dims)
    cums = table.as_ndarray()
    d = table.dims.d
    out = np.zeros(table.dims.n, dtype=np.float64)
    for corner in range(1 << d):
        idx = tuple(
            box.origin[axis] + (box.size[axis] if (corner >> axis) & 1 else 0)
            for axis in range(d)
        )
        if (d - corner.bit_count()) % 2 == 0:
            out += cums[idx]
        else:
            out -= cums[idx]
    return out


def contrast_weights(box: Box, total: int) -> ContrastWeights:
    """Weight-norm summary for a window of ``box.volume`` sites out of ``total``."""
    vol_in = box.volume
    if vol_in <= 0 or vol_in >= total:
        raise DegenerateWindowError(
            f"window volume {vol_in} of {total} leaves no complement"
        )
    vol_out = total - vol_in
    return ContrastWeights(
        vol_in=vol_in,
        vol_out=vol_out,
        l1_norm=2.0,
        l2_norm_sq=total / (vol_in * vol_out),
    )


def compute_L(table: PrefixTable, box: Box) -> np.ndarray:
    """Contrast vector: mean inside ``box`` minus mean over its complement."""
    weights = contrast_weights(box, table.dims.total_sites)
    s_in = window_sum(table, box)
    s_total = window_sum(table, Box((0,) * table.dims.d, table.dims.dims))
    return s_in / weights.vol_in - (s_total - s_in) / weights.vol_out


def _validate_norm_order(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"norm order must satisfy 1 <= p <= inf, got {p}")
    return p


def scan(
    field: MultiField,
    space: ScanSpace,
    p: float = math.inf,
    want_per_window: bool = False,
) -> ScanResult:
    """Maximize the p-norm of the window contrast over the window family.

    Ties in the maximum go to the lexicographically first (origin, size)
    box, so results are deterministic regardless of how the family might be
    partitioned across workers.
    """
    p = _validate_norm_order(p)
    if field.dims != space.dims:
        raise DimensionError(
            f"field dims {field.dims} do not match scan space dims {space.dims}"
        )
    boxes, origins, sizes = _cached_layout(space)
    table = build_prefix(field)
    norms, contrasts = _backend.window_norms(
        table.as_ndarray(),
        origins,
        sizes,
        field.dims.total_sites,
        p,
        want_l=want_per_window,
    )
    best = int(np.argmax(norms))
    per_window = None
    if want_per_window:
        per_window = [
            (box, contrasts[i].copy(), float(norms[i])) for i, box in enumerate(boxes)
        ]
    return ScanResult(
        statistic=float(norms[best]),
        argmax=boxes[best],
        p=p,
        per_window=per_window,
    )


def dump_per_window_csv(result: ScanResult, path) -> None:
    """Write the per-window contrasts of a scan to CSV for inspection.

    Columns: origin per axis, size per axis, contrast per component, norm.
    """
    if result.per_window is None:
        raise DomainError("scan was run without want_per_window=True")
    import csv

    first_box = result.per_window[0][0]
    d = len(first_box.origin)
    n = len(result.per_window[0][1])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"origin{i + 1}" for i in range(d)]
            + [f"size{i + 1}" for i in range(d)]
            + [f"L{i + 1}" for i in range(n)]
            + ["norm"]
        )
        for box, contrast, norm in result.per_window:
            writer.writerow(
                list(box.origin)
                + list(box.size)
                + [repr(v) for v in contrast.tolist()]
                + [repr(norm)]
            )
