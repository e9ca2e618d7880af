"""Lattice field containers, box geometry, and anomaly injection.

A field lives on a finite d-dimensional window of lattice sites; every site
carries an n-component real vector. Values are stored flat in site-major
order: the last lattice axis varies fastest across sites and the n components
of a site are contiguous, so ``index(k, c) = ravel(k) * n + c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, ShapeError

__all__ = [
    "FieldDims",
    "MultiField",
    "Box",
    "AnomalySpec",
    "inject_anomaly",
]

_MAX_SITES = 2**64 - 1


@dataclass(frozen=True)
class FieldDims:
    """Extent of the observation window and the number of components per site.

    Parameters
    ----------
    dims : tuple of int
        Extent of each lattice axis, all >= 1.
    n : int
        Components per site, >= 1.
    """

    dims: tuple[int, ...]
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(e) for e in self.dims))
        object.__setattr__(self, "n", int(self.n))
        if len(self.dims) < 1:
            raise DimensionError("need at least one lattice axis")
        if any(e < 1 for e in self.dims):
            raise DimensionError(f"axis extents must be >= 1, got {self.dims}")
        if self.n < 1:
            raise ShapeError(f"component count must be >= 1, got {self.n}")
        if math.prod(self.dims) > _MAX_SITES:
            raise DimensionError("site count exceeds 64-bit index space")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def total_sites(self) -> int:
        return math.prod(self.dims)

    @property
    def total_values(self) -> int:
        return self.total_sites * self.n


@dataclass(frozen=True, order=True)
class Box:
    """Axis-aligned hyperrectangle of lattice sites, 0-based, size-exclusive.

    Covers sites k with ``origin[i] <= k[i] < origin[i] + size[i]`` on every
    axis. Ordering is lexicographic on (origin, size), which is the
    tie-breaking order used throughout the scan.
    """

    origin: tuple[int, ...]
    size: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(int(o) for o in self.origin))
        object.__setattr__(self, "size", tuple(int(s) for s in self.size))
        if len(self.origin) != len(self.size):
            raise DimensionError("origin and size must have the same length")
        if any(o < 0 for o in self.origin):
            raise DimensionError(f"origin must be non-negative, got {self.origin}")
        if any(s < 1 for s in self.size):
            raise DimensionError(f"size must be >= 1 per axis, got {self.size}")

    @property
    def volume(self) -> int:
        return math.prod(self.size)

    def fits_within(self, dims: FieldDims) -> bool:
        return len(self.size) == dims.d and all(
            o + s <= e for o, s, e in zip(self.origin, self.size, dims.dims)
        )

    def require_within(self, dims: FieldDims) -> None:
        if not self.fits_within(dims):
            raise DimensionError(f"box {self} does not fit in window {dims.dims}")

    def intersection_volume(self, other: "Box") -> int:
        """Number of sites shared with ``other``, by per-axis overlap."""
        if len(other.size) != len(self.size):
            raise DimensionError("boxes have different dimensionality")
        vol = 1
        for o1, s1, o2, s2 in zip(self.origin, self.size, other.origin, other.size):
            lo = max(o1, o2)
            hi = min(o1 + s1, o2 + s2)
            if hi <= lo:
                return 0
            vol *= hi - lo
        return vol

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(o, o + s) for o, s in zip(self.origin, self.size))


@dataclass(frozen=True)
class MultiField:
    """Immutable n-variate field on a d-dimensional lattice window.

    ``values`` is a flat, read-only float64 array in site-major order with
    components contiguous per site. All entries must be finite.
    """

    dims: FieldDims
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        if vals.size != self.dims.total_values:
            raise ShapeError(
                f"expected {self.dims.total_values} values for dims {self.dims.dims} "
                f"with n={self.dims.n}, got {vals.size}"
            )
        if not np.isfinite(vals).all():
            raise DataError("field values must all be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_ndarray(cls, array: np.ndarray, n: int | None = None) -> "MultiField":
        """Build a field from an ndarray shaped ``(*dims, n)``.

        With ``n`` omitted the last axis is taken as the component axis.
        With ``n`` given, a matching last axis is taken as components; an
        array without a component axis is accepted for ``n = 1``.
        """
        arr = np.asarray(array, dtype=np.float64)
        if n is None:
            dims, n = arr.shape[:-1], arr.shape[-1]
        elif arr.ndim >= 1 and arr.shape[-1] == n:
            dims = arr.shape[:-1]
        elif n == 1:
            dims = arr.shape
        else:
            raise ShapeError(f"last axis is {arr.shape[-1]}, expected n={n}")
        return cls(FieldDims(dims, n), arr.reshape(-1))

    def as_ndarray(self) -> np.ndarray:
        """Read-only view shaped ``(*dims, n)``."""
        return self.values.reshape(*self.dims.dims, self.dims.n)

    def site_index(self, site: tuple[int, ...], component: int) -> int:
        """Flat index of ``(site, component)`` in ``values``."""
        idx = 0
        for k, e in zip(site, self.dims.dims):
            if not 0 <= k < e:
                raise DimensionError(f"site {site} outside window {self.dims.dims}")
            idx = idx * e + k
        if not 0 <= component < self.dims.n:
            raise ShapeError(f"component {component} outside 0..{self.dims.n - 1}")
        return idx * self.dims.n + component


@dataclass(frozen=True)
class AnomalySpec:
    """A mean shift applied on a box: every site in ``box`` gets ``shift`` added."""

    box: Box
    shift: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "shift", tuple(float(h) for h in self.shift))
        if not all(math.isfinite(h) for h in self.shift):
            raise DataError("shift components must be finite")

    def validate_against(self, dims: FieldDims) -> None:
        self.box.require_within(dims)
        if len(self.shift) != dims.n:
            raise ShapeError(
                f"shift has {len(self.shift)} components, field has n={dims.n}"
            )


def inject_anomaly(field: MultiField, spec: AnomalySpec) -> MultiField:
    """Return a copy of ``field`` with ``spec.shift`` added on every site of ``spec.box``.

    The input field is left untouched; only the ``volume(box) * n`` entries
    inside the box differ in the result.
    """
    spec.validate_against(field.dims)
    out = field.as_ndarray().copy()
    out[spec.box.slices()] += np.asarray(spec.shift, dtype=np.float64)
    return MultiField(field.dims, out.reshape(-1))
