"""Synthetic m-dependent Gaussian fields and a covariance diagnostic.

The generator tiles the observation window with cubes of side ``m`` anchored
at the origin and gives every site in a cube the same N(0, sigma^2) draw,
independently across cubes and components. Values from different cubes are
independent, so sites farther than ``m`` apart on any axis are independent:
the field is m-dependent by construction, and the shared draws inside a cube
make the dependence visible to covariance estimates at small lags.

Draws are produced with a counter-based generator keyed by the seed, so a
field is a pure function of (config, seed): the same inputs give the same
field on any platform, any number of threads, and any call order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .errors import DomainError
from .field import AnomalySpec, FieldDims, MultiField, inject_anomaly

__all__ = [
    "SimConfig",
    "splitmix64",
    "derive_rep_seed",
    "generate",
    "covariance_diagnostic",
    "CovarianceDiagnostic",
]

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit mix with good avalanche."""
    x &= _MASK64
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_rep_seed(master_seed: int, rep: int) -> int:
    """Decorrelated per-replication seed.

    Seeds for different reps of one master seed are far apart in the
    SplitMix64 sequence, so replications can run in any order or in
    parallel without sharing generator state.
    """
    if rep < 0:
        raise DomainError(f"replication index must be >= 0, got {rep}")
    return splitmix64((master_seed + (rep + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class SimConfig:
    """Inputs that determine a synthetic field (up to the seed)."""

    dims: FieldDims
    m: int
    sigma: float
    anomaly: Optional[AnomalySpec] = None

    def __post_init__(self):
        if self.m < 1:
            raise DomainError(f"dependence range m must be >= 1, got {self.m}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be finite and positive, got {self.sigma}")
        if self.anomaly is not None:
            self.anomaly.validate_against(self.dims)


def _block_normals(shape: tuple[int, ...], sigma: float, seed: int) -> np.ndarray:
    """One N(0, sigma^2) draw per entry of ``shape``, keyed by ``seed``.

    Philox is counter-based, so the draw for entry i is a fixed function of
    (seed, i). Uniforms are built from the top 53 bits shifted into (0, 1)
    (never exactly 0 or 1) and mapped through the inverse normal CDF.
    """
    count = math.prod(shape)
    bits = np.random.Generator(np.random.Philox(key=seed)).integers(
        0, 1 << 64, size=count, dtype=np.uint64, endpoint=False
    )
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return (sigma * ndtri(u)).reshape(shape)


def generate(config: SimConfig, seed: int) -> MultiField:
    """Sample one m-dependent field, applying the configured anomaly if any.

    Cubes of side ``m`` are anchored at the origin and truncated at the
    boundary; site k lies in the cube indexed by ``k // m`` per axis. Each
    (cube, component) pair gets one independent N(0, sigma^2) value.
    """
    dims = config.dims
    m = config.m
    n_blocks = tuple(-(-e // m) for e in dims.dims)
    draws = _block_normals(n_blocks + (dims.n,), config.sigma, seed)
    for axis, extent in enumerate(dims.dims):
        draws = np.take(draws, np.arange(extent) // m, axis=axis)
    field = MultiField.from_ndarray(draws, dims.n)
    if config.anomaly is not None:
        field = inject_anomaly(field, config.anomaly)
    return field


@dataclass(frozen=True)
class CovarianceDiagnostic:
    """Empirical covariance by axis lag, averaged over components.

    ``cov[axis][lag]`` estimates Cov(X_k, X_{k + lag * e_axis}) from all
    site pairs at that lag, pooled across components, after centering each
    component at its sample mean. ``counts`` holds the number of
    (pair, component) terms behind each estimate; entries with no pairs
    (lag >= extent) are 0 with count 0. ``degenerate`` is set when every
    component is constant, in which case all covariances are exactly 0.
    """

    max_lag: int
    cov: np.ndarray
    counts: np.ndarray
    degenerate: bool


def covariance_diagnostic(field: MultiField, max_lag: int) -> CovarianceDiagnostic:
    """Estimate the covariance at axis-aligned lags 0..max_lag.

    For an m-dependent field the estimates at lags >= m should sit at 0 up
    to sampling noise, and the lag-0 entry estimates the site variance.
    Comparing where the curve dies out against candidate m values is the
    intended use when the dependence range is unknown.
    """
    if max_lag < 0:
        raise DomainError(f"max_lag must be >= 0, got {max_lag}")
    arr = field.as_ndarray()
    d = field.dims.d
    centered = arr - arr.reshape(-1, field.dims.n).mean(axis=0)
    cov = np.zeros((d, max_lag + 1))
    counts = np.zeros((d, max_lag + 1), dtype=np.int64)
    for axis in range(d):
        extent = field.dims.dims[axis]
        for lag in range(max_lag + 1):
            if lag >= extent:
                continue
            lead = [slice(None)] * (d + 1)
            trail = [slice(None)] * (d + 1)
            lead[axis] = slice(0, extent - lag)
            trail[axis] = slice(lag, extent)
            prods = centered[tuple(lead)] * centered[tuple(trail)]
            cov[axis, lag] = float(prods.mean())
            counts[axis, lag] = prods.size
    flat = arr.reshape(-1, field.dims.n)
    degenerate = bool(np.all(flat == flat[0]))
    return CovarianceDiagnostic(
        max_lag=max_lag, cov=cov, counts=counts, degenerate=degenerate
    )
