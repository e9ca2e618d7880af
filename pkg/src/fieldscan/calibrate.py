"""Monte Carlo calibration of the scan statistic under the null.

The empirical critical value is a high quantile of the scan statistic over
independent null replications. Each replication draws its field from a seed
derived with ``derive_rep_seed``, so the sample is a pure function of
(config, master seed); threads only change wall time, never the result.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .field import AnomalySpec
from .scan import ScanSpace, scan
from .simulate import SimConfig, derive_rep_seed, generate

__all__ = [
    "CalibrationConfig",
    "CalibrationResult",
    "empirical_critical_value",
    "empirical_rates",
    "RateEstimate",
    "resolve_threads",
]


def resolve_threads(threads: Optional[int]) -> int:
    """Worker count: explicit argument, else FIELDSCAN_THREADS, else CPU count."""
    if threads is None:
        env = os.environ.get("FIELDSCAN_THREADS")
        if env:
            threads = int(env)
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise DomainError(f"thread count must be >= 1, got {threads}")
    return threads


@dataclass(frozen=True)
class CalibrationConfig:
    """Inputs that determine a calibration run (up to the master seed)."""

    sim: SimConfig
    space: ScanSpace
    p: float = math.inf
    alpha: float = 0.05
    reps: int = 500

    def __post_init__(self):
        if self.sim.anomaly is not None:
            raise DomainError("calibration must run under the null (no anomaly)")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.reps < 2:
            raise DomainError(f"reps must be >= 2, got {self.reps}")
        if self.sim.dims != self.space.dims:
            raise DomainError("simulation dims and scan space dims must match")


@dataclass(frozen=True)
class CalibrationResult:
    """Empirical critical value plus the full null sample behind it."""

    y_hat: float
    sample: np.ndarray
    rank: int
    reps: int
    alpha: float
    at_sample_max: bool


def _quantile_rank(alpha: float, reps: int) -> int:
    """1-based order-statistic rank of the empirical (1 - alpha) quantile.

    The small subtraction guards against (1 - alpha) * reps landing just
    above an integer in floating point and shifting the rank up by one.
    """
    rank = math.ceil((1.0 - alpha) * reps - 1e-9)
    return min(max(rank, 1), reps)


def _null_statistics(
    config: CalibrationConfig, master_seed: int, threads: Optional[int]
) -> np.ndarray:
    def one_rep(rep: int) -> float:
        field = generate(config.sim, derive_rep_seed(master_seed, rep))
        return scan(field, config.space, config.p).statistic

    workers = resolve_threads(threads)
    if workers == 1:
        stats = [one_rep(rep) for rep in range(config.reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(one_rep, range(config.reps)))
    return np.asarray(stats, dtype=np.float64)


def empirical_critical_value(
    config: CalibrationConfig,
    master_seed: int,
    threads: Optional[int] = None,
) -> CalibrationResult:
    """Empirical (1 - alpha) quantile of the null scan statistic.

    The quantile is the order statistic at rank ``ceil((1 - alpha) * reps)``
    of the sorted sample. ``at_sample_max`` flags the case where that rank
    is the sample maximum, a sign that ``reps`` is too small for the
    requested ``alpha``.
    """
    sample = np.sort(_null_statistics(config, master_seed, threads))
    rank = _quantile_rank(config.alpha, config.reps)
    return CalibrationResult(
        y_hat=float(sample[rank - 1]),
        sample=sample,
        rank=rank,
        reps=config.reps,
        alpha=config.alpha,
        at_sample_max=(rank == config.reps),
    )


@dataclass(frozen=True)
class RateEstimate:
    """Monte Carlo rejection rate of a fixed threshold."""

    rate: float
    rejections: int
    reps: int
    threshold: float


def empirical_rates(
    sim: SimConfig,
    space: ScanSpace,
    threshold: float,
    reps: int,
    master_seed: int,
    p: float = math.inf,
    threads: Optional[int] = None,
) -> RateEstimate:
    """Fraction of replications whose scan statistic reaches ``threshold``.

    With ``sim.anomaly`` unset this estimates the family-wise error rate of
    the threshold; with an anomaly configured it estimates power.
    """
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    if not math.isfinite(threshold):
        raise DomainError(f"threshold must be finite, got {threshold}")

    def one_rep(rep: int) -> bool:
        field = generate(sim, derive_rep_seed(master_seed, rep))
        return scan(field, space, p).statistic >= threshold

    workers = resolve_threads(threads)
    if workers == 1:
        flags = [one_rep(rep) for rep in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(one_rep, range(reps)))
    rejections = int(sum(flags))
    return RateEstimate(
        rate=rejections / reps,
        rejections=rejections,
        reps=reps,
        threshold=threshold,
    )
