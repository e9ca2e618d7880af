"""Tail bounds and theoretical critical values for the scan statistic.

Everything here works on a Bernstein-type exponential inequality for the
window contrast of an m-dependent stationary field: a per-window tail bound
with a Gaussian-like branch for moderate thresholds and a heavier-tailed
branch for large ones, a union bound over the window family that groups
windows by volume (the bound depends on a window only through its volume),
and a bisection solver that inverts the family-wise bound into a critical
value.

All bound evaluations are done in log space so configurations whose
probabilities underflow a double still compare and sum correctly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from scipy.special import logsumexp

from .errors import ConvergenceError, DomainError
from .field import Box
from .scan import ScanSpace, enumerate_windows

__all__ = [
    "ModelParams",
    "BoundQuery",
    "CriticalValueResult",
    "per_window_bound",
    "fwer_bound",
    "critical_value",
    "finite_p_bound",
]

_VARIANTS = ("eq1", "theorem1")


@dataclass(frozen=True)
class ModelParams:
    """Model assumptions the bounds depend on.

    Parameters
    ----------
    m : int
        Dependence range: values at sites farther than ``m`` apart on some
        axis are independent.
    d : int
        Number of site axes.
    n : int
        Number of components observed per site.
    sigma : float
        Dispersion scale; ``sigma**2`` is the variance proxy in the moment
        condition behind the bound.
    H : float
        Envelope constant of the moment condition; ``H = sigma`` is the
        natural choice for Gaussian data.
    variant : str
        Which branch-selection rule to use, ``"eq1"`` (default) or
        ``"theorem1"``; see ``per_window_bound``.
    """

    m: int
    d: int
    n: int
    sigma: float
    H: float
    variant: str = "eq1"

    def __post_init__(self):
        if self.m < 1:
            raise DomainError(f"dependence range m must be >= 1, got {self.m}")
        if self.d < 1:
            raise DomainError(f"dimension d must be >= 1, got {self.d}")
        if self.n < 1:
            raise DomainError(f"component count n must be >= 1, got {self.n}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be finite and positive, got {self.sigma}")
        if not (self.H > 0 and math.isfinite(self.H)):
            raise DomainError(f"H must be finite and positive, got {self.H}")
        if self.variant not in _VARIANTS:
            raise DomainError(
                f"variant must be one of {_VARIANTS}, got {self.variant!r}"
            )
        if float(self.m) ** self.d > 1e15:
            raise DomainError(
                f"block volume m**d = {self.m}**{self.d} exceeds the supported range"
            )

    @property
    def block_volume(self) -> float:
        return float(self.m) ** self.d


@dataclass(frozen=True)
class BoundQuery:
    """One bound evaluation point: threshold plus window geometry."""

    y: float
    vol_in: int
    vol_out: int
    total: int

    def __post_init__(self):
        if not (self.y > 0):
            raise DomainError(f"threshold y must be > 0, got {self.y}")
        if self.vol_in < 1 or self.vol_out < 1:
            raise DomainError(
                f"window volumes must be >= 1, got ({self.vol_in}, {self.vol_out})"
            )
        if self.vol_in + self.vol_out != self.total:
            raise DomainError(
                f"volumes {self.vol_in} + {self.vol_out} != total {self.total}"
            )


@dataclass(frozen=True)
class CriticalValueResult:
    """Solved critical value with solver diagnostics."""

    y: float
    log_bound: float
    alpha: float
    rel_width: float
    degenerate: bool


def per_window_bound(query: BoundQuery, params: ModelParams) -> float:
    """Log of the tail probability bound for one window's sup-norm contrast.

    Writing ``vin`` for the window volume, ``vout`` for its complement and
    ``|W|`` for the total, the Gaussian-like branch is

        log(2 n) - y^2 vin vout / (4 m^d sigma^2 |W|)

    and the heavier-tailed branch is

        log(2 n) - y vin / (2 H m^d) + sigma^2 |W| vin / (4 H^2 m^d vout).

    The ``variant`` on ``params`` selects which branch applies:
    ``"theorem1"`` takes the Gaussian branch when
    ``vout <= sigma^2 |W| / (y H)`` and is continuous in y, while ``"eq1"``
    (the rule the critical-value equation is built from, and the default)
    takes it when ``vin <= sigma^2 |W| / (y H)`` and can jump upward where
    the branches switch. Both are valid upper bounds. The returned value
    may exceed 0 where the bound is vacuous; callers wanting a probability
    should clip.
    """
    y = query.y
    vin = query.vol_in
    vout = query.vol_out
    total = query.total
    md = params.block_volume
    sig2 = params.sigma**2
    H = params.H
    log2n = math.log(2.0 * params.n)
    if params.variant == "theorem1":
        use_gaussian = vout <= sig2 * total / (y * H)
    else:
        use_gaussian = vin <= sig2 * total / (y * H)
    if use_gaussian:
        return log2n - (y * y) * (vin * vout) / (4.0 * md * sig2 * total)
    return log2n - y * vin / (2.0 * H * md) + sig2 * total * vin / (
        4.0 * H * H * md * vout
    )


SpaceOrBoxes = Union[ScanSpace, Sequence[Box]]


def _volume_counts(space: SpaceOrBoxes, total: Optional[int]) -> tuple[Counter, int]:
    if isinstance(space, ScanSpace):
        boxes = enumerate_windows(space)
        total = space.dims.total_sites
    else:
        boxes = list(space)
        if not boxes:
            raise DomainError("window family must be non-empty")
        if total is None:
            raise DomainError("total site count is required with an explicit box list")
    return Counter(box.volume for box in boxes), total


def _log_bound_grouped(
    y: float, counts: Counter, total: int, params: ModelParams
) -> float:
    terms = []
    for vol, count in counts.items():
        query = BoundQuery(y=y, vol_in=vol, vol_out=total - vol, total=total)
        terms.append(per_window_bound(query, params) + math.log(count))
    return float(logsumexp(terms))


def fwer_bound(
    y: float,
    space: SpaceOrBoxes,
    params: ModelParams,
    total: Optional[int] = None,
) -> float:
    """Log of the union bound over the whole window family at threshold ``y``.

    ``space`` may be a ``ScanSpace`` (enumerated here) or an explicit box
    sequence, in which case ``total`` must give the site count. The
    per-window bound depends on a window only through its volume, so
    windows are grouped by volume and each group costs one evaluation plus
    ``log(count)``; groups combine by log-sum-exp.
    """
    counts, total = _volume_counts(space, total)
    return _log_bound_grouped(y, counts, total, params)


_REL_TOL = 1e-12
_BRACKET_CAP = 1e9
_BRACKET_FLOOR = 1e-12


def critical_value(
    alpha: float,
    space: SpaceOrBoxes,
    params: ModelParams,
    total: Optional[int] = None,
) -> CriticalValueResult:
    """Smallest threshold whose family-wise bound is at most ``alpha``.

    The bound's limit as y drops to 0 is ``2 n`` per window, so if
    ``2 n |family| <= alpha`` no positive threshold is needed; the result
    is flagged ``degenerate`` with y = 0. Otherwise the root is bracketed
    by doubling ``y_hi`` from 1 (capping at 1e9 with ``ConvergenceError``)
    and halving ``y_lo`` down to at most 1e-12, then bisected to relative
    width 1e-12. The returned y always satisfies ``fwer_bound(y) <= log
    alpha``; the bracket never does on its low side, making the result the
    smallest admissible threshold to within the stated width.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    counts, total = _volume_counts(space, total)
    log_alpha = math.log(alpha)
    n_windows = sum(counts.values())

    def logb(y: float) -> float:
        return _log_bound_grouped(y, counts, total, params)

    limit_at_zero = math.log(2.0 * params.n) + math.log(n_windows)
    if limit_at_zero <= log_alpha:
        return CriticalValueResult(
            y=0.0,
            log_bound=limit_at_zero,
            alpha=alpha,
            rel_width=0.0,
            degenerate=True,
        )
    y_hi = 1.0
    while logb(y_hi) > log_alpha:
        y_hi *= 2.0
        if y_hi > _BRACKET_CAP:
            raise ConvergenceError(
                f"no threshold below {_BRACKET_CAP:g} brings the family bound "
                f"under alpha={alpha}"
            )
    y_lo = y_hi / 2.0
    while y_lo > _BRACKET_FLOOR and logb(y_lo) <= log_alpha:
        y_lo /= 2.0
    while (y_hi - y_lo) > _REL_TOL * y_hi:
        mid = 0.5 * (y_lo + y_hi)
        if logb(mid) <= log_alpha:
            y_hi = mid
        else:
            y_lo = mid
    return CriticalValueResult(
        y=y_hi,
        log_bound=logb(y_hi),
        alpha=alpha,
        rel_width=(y_hi - y_lo) / y_hi,
        degenerate=False,
    )


def finite_p_bound(query: BoundQuery, p: float, params: ModelParams) -> float:
    """Log tail bound when the scan uses a finite p-norm.

    A p-norm over n components exceeding y forces some component to exceed
    ``y * n**(-1/p)``, so the sup-norm machinery applies at that deflated
    threshold; each of the n components contributes its per-component
    bound, which is exactly what the sup-norm bound's factor n counts. For
    ``p = inf`` this delegates unchanged.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"norm order must satisfy 1 <= p <= inf, got {p}")
    if math.isinf(p):
        return per_window_bound(query, params)
    deflated = BoundQuery(
        y=query.y * params.n ** (-1.0 / p),
        vol_in=query.vol_in,
        vol_out=query.vol_out,
        total=query.total,
    )
    return per_window_bound(deflated, params)
