"""Global detection test and localization report.

``global_test`` compares the scan statistic against a critical value (from
the analytic bound, Monte Carlo calibration, or the user) and reports every
window whose contrast norm clears it, in order of evidence. ``expected_shift``
gives the mean contrast a hypothesized anomaly adds to a window, which is
what the localization behavior of the scan is measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .field import Box, MultiField
from .scan import ScanSpace, scan

__all__ = ["TestReport", "global_test", "expected_shift"]

_THRESHOLD_SOURCES = ("theoretical", "empirical", "user")


@dataclass(frozen=True)
class TestReport:
    """Outcome of the global test at one threshold.

    ``rejected_windows`` holds every admissible window whose contrast norm
    reaches the threshold; it is nonempty exactly when ``reject_global`` is
    set, because the maximizing window clears the threshold iff the
    statistic does.
    """

    alpha: Optional[float]
    threshold: float
    threshold_source: str
    statistic: float
    reject_global: bool
    argmax: Box
    p: float
    rejected_windows: list[tuple[Box, float]]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "threshold": self.threshold,
            "threshold_source": self.threshold_source,
            "statistic": self.statistic,
            "reject_global": self.reject_global,
            "argmax": {
                "origin": list(self.argmax.origin),
                "size": list(self.argmax.size),
            },
            "p": "inf" if math.isinf(self.p) else self.p,
            "rejected": [
                {"origin": list(box.origin), "size": list(box.size), "value": norm}
                for box, norm in self.rejected_windows
            ],
        }


def global_test(
    field: MultiField,
    space: ScanSpace,
    threshold: float,
    p: float = math.inf,
    alpha: Optional[float] = None,
    threshold_source: str = "user",
) -> TestReport:
    """Reject the no-anomaly hypothesis iff the scan statistic reaches
    ``threshold``.

    Rejected windows are sorted by norm descending, with lexicographic
    (origin, size) order breaking ties, so the most incriminated window
    comes first and the listing is reproducible.
    """
    if not (threshold > 0.0) or math.isinf(threshold):
        raise DomainError(
            f"threshold must be finite and positive, got {threshold}"
        )
    if threshold_source not in _THRESHOLD_SOURCES:
        raise DomainError(
            f"threshold_source must be one of {_THRESHOLD_SOURCES}, "
            f"got {threshold_source!r}"
        )
    result = scan(field, space, p, want_per_window=True)
    rejected_windows = [
        (box, norm)
        for box, _contrast, norm in result.per_window
        if norm >= threshold
    ]
    rejected_windows.sort(key=lambda item: (-item[1], item[0]))
    return TestReport(
        alpha=alpha,
        threshold=threshold,
        threshold_source=threshold_source,
        statistic=result.statistic,
        reject_global=result.statistic >= threshold,
        argmax=result.argmax,
        p=result.p,
        rejected_windows=rejected_windows,
    )


def expected_shift(theta: Box, theta0: Box, h, total: int) -> np.ndarray:
    """Mean contrast vector the shift ``h`` on box ``theta0`` induces on the
    scan window ``theta``.

    With ``o`` sites shared between the two boxes, the window mean gains
    ``h * o / vol_in`` and the complement mean gains
    ``h * (|theta0| - o) / vol_out``; the contrast gains the difference.
    A window disjoint from the anomaly still drifts by a small negative
    multiple of ``h`` because the complement mean moves.
    """
    vol_in = theta.volume
    vol_out = total - vol_in
    if vol_in <= 0 or vol_out <= 0:
        raise DomainError(f"window volume {vol_in} of {total} leaves no complement")
    overlap = theta.intersection_volume(theta0)
    inside = overlap / vol_in
    outside = (theta0.volume - overlap) / vol_out
    return np.asarray(h, dtype=np.float64) * (inside - outside)
