"""Pure-numpy scan kernel: vectorized inclusion-exclusion over box corners.

Fallback for the compiled extension; both backends implement the same
``window_norms`` contract and accumulate corners in the same order so their
results agree to the last few ulps.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def window_norms(cums, origins, sizes, total_vol, p, want_l=False):
    """Per-window contrast norms from a padded prefix table.

    Parameters
    ----------
    cums : ndarray, shape (*extents + 1, n)
        Zero-padded cumulative sums of the field.
    origins, sizes : int64 ndarray, shape (N, d)
        Window corners and sizes, one row per window.
    total_vol : int
        Site count of the full observation window.
    p : float
        Norm order in [1, inf].
    want_l : bool
        Also return the (N, n) array of per-window contrast vectors.

    Returns
    -------
    norms : ndarray, shape (N,)
    contrasts : ndarray, shape (N, n), or None
    """
    n_windows, d = origins.shape
    n = cums.shape[-1]
    acc = np.zeros((n_windows, n), dtype=np.float64)
    for corner in range(1 << d):
        idx = tuple(
            origins[:, axis] + (sizes[:, axis] if (corner >> axis) & 1 else 0)
            for axis in range(d)
        )
        if (d - int(corner).bit_count()) % 2 == 0:
            acc += cums[idx]
        else:
            acc -= cums[idx]
    totals = cums[tuple(e - 1 for e in cums.shape[:-1])]
    vol_in = sizes.prod(axis=1, dtype=np.float64)
    vol_out = float(total_vol) - vol_in
    contrasts = acc / vol_in[:, None] - (totals[None, :] - acc) / vol_out[:, None]
    if np.isinf(p):
        norms = np.abs(contrasts).max(axis=1)
    elif p == 1.0:
        norms = np.abs(contrasts).sum(axis=1)
    elif p == 2.0:
        norms = np.sqrt((contrasts * contrasts).sum(axis=1))
    else:
        norms = (np.abs(contrasts) ** p).sum(axis=1) ** (1.0 / p)
    return norms, (contrasts if want_l else None)
