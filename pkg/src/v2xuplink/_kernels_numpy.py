"""Pure-numpy reference implementations of the per-trial reduction kernels.

These are the fallback path selected with V2X_BACKEND=numpy; the jit
versions in ``_kernels_numba`` compute the same quantities with sequential
loops. Sampling is never done here, only deterministic reductions over the
sampled arrays, so the two backends agree to summation round-off.
"""

from __future__ import annotations

import numpy as np


def min_tx_distance2(d2: np.ndarray, tx: np.ndarray) -> tuple[float, int]:
    """Smallest squared distance over transmitting vehicles and its index.

    Returns (inf, -1) when no vehicle transmits.
    """
    idx = np.flatnonzero(tx)
    if idx.size == 0:
        return np.inf, -1
    j = int(np.argmin(d2[idx]))
    return float(d2[idx[j]]), int(idx[j])


def interference_split(
    d2: np.ndarray,
    power: np.ndarray,
    tx: np.ndarray,
    typical: np.ndarray,
    alpha: float,
    excl_d2: float,
    skip: int,
) -> tuple[float, float, float]:
    """Aggregate faded interference, split by typical line membership.

    Sums power[i] * d2[i]^(-alpha/2) over transmitting vehicles whose
    squared distance strictly exceeds ``excl_d2``, skipping index ``skip``
    (the serving transmitter; pass -1 to keep everyone). Returns
    (I_typical_line, I_other_lines, min kept squared distance).
    """
    keep = tx & (d2 > excl_d2)
    if skip >= 0:
        keep = keep.copy()
        keep[skip] = False
    if not keep.any():
        return 0.0, 0.0, np.inf
    contrib = power[keep] * d2[keep] ** (-0.5 * alpha)
    t = typical[keep]
    i_typ = float(contrib[t].sum())
    i_oth = float(contrib[~t].sum())
    return i_typ, i_oth, float(d2[keep].min())
