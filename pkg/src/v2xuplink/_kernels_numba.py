"""Numba-compiled versions of the per-trial reduction kernels.

Importing this module requires numba; the backend selector treats an
ImportError as "numba unavailable" and falls back to the numpy kernels.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def min_tx_distance2(d2, tx):
    best = np.inf
    best_i = -1
    for i in range(d2.size):
        if tx[i] and d2[i] < best:
            best = d2[i]
            best_i = i
    return best, best_i


@njit(cache=True, nogil=True)
def interference_split(d2, power, tx, typical, alpha, excl_d2, skip):
    e = -0.5 * alpha
    i_typ = 0.0
    i_oth = 0.0
    min_d2 = np.inf
    for i in range(d2.size):
        if i == skip or not tx[i] or d2[i] <= excl_d2:
            continue
        c = power[i] * d2[i] ** e
        if typical[i]:
            i_typ += c
        else:
            i_oth += c
        if d2[i] < min_d2:
            min_d2 = d2[i]
    return i_typ, i_oth, min_d2
