"""Small numeric helpers."""

from __future__ import annotations

import numpy as np


def logsumexp1d(a: np.ndarray) -> float:
    """log(sum(exp(a))) for a 1-D array; scipy's version carries too much
    dispatch overhead for the tight loops here."""
    m = float(np.max(a))
    if not np.isfinite(m):
        return m
    return m + float(np.log(np.sum(np.exp(a - m))))
