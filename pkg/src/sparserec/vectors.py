"""Small helpers for head/tail splits of real vectors.

Ties in magnitude break toward the smaller index everywhere, so head
selection is deterministic.
"""

from __future__ import annotations

import numpy as np


def head_indices(x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest-magnitude entries, sorted ascending."""
    x = np.asarray(x)
    if k <= 0:
        return np.zeros(0, dtype=np.int64)
    k = min(k, x.size)
    order = np.lexsort((np.arange(x.size), -np.abs(x)))
    return np.sort(order[:k])


def best_k_term(x: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(np.asarray(x, dtype=np.float64))
    idx = head_indices(x, k)
    out[idx] = x[idx]
    return out


def tail_norm(x: np.ndarray, k: int) -> float:
    """l2 norm of x minus its best k-term approximation."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.linalg.norm(x - best_k_term(x, k)))
