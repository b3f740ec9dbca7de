"""Pure-numpy group statistics over encoded log rows.

Rows are grouped by an int64 code (the encoded attribute pattern, optionally
combined with the query id). Each function returns one value per row: the
statistic of the group that row belongs to. Group values do not depend on row
order, so results are permutation-stable.
"""

from __future__ import annotations

import numpy as np


def _groups(codes: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    uniq, inv = np.unique(codes, return_inverse=True)
    totals = np.bincount(inv, minlength=len(uniq)).astype(np.float64)
    return inv.astype(np.int64), len(uniq), totals


def _pair_counts(inv: np.ndarray, items: np.ndarray, n_items: int):
    """Counts of (group, item) pairs, plus group-run boundaries for reduceat."""
    key = inv * np.int64(n_items) + items
    uk, cnt = np.unique(key, return_counts=True)
    g = (uk // n_items).astype(np.int64)
    starts = np.concatenate(([0], np.flatnonzero(np.diff(g)) + 1))
    return g, cnt.astype(np.float64), starts


def entropy_rows(
    codes: np.ndarray, items: np.ndarray, n_items: int, alpha: float
) -> np.ndarray:
    """Smoothed entropy (bits) of the item distribution within each row's group."""
    inv, n_groups, totals = _groups(codes)
    g, cnt, starts = _pair_counts(inv, items, n_items)
    denom = totals + alpha * n_items
    p = (cnt + alpha) / denom[g]
    terms = p * np.log2(p)
    ent = -np.add.reduceat(terms, starts)
    if alpha > 0.0:
        nnz = np.bincount(g, minlength=n_groups)
        p0 = alpha / denom
        ent -= np.where(n_items > nnz, (n_items - nnz) * p0 * np.log2(p0), 0.0)
    return ent[inv]


def maxprob_rows(
    codes: np.ndarray, users: np.ndarray, n_users: int, alpha: float
) -> np.ndarray:
    """Smoothed maximum user probability within each row's group."""
    inv, _, totals = _groups(codes)
    g, cnt, starts = _pair_counts(inv, users, n_users)
    maxc = np.maximum.reduceat(cnt, starts)
    return ((maxc + alpha) / (totals + alpha * n_users))[inv]


def distinct_rows(codes: np.ndarray, users: np.ndarray, n_users: int) -> np.ndarray:
    """Number of distinct users observed within each row's group."""
    inv, n_groups, _ = _groups(codes)
    g, _, starts = _pair_counts(inv, users, n_users)
    nnz = np.bincount(g, minlength=n_groups)
    return nnz.astype(np.int64)[inv]
