"""Compiled implementations of the group statistics.

Same contracts as kernels._numpy. The sort is delegated to numpy's C argsort (default introsort: grouping
needs no stability);
the compiled part is a single linear walk over the sorted rows with a scratch
count array wiped between groups, so memory stays O(rows + vocabulary). No
fastmath: results must agree with the numpy path to float rounding, not to
reassociation.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _entropy_runs(sorted_codes, sorted_items, n_items, alpha):
    n = sorted_codes.shape[0]
    vals = np.empty(n, np.float64)
    counts = np.zeros(n_items, np.int64)
    touched = np.empty(n_items, np.int64)
    i = 0
    while i < n:
        code = sorted_codes[i]
        j = i
        ntouch = 0
        while j < n and sorted_codes[j] == code:
            it = sorted_items[j]
            if counts[it] == 0:
                touched[ntouch] = it
                ntouch += 1
            counts[it] += 1
            j += 1
        denom = (j - i) + alpha * n_items
        ent = 0.0
        for t in range(ntouch):
            p = (counts[touched[t]] + alpha) / denom
            ent -= p * np.log2(p)
        if alpha > 0.0 and n_items > ntouch:
            p0 = alpha / denom
            ent -= (n_items - ntouch) * p0 * np.log2(p0)
        for t in range(ntouch):
            counts[touched[t]] = 0
        for r in range(i, j):
            vals[r] = ent
        i = j
    return vals


@njit(cache=True)
def _maxprob_runs(sorted_codes, sorted_users, n_users, alpha):
    n = sorted_codes.shape[0]
    vals = np.empty(n, np.float64)
    counts = np.zeros(n_users, np.int64)
    touched = np.empty(n_users, np.int64)
    i = 0
    while i < n:
        code = sorted_codes[i]
        j = i
        ntouch = 0
        while j < n and sorted_codes[j] == code:
            u = sorted_users[j]
            if counts[u] == 0:
                touched[ntouch] = u
                ntouch += 1
            counts[u] += 1
            j += 1
        maxc = 0
        for t in range(ntouch):
            if counts[touched[t]] > maxc:
                maxc = counts[touched[t]]
        val = (maxc + alpha) / ((j - i) + alpha * n_users)
        for t in range(ntouch):
            counts[touched[t]] = 0
        for r in range(i, j):
            vals[r] = val
        i = j
    return vals


@njit(cache=True)
def _distinct_runs(sorted_codes, sorted_users, n_users):
    n = sorted_codes.shape[0]
    vals = np.empty(n, np.int64)
    seen = np.zeros(n_users, np.uint8)
    touched = np.empty(n_users, np.int64)
    i = 0
    while i < n:
        code = sorted_codes[i]
        j = i
        ntouch = 0
        while j < n and sorted_codes[j] == code:
            u = sorted_users[j]
            if seen[u] == 0:
                seen[u] = 1
                touched[ntouch] = u
                ntouch += 1
            j += 1
        for t in range(ntouch):
            seen[touched[t]] = 0
        for r in range(i, j):
            vals[r] = ntouch
        i = j
    return vals


def entropy_rows(codes, items, n_items, alpha):
    order = np.argsort(codes)
    vals = _entropy_runs(codes[order], items[order], n_items, float(alpha))
    out = np.empty_like(vals)
    out[order] = vals
    return out


def maxprob_rows(codes, users, n_users, alpha):
    order = np.argsort(codes)
    vals = _maxprob_runs(codes[order], users[order], n_users, float(alpha))
    out = np.empty_like(vals)
    out[order] = vals
    return out


def distinct_rows(codes, users, n_users):
    order = np.argsort(codes)
    vals = _distinct_runs(codes[order], users[order], n_users)
    out = np.empty_like(vals)
    out[order] = vals
    return out
