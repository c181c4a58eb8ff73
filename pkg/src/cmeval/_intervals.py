"""Integer interval arithmetic shared by the evaluation modules.

All intervals are half-open ``[start, end)`` in integer milliseconds.
"""

import numpy as np


def merge(start, end, gap=0):
    """Union intervals, also joining runs separated by at most ``gap``.

    Inputs need not be sorted. Returns ``(start, end, members)`` where
    ``members`` counts the input intervals folded into each output interval.
    """
    start = np.asarray(start, dtype=np.int64)
    end = np.asarray(end, dtype=np.int64)
    if start.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    order = np.lexsort((end, start))
    s = start[order]
    e = end[order]
    reach = np.maximum.accumulate(e)
    new_run = np.empty(s.size, dtype=bool)
    new_run[0] = True
    new_run[1:] = s[1:] > reach[:-1] + gap
    first = np.flatnonzero(new_run)
    last = np.r_[first[1:], s.size] - 1
    return s[first], reach[last], np.diff(np.r_[first, s.size])


def covered_before(x, onset, offset):
    """Total length of sorted disjoint intervals lying before each point ``x``."""
    onset = np.asarray(onset, dtype=np.int64)
    offset = np.asarray(offset, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if onset.size == 0:
        return np.zeros(x.shape, dtype=np.int64)
    dur = offset - onset
    cum = np.r_[np.int64(0), np.cumsum(dur)]
    idx = np.searchsorted(onset, x, side="right")
    prev = np.maximum(idx - 1, 0)
    partial = np.where(idx > 0, np.clip(x - onset[prev], 0, dur[prev]), 0)
    return cum[prev] * (idx > 0) + partial


def overlap_with_union(start, end, onset, offset):
    """Overlap of each ``[start, end)`` with a sorted disjoint interval set."""
    return covered_before(end, onset, offset) - covered_before(start, onset, offset)


def overlap_pairs(a_start, a_end, b_start, b_end):
    """Enumerate overlapping pairs between window set ``a`` and interval set ``b``.

    ``b`` must be sorted by start; it may contain overlapping members. ``a``
    is arbitrary. Returns ``(ia, ib, overlap)`` for every pair with positive
    overlap, grouped by ``ia`` in ascending order.
    """
    a_start = np.asarray(a_start, dtype=np.int64)
    a_end = np.asarray(a_end, dtype=np.int64)
    b_start = np.asarray(b_start, dtype=np.int64)
    b_end = np.asarray(b_end, dtype=np.int64)
    if a_start.size == 0 or b_start.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    reach = np.maximum.accumulate(b_end)
    lo = np.searchsorted(reach, a_start, side="right")
    hi = np.searchsorted(b_start, a_end, side="left")
    counts = np.maximum(hi - lo, 0)
    total = int(counts.sum())
    ia = np.repeat(np.arange(a_start.size), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    ib = np.repeat(lo, counts) + offsets
    ov = np.minimum(a_end[ia], b_end[ib]) - np.maximum(a_start[ia], b_start[ib])
    keep = ov > 0
    return ia[keep], ib[keep], ov[keep]
