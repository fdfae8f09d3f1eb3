"""Compiled inner loops for the hot DBM paths.

Everything here operates on (n+1)x(n+1) int64 bound matrices with the same
conventions as zones.py (INF sentinel, saturation threshold _SAT).  When
numba is unavailable the same functions run as plain Python; the engines
stay correct, just slower.  ``kernel_successor_matrix`` fuses the whole
per-step pipeline (guards, resets, delay closure, invariants, inactive-clock
forgetting, widening, re-closure) into one call.
"""

from __future__ import annotations

import numpy as np

from .zones import INF, _SAT

try:  # pragma: no cover - exercised implicitly everywhere
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


@njit(cache=True)
def k_tighten(m, i, j, c):
    """Intersect canonical m with x_i - x_j <= c; 0 means empty."""
    if c >= m[i, j]:
        return 1
    if c + m[j, i] < 0:
        return 0
    n = m.shape[0]
    for a in range(n):
        mai = m[a, i]
        if mai >= _SAT:
            continue
        base = mai + c
        for b in range(n):
            v = base + m[j, b]
            if v < m[a, b] and v < _SAT:
                m[a, b] = v
    return 1


@njit(cache=True)
def k_close(m):
    """All-pairs closure; 0 means inconsistent."""
    n = m.shape[0]
    for k in range(n):
        for i in range(n):
            mik = m[i, k]
            if mik >= _SAT:
                continue
            for j in range(n):
                v = mik + m[k, j]
                if v < m[i, j] and v < _SAT:
                    m[i, j] = v
    for i in range(n):
        if m[i, i] < 0:
            return 0
    return 1


@njit(cache=True)
def kernel_successor_matrix(m, guard, resets, do_up, inv, free, caps):
    """Run one discrete step's zone pipeline in place; 0 means empty result.

    ``m`` starts as a copy of the delay-closed source matrix.  guard/inv are
    (k, 3) arrays of (i, j, c) rows; resets/free are clock index vectors;
    caps is the per-clock widening bound (index 0 unused).
    """
    n = m.shape[0]
    for r in range(guard.shape[0]):
        if not k_tighten(m, guard[r, 0], guard[r, 1], guard[r, 2]):
            return 0
    for r in range(resets.shape[0]):
        x = resets[r]
        for t in range(n):
            m[x, t] = m[0, t]
        for t in range(n):
            m[t, x] = m[t, 0]
    if do_up:
        for i in range(1, n):
            m[i, 0] = INF
    for r in range(inv.shape[0]):
        if not k_tighten(m, inv[r, 0], inv[r, 1], inv[r, 2]):
            return 0
    for r in range(free.shape[0]):
        x = free[r]
        for t in range(n):
            m[x, t] = INF
        for t in range(n):
            m[t, x] = m[t, 0]
        m[x, x] = 0
        m[0, x] = 0
    changed = False
    for i in range(1, n):
        capi = caps[i]
        for j in range(n):
            v = m[i, j]
            if v >= _SAT:
                continue
            if v > capi:
                m[i, j] = INF
                changed = True
    for j in range(1, n):
        capj = -caps[j]
        for i in range(n):
            if m[i, j] < capj:
                m[i, j] = capj
                changed = True
    if changed:
        return k_close(m)
    return 1


@njit(cache=True)
def k_covered(arr, count, zm):
    """1 iff some stored matrix includes zm (zm <= stored entrywise)."""
    n = zm.shape[0]
    for s in range(count):
        ok = True
        for i in range(n):
            for j in range(n):
                if zm[i, j] > arr[s, i, j]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return 1
    return 0


@njit(cache=True)
def k_equal_any(arr, count, zm):
    n = zm.shape[0]
    for s in range(count):
        same = True
        for i in range(n):
            for j in range(n):
                if zm[i, j] != arr[s, i, j]:
                    same = False
                    break
            if not same:
                break
        if same:
            return 1
    return 0


@njit(cache=True)
def k_keep_mask(arr, count, zm, keep):
    """keep[s] = 0 where stored s is included in zm; returns number kept."""
    n = zm.shape[0]
    kept = 0
    for s in range(count):
        drop = True
        for i in range(n):
            for j in range(n):
                if arr[s, i, j] > zm[i, j]:
                    drop = False
                    break
            if not drop:
                break
        if drop:
            keep[s] = 0
        else:
            keep[s] = 1
            kept += 1
    return kept


def warmup() -> None:
    """Trigger compilation on tiny inputs (cached across runs)."""
    m = np.zeros((2, 2), dtype=np.int64)
    rows = np.zeros((0, 3), dtype=np.int64)
    idx = np.zeros(0, dtype=np.int64)
    caps = np.zeros(2, dtype=np.int64)
    kernel_successor_matrix(m, rows, idx, True, rows, idx, caps)
    arr = np.zeros((1, 2, 2), dtype=np.int64)
    keep = np.zeros(1, dtype=np.uint8)
    k_covered(arr, 1, m)
    k_equal_any(arr, 1, m)
    k_keep_mask(arr, 1, m, keep)
