"""Pure numpy implementations of the counting kernels.

Same signatures and results as the compiled ``_ckernels`` module.  Work is
split into fixed-size row chunks so memory stays bounded; chunk size does
not depend on the thread count, so float reductions are order-stable.
"""
from __future__ import annotations

import numpy as np

from .ffield import KernelTables

BLOCK = 1 << 20  # pair evaluations per chunk


def _rows_per_chunk(m: int) -> int:
    return max(1, BLOCK // max(m, 1))


def _add(t: KernelTables, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if t.k == 1:
        s = a + b
        s[s >= t.p] -= t.p
        return s
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    a = a.copy()
    b = b.copy()
    for i in range(t.k):
        s = a % t.p + b % t.p
        s[s >= t.p] -= t.p
        out += s * t.pw[i]
        a //= t.p
        b //= t.p
    return out


def _mul(t: KernelTables, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if t.k == 1:
        return (a * b) % t.p
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape, dtype=np.int64)
    nz = (a != 0) & (b != 0)
    out[nz] = t.exp[t.log[a[nz]] + t.log[b[nz]]]
    return out


def _form_block(t: KernelTables, X: np.ndarray, Y: np.ndarray, metric: str) -> np.ndarray:
    """Matrix of ||x-y|| (metric 'distance') or x.y (metric 'dot')."""
    acc = np.zeros((X.shape[0], Y.shape[0]), dtype=np.int64)
    if t.k > 1 and t.add.shape[0] == t.q:
        pair = t.subsq if metric == "distance" else t.mul
        for i in range(X.shape[1]):
            acc = t.add[acc, pair[X[:, i][:, None], Y[:, i][None, :]]]
        return acc.astype(np.int64)
    for i in range(X.shape[1]):
        xi = X[:, i][:, None]
        yi = Y[:, i][None, :]
        if metric == "distance":
            term = t.sq[_add(t, xi, t.neg[yi])]
        else:
            term = _mul(t, xi, yi)
        acc = _add(t, acc, term)
    return acc


def form_counts(F: np.ndarray, E: np.ndarray, t: KernelTables, metric: str) -> np.ndarray:
    counts = np.zeros(t.q, dtype=np.int64)
    step = _rows_per_chunk(E.shape[0])
    for start in range(0, F.shape[0], step):
        vals = _form_block(t, F[start:start + step], E, metric)
        counts += np.bincount(vals.ravel(), minlength=t.q)
    return counts


def distance_counts(F: np.ndarray, E: np.ndarray, t: KernelTables) -> np.ndarray:
    return form_counts(F, E, t, "distance")


def dot_counts(F: np.ndarray, E: np.ndarray, t: KernelTables) -> np.ndarray:
    return form_counts(F, E, t, "dot")


def form_energy(F: np.ndarray, E: np.ndarray, t: KernelTables, metric: str) -> int:
    """sum over x in F, t in F_q of #{y in E : form(x, y) = t}**2."""
    total = 0
    step = _rows_per_chunk(E.shape[0])
    for start in range(0, F.shape[0], step):
        vals = _form_block(t, F[start:start + step], E, metric)
        rows = vals.shape[0]
        keyed = vals + (np.arange(rows, dtype=np.int64) * t.q)[:, None]
        hist = np.bincount(keyed.ravel(), minlength=rows * t.q)
        total += int(np.dot(hist, hist))
    return total


def char_energy(G: np.ndarray, trs: np.ndarray, cos_tab: np.ndarray, sin_tab: np.ndarray) -> float:
    """sum_{s != 0} sum_x |sum_y exp(2 pi i tr(s * G[x, y]) / p)|^2."""
    q = trs.shape[0]
    n, m = G.shape
    total = 0.0
    step = _rows_per_chunk(m)
    for s in range(1, q):
        row = trs[s]
        for start in range(0, n, step):
            idx = row[G[start:start + step]]
            re = cos_tab[idx].sum(axis=1)
            im = sin_tab[idx].sum(axis=1)
            total += float(np.sum(re * re + im * im))
    return total
