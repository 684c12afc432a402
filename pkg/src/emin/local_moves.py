"""Point-wise greedy solvers: fixed-label ICM and adaptive-label ICM.

Both sweep the variables in index order (a seeded shuffled order is
available behind the `order` argument for the multiscale correlation
estimator).  Ties keep the current label; otherwise the lowest index wins.
"""

import numpy as np
import scipy.sparse as sp
from numba import njit

from .core import evaluate


@njit(cache=True)
def _icm_kernel(indptr, indices, wdata, D, V, labels, max_iters, order):
    n, l = D.shape
    costs = np.empty(l, dtype=np.float64)
    for _ in range(max_iters):
        changed = 0
        for oi in range(n):
            i = order[oi]
            for a in range(l):
                costs[a] = D[i, a]
            for p in range(indptr[i], indptr[i + 1]):
                wj = wdata[p]
                lj = labels[indices[p]]
                for a in range(l):
                    costs[a] += wj * V[a, lj]
            best = 0
            bc = costs[0]
            for a in range(1, l):
                if costs[a] < bc:
                    bc = costs[a]
                    best = a
            if costs[labels[i]] > bc:
                labels[i] = best
                changed += 1
        if changed == 0:
            break
    return labels


def icm(energy, init, max_iters=100, order=None):
    """Iterated conditional modes; each move is non-increasing by construction."""
    L = np.asarray(init, dtype=np.int64).copy()
    if L.shape != (energy.n,):
        raise ValueError("init length mismatch")
    if order is None:
        order = np.arange(energy.n, dtype=np.int64)
    else:
        order = np.asarray(order, dtype=np.int64)
    e0 = evaluate(energy, L)
    indptr, indices, wdata = energy.adjacency()
    out = _icm_kernel(indptr, indices, wdata, energy.D, energy.V, L,
                      int(max_iters), order)
    assert evaluate(energy, out) <= e0 + 1e-9
    return out


def compact_labels(L):
    """Relabel to the contiguous range 0..k-1, preserving label order."""
    uniq, inv = np.unique(np.asarray(L, dtype=np.int64), return_inverse=True)
    return inv.astype(np.int64), uniq.size


def adaptive_icm(W, init, max_iters=100):
    """Adaptive-label ICM for correlation clustering.

    Moves every point to the existing cluster it is most attracted to
    (attraction = summed affinity to the cluster's members), or to a fresh
    singleton when no attraction is positive.  Empty clusters are dropped
    and labels compacted after every sweep.
    """
    W = sp.csr_matrix(W)
    n = W.shape[0]
    L = np.asarray(init, dtype=np.int64).copy()
    if L.shape != (n,):
        raise ValueError("init length mismatch")
    L, k = compact_labels(L)
    indptr, indices, wdata = W.indptr, W.indices, W.data
    for _ in range(max_iters):
        changed = 0
        fresh = int(L.max()) + 1
        for i in range(n):
            nb = indices[indptr[i]:indptr[i + 1]]
            if nb.size == 0:
                continue
            attr = np.bincount(L[nb], weights=wdata[indptr[i]:indptr[i + 1]],
                               minlength=fresh)
            cur = L[i]
            best = int(np.argmax(attr))
            if attr[best] > 0.0:
                target = best
            else:
                # repelled (or indifferent) everywhere: go singleton
                if np.count_nonzero(L == cur) == 1:
                    continue
                target = fresh
                fresh += 1
            if target != cur:
                tgt_attr = attr[target] if target < attr.shape[0] else 0.0
                assert tgt_attr >= attr[cur] - 1e-9
                L[i] = target
                changed += 1
        L, k = compact_labels(L)
        if changed == 0:
            break
    return L
