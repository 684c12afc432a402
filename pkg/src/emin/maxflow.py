"""Dinic max-flow on CSR adjacency arrays (numba kernels).

Graphs are built once as flat arrays so the solver has no Python overhead:
`to[a]` and `cap[a]` describe arc a, `rev[a]` is the index of its reverse
arc, and `indptr` delimits each node's arc range.
"""

import numpy as np
from numba import njit

EPS = 1e-11


def build_csr(tails, heads, caps, n_nodes):
    """Pack directed arcs (plus zero-capacity reverses) into CSR arrays."""
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    caps = np.asarray(caps, dtype=np.float64)
    m = tails.shape[0]
    at = np.concatenate([tails, heads])
    ah = np.concatenate([heads, tails])
    ac = np.concatenate([caps, np.zeros(m)])
    rev0 = np.concatenate([np.arange(m, 2 * m), np.arange(m)])
    order = np.argsort(at, kind="stable")
    pos = np.empty(2 * m, dtype=np.int64)
    pos[order] = np.arange(2 * m)
    counts = np.bincount(at, minlength=n_nodes)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, ah[order], ac[order], pos[rev0[order]]


@njit(cache=True)
def dinic(indptr, to, cap, rev, s, t):
    """Max s-t flow; `cap` is modified in place to the residual capacities."""
    n = indptr.shape[0] - 1
    level = np.empty(n, dtype=np.int32)
    it = np.empty(n, dtype=np.int64)
    q = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    total = 0.0
    while True:
        for i in range(n):
            level[i] = -1
        level[s] = 0
        q[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = q[qh]
            qh += 1
            for a in range(indptr[u], indptr[u + 1]):
                if cap[a] > EPS:
                    v = to[a]
                    if level[v] < 0:
                        level[v] = level[u] + 1
                        q[qt] = v
                        qt += 1
        if level[t] < 0:
            break
        for i in range(n):
            it[i] = indptr[i]
        while True:
            u = s
            plen = 0
            found = False
            while True:
                if u == t:
                    found = True
                    break
                advanced = False
                while it[u] < indptr[u + 1]:
                    a = it[u]
                    v = to[a]
                    if cap[a] > EPS and level[v] == level[u] + 1:
                        path[plen] = a
                        plen += 1
                        u = v
                        advanced = True
                        break
                    it[u] += 1
                if not advanced:
                    if u == s:
                        break
                    level[u] = -1
                    plen -= 1
                    a = path[plen]
                    u = to[rev[a]]
                    it[u] += 1
            if not found:
                break
            bn = cap[path[0]]
            for p in range(1, plen):
                if cap[path[p]] < bn:
                    bn = cap[path[p]]
            for p in range(plen):
                a = path[p]
                cap[a] -= bn
                cap[rev[a]] += bn
            total += bn
    return total


@njit(cache=True)
def reachable(indptr, to, cap, s):
    """Nodes reachable from s through positive residual capacity."""
    n = indptr.shape[0] - 1
    vis = np.zeros(n, dtype=np.bool_)
    q = np.empty(n, dtype=np.int64)
    vis[s] = True
    q[0] = s
    qh, qt = 0, 1
    while qh < qt:
        u = q[qh]
        qh += 1
        for a in range(indptr[u], indptr[u + 1]):
            if cap[a] > EPS:
                v = to[a]
                if not vis[v]:
                    vis[v] = True
                    q[qt] = v
                    qt += 1
    return vis
