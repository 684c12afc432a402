"""Exact minimization of binary submodular energies by s-t min-cut.

Each pairwise table (e, f, g, h) is decomposed as

    e + (f - e) x_i + (h - f) x_j + (g + f - e - h) (1 - x_i) x_j

so the interaction coefficient g + f - e - h is the non-negative edge
capacity (it is non-negative exactly when the table is submodular).  Linear
coefficients accumulate per variable into a single terminal arc; negative
residues move into the constant offset, so cut weight + offset equals the
original energy for every assignment.  The source terminal plays label 0,
the sink terminal label 1; a variable gets label 1 when its node ends up on
the sink side of the cut (source side computed as residual reachability,
which fixes ties deterministically).
"""

import numpy as np

from . import maxflow

SUBMOD_TOL = 1e-12


class SubmodularityViolation(ValueError):
    pass


class FlowGraph:
    def __init__(self, be, indptr, to, cap, rev, offset):
        self.be = be
        self.n = be.n
        self.indptr = indptr
        self.to = to
        self.cap = cap
        self.rev = rev
        self.offset = offset
        self.source = be.n
        self.sink = be.n + 1

    def cut_weight(self, x):
        """Weight of the cut induced by assignment x (source side = label 0)."""
        x = np.asarray(x, dtype=np.int64)
        side = np.concatenate([x, [0, 1]])  # source, sink
        total = 0.0
        n_nodes = self.indptr.shape[0] - 1
        for u in range(n_nodes):
            for a in range(self.indptr[u], self.indptr[u + 1]):
                v = self.to[a]
                if side[u] == 0 and side[v] == 1:
                    total += self.cap[a]
        return total


def build_graph(be):
    lam = be.g + be.f - be.e - be.h
    bad = np.flatnonzero(lam < -SUBMOD_TOL)
    if bad.size:
        k = int(bad[0])
        raise SubmodularityViolation(
            "edge (%d, %d) is not submodular: e+h-f-g = %g"
            % (be.ei[k], be.ej[k], -lam[k]))
    lam = np.maximum(lam, 0.0)
    n = be.n
    coef = (be.b - be.a).astype(np.float64).copy()
    if be.m:
        np.add.at(coef, be.ei, be.f - be.e)
        np.add.at(coef, be.ej, be.h - be.f)
    offset = float(be.a.sum() + be.e.sum() + coef[coef < 0].sum())
    s, t = n, n + 1
    pos = coef > 0
    neg = coef < 0
    pair = lam > 0
    tails = np.concatenate([
        np.full(pos.sum(), s, dtype=np.int64),
        np.flatnonzero(neg),
        be.ei[pair],
    ])
    heads = np.concatenate([
        np.flatnonzero(pos),
        np.full(neg.sum(), t, dtype=np.int64),
        be.ej[pair],
    ])
    caps = np.concatenate([coef[pos], -coef[neg], lam[pair]])
    indptr, to, cap, rev = maxflow.build_csr(tails, heads, caps, n + 2)
    return FlowGraph(be, indptr, to, cap, rev, offset)


def min_cut(g):
    """Globally optimal labeling of the underlying binary energy."""
    cap = g.cap.copy()
    maxflow.dinic(g.indptr, g.to, cap, g.rev, g.source, g.sink)
    vis = maxflow.reachable(g.indptr, g.to, cap, g.source)
    x = (~vis[:g.n]).astype(np.int64)
    return x, g.be.energy(x)


def solve(be):
    return min_cut(build_graph(be))
