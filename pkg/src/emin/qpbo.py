"""QPBO partial labeling for arbitrary binary energies, plus the "improve"
extension (QPBOI) that monotonically refines a complete labeling.

The doubled construction represents every variable by two nodes: u_i carries
x_i and its complement node carries 1 - x_i.  Each pairwise table is split
in half; submodular tables connect (u_i, u_j) and the two complements,
non-submodular tables connect a node with the other variable's complement,
which makes the rewritten table submodular.  After a min-cut, a variable is
labeled only when its two nodes fall on opposite sides; labeled variables
enjoy weak persistency (some global optimum agrees with them).
"""

import numpy as np

from . import maxflow

SUBMOD_TOL = 1e-12


def qpbo_solve(be):
    """Partial labeling over {0, 1, -1}; -1 marks unknown."""
    n = be.n
    lam = be.g + be.f - be.e - be.h
    sub = lam >= -SUBMOD_TOL

    # half-weight terms (ti, tj, table) on the doubled node set
    ei, ej = be.ei, be.ej
    e, f, g, h = be.e, be.f, be.g, be.h
    s_i, s_j = ei[sub], ej[sub]
    s_e, s_f, s_g, s_h = e[sub], f[sub], g[sub], h[sub]
    ns = ~sub
    n_i, n_j = ei[ns], ej[ns]
    n_e, n_f, n_g, n_h = e[ns], f[ns], g[ns], h[ns]
    ti = np.concatenate([s_i, s_i + n, n_i, n_i + n])
    tj = np.concatenate([s_j, s_j + n, n_j + n, n_j])
    te = 0.5 * np.concatenate([s_e, s_h, n_g, n_f])
    tf = 0.5 * np.concatenate([s_f, s_g, n_h, n_e])
    tg = 0.5 * np.concatenate([s_g, s_f, n_e, n_h])
    th = 0.5 * np.concatenate([s_h, s_e, n_f, n_g])

    coef = np.concatenate([0.5 * (be.b - be.a), 0.5 * (be.a - be.b)])
    if ti.size:
        np.add.at(coef, ti, tf - te)
        np.add.at(coef, tj, th - tf)
    lam2 = np.maximum(tg + tf - te - th, 0.0)

    s, t = 2 * n, 2 * n + 1
    pos = coef > 0
    neg = coef < 0
    pair = lam2 > 0
    tails = np.concatenate([
        np.full(pos.sum(), s, dtype=np.int64),
        np.flatnonzero(neg),
        ti[pair],
    ])
    heads = np.concatenate([
        np.flatnonzero(pos),
        np.full(neg.sum(), t, dtype=np.int64),
        tj[pair],
    ])
    caps = np.concatenate([coef[pos], -coef[neg], lam2[pair]])
    indptr, to, cap, rev = maxflow.build_csr(tails, heads, caps, 2 * n + 2)
    maxflow.dinic(indptr, to, cap, rev, s, t)
    vis = maxflow.reachable(indptr, to, cap, s)
    out = np.full(n, -1, dtype=np.int64)
    u = vis[:n]
    v = vis[n:2 * n]
    labeled = u != v
    out[labeled & ~u] = 1
    out[labeled & u] = 0
    return out


def _merge(x, partial, idx=None):
    """Overwrite x with the labeled entries of a partial labeling."""
    out = x.copy()
    lab = partial >= 0
    if idx is None:
        out[lab] = partial[lab]
    else:
        out[idx[lab]] = partial[lab]
    return out


def qpboi_improve(be, init, seed=0, n_subsets=4, p_fix=0.5):
    """Monotone improvement of a complete labeling.

    The schedule is a fixed list of variable subsets drawn once from the
    seeded generator: first the full set (plain QPBO), then `n_subsets`
    pseudo-random fix-half masks.  For each entry the masked variables are
    fixed at the current labeling, QPBO solves the rest and the merged
    labeling is accepted only if its energy strictly decreases.  The whole
    schedule repeats until one full pass makes no change, which also makes
    the procedure idempotent in energy.
    """
    x = np.asarray(init, dtype=np.int64).copy()
    if x.shape != (be.n,):
        raise ValueError("init length mismatch")
    best = be.energy(x)
    rng = np.random.default_rng(seed)
    masks = [np.zeros(be.n, dtype=bool)]
    masks += [rng.random(be.n) < p_fix for _ in range(n_subsets)]
    improved = True
    while improved:
        improved = False
        for fixed in masks:
            active = ~fixed
            if not active.any():
                continue
            if fixed.any():
                sub, idx = be.restrict(active, x)
                part = qpbo_solve(sub)
                cand = _merge(x, part, idx)
            else:
                part = qpbo_solve(be)
                cand = _merge(x, part)
            val = be.energy(cand)
            if val < best:
                x, best = cand, val
                improved = True
    return x
