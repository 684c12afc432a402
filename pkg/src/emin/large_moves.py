"""Large move-making solvers.

alpha_beta_swap / alpha_expansion handle fixed-label energies; the
*_and_explore variants implement the exploration scheme for correlation
clustering, where swapping or expanding against an empty extra label lets
the number of clusters grow or shrink.

Every binary step is solved exactly by min-cut when the induced binary
energy is submodular and by QPBOI otherwise; a step is accepted only when
the full-energy value strictly decreases, which guarantees both global
monotonicity and termination.
"""

import numpy as np

from . import mincut, qpbo
from .core import BinaryEnergy, evaluate
from .corrclust import affinity_edges, cc_energy_edges
from .local_moves import compact_labels


def winner_take_all(D):
    """Per-variable unary argmin (lowest index on ties)."""
    return np.argmin(D, axis=1).astype(np.int64)


def _solve_binary(be, x0, seed, stats):
    """Exact min-cut when submodular, QPBOI improvement otherwise.

    `seed` varies per binary step so the random fixing subsets inside
    QPBOI are decorrelated across steps; reusing one subset schedule for
    every step leaves all steps stuck on the same blind spots.
    """
    if be.is_submodular():
        if stats is not None:
            stats["exact_steps"] = stats.get("exact_steps", 0) + 1
        x, _ = mincut.solve(be)
        if be.energy(x) > be.energy(x0):
            x = np.asarray(x0, dtype=np.int64)
        return x
    if stats is not None:
        stats["improve_steps"] = stats.get("improve_steps", 0) + 1
    return qpbo.qpboi_improve(be, x0, seed=seed)


def _swap_subenergy(energy, L, alpha, beta):
    """Binary sub-energy over variables labeled alpha (0) or beta (1)."""
    active = (L == alpha) | (L == beta)
    idx = np.flatnonzero(active)
    remap = -np.ones(energy.n, dtype=np.int64)
    remap[idx] = np.arange(idx.size)
    a = energy.D[idx, alpha].copy()
    b = energy.D[idx, beta].copy()
    mi = active[energy.ei]
    mj = active[energy.ej]
    both = mi & mj
    V = energy.V
    w = energy.w
    sel = mi & ~mj
    if np.any(sel):
        lj = L[energy.ej[sel]]
        ti = remap[energy.ei[sel]]
        np.add.at(a, ti, w[sel] * V[alpha, lj])
        np.add.at(b, ti, w[sel] * V[beta, lj])
    sel = ~mi & mj
    if np.any(sel):
        li = L[energy.ei[sel]]
        tj = remap[energy.ej[sel]]
        np.add.at(a, tj, w[sel] * V[li, alpha])
        np.add.at(b, tj, w[sel] * V[li, beta])
    wb = w[both]
    be = BinaryEnergy(a, b, remap[energy.ei[both]], remap[energy.ej[both]],
                      wb * V[alpha, alpha], wb * V[beta, alpha],
                      wb * V[alpha, beta], wb * V[beta, beta])
    return be, idx


def alpha_beta_swap(energy, init=None, max_sweeps=50, seed=0, stats=None):
    """Iterated alpha-beta swap over all label pairs until no change."""
    L = winner_take_all(energy.D) if init is None else np.asarray(init, np.int64).copy()
    best = evaluate(energy, L)
    step = 0
    for _ in range(max_sweeps):
        changed = False
        for alpha in range(energy.l):
            for beta in range(alpha + 1, energy.l):
                be, idx = _swap_subenergy(energy, L, alpha, beta)
                if idx.size == 0:
                    continue
                x0 = (L[idx] == beta).astype(np.int64)
                x = _solve_binary(be, x0, [seed, step], stats)
                step += 1
                cand = L.copy()
                cand[idx] = np.where(x == 1, beta, alpha)
                val = evaluate(energy, cand)
                assert val <= best + 1e-9
                if val < best:
                    L, best = cand, val
                    changed = True
        if not changed:
            break
    return L


def _expansion_subenergy(energy, L, alpha):
    """Binary choice per variable: keep the current label (0) or take alpha (1)."""
    n = np.arange(energy.n)
    a = energy.D[n, L]
    b = energy.D[:, alpha]
    V = energy.V
    w = energy.w
    li = L[energy.ei]
    lj = L[energy.ej]
    return BinaryEnergy(a, b, energy.ei, energy.ej,
                        w * V[li, lj], w * V[alpha, lj],
                        w * V[li, alpha], w * V[alpha, alpha])


def alpha_expansion(energy, init=None, max_sweeps=50, seed=0, stats=None):
    """Iterated alpha-expansion over all labels until no change."""
    L = winner_take_all(energy.D) if init is None else np.asarray(init, np.int64).copy()
    best = evaluate(energy, L)
    step = 0
    for _ in range(max_sweeps):
        changed = False
        for alpha in range(energy.l):
            be = _expansion_subenergy(energy, L, alpha)
            x0 = (L == alpha).astype(np.int64)
            x = _solve_binary(be, x0, [seed, step], stats)
            step += 1
            cand = np.where(x == 1, alpha, L)
            val = evaluate(energy, cand)
            assert val <= best + 1e-9
            if val < best:
                L, best = cand.astype(np.int64), val
                changed = True
        if not changed:
            break
    return L


def _cc_swap_subenergy(ei, ej, w, L, alpha, beta):
    """Binary sub-energy of CC Swap(alpha, beta); beta may be a fresh label.

    Fixed neighbors outside {alpha, beta} are separated from both options
    and contribute the same offset to either side, so they are omitted.
    """
    active = (L == alpha) | (L == beta)
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return None, None
    remap = -np.ones(L.shape[0], dtype=np.int64)
    remap[idx] = np.arange(idx.size)
    both = active[ei] & active[ej]
    wb = w[both]
    zeros = np.zeros(idx.size)
    be = BinaryEnergy(zeros, zeros, remap[ei[both]], remap[ej[both]],
                      np.zeros_like(wb), wb, wb, np.zeros_like(wb))
    return be, idx


def _cc_expand_subenergy(ei, ej, w, L, alpha):
    """Binary sub-energy of CC Expand(alpha) over all variables."""
    li = L[ei]
    lj = L[ej]
    zeros = np.zeros(L.shape[0])
    return BinaryEnergy(zeros, zeros, ei, ej,
                        w * (li != lj), w * (lj != alpha),
                        w * (li != alpha), np.zeros_like(w))


def _flip_deltas(be, x):
    """Energy change of flipping each variable alone, vectorized."""
    d = (be.b - be.a) * (1 - 2 * x)
    xi = x[be.ei]
    xj = x[be.ej]
    tables = np.stack([be.e, be.f, be.g, be.h])
    cur = tables[xi + 2 * xj, np.arange(be.ei.size)]
    fi = tables[(1 - xi) + 2 * xj, np.arange(be.ei.size)]
    fj = tables[xi + 2 * (1 - xj), np.arange(be.ei.size)]
    np.add.at(d, be.ei, fi - cur)
    np.add.at(d, be.ej, fj - cur)
    return d


def _flip_descent(be, x0):
    """Greedy best-single-flip descent from x0."""
    x = np.asarray(x0, dtype=np.int64).copy()
    while True:
        d = _flip_deltas(be, x)
        i = int(np.argmin(d))
        if d[i] >= -1e-12:
            return x
        x[i] = 1 - x[i]


def _solve_binary_explore(be, x0, seed, stats):
    """Binary step for the explore solvers, with a symmetry-breaking retry.

    The CC sub-energy has no unary term, so it is invariant to flipping
    every variable at once: plain QPBO labels nothing and the fix-half
    passes inside QPBOI move variables one conditional neighborhood at a
    time.  Splitting a cluster that mixes two well-knit groups needs a
    coordinated flip of a whole group, which those passes cannot produce
    from the current-labels seed.  When the seeded attempt fails to improve
    on x0, a second QPBOI run from a pseudo-random labeling breaks the
    symmetry; the caller still accepts a step only on strict decrease, so
    descent is unaffected.
    """
    x = _solve_binary(be, x0, seed, stats)
    if be.is_submodular() or be.energy(x) < be.energy(x0):
        return x
    rng = np.random.default_rng([*seed, 1])
    xr = (rng.random(be.n) < 0.5).astype(np.int64)
    x2 = qpbo.qpboi_improve(be, xr, seed=seed)
    if stats is not None:
        stats["retry_steps"] = stats.get("retry_steps", 0) + 1
    if be.energy(x2) < be.energy(x):
        return x2
    # last resort: the inner QPBO can leave every variable unlabeled on
    # these unary-free sub-energies, missing even single-flip improvements;
    # a greedy flip descent from x0 catches those
    return _flip_descent(be, x0)


def _relabel(L, label):
    """Compact L; return (new L, new k, new position of `label`)."""
    uniq = np.unique(L)
    newL, k = compact_labels(L)
    pos = int(np.searchsorted(uniq, label))
    return newL, k, pos


def swap_and_explore(W, init=None, max_sweeps=100, seed=0, stats=None):
    """Swap-and-Explore: sweeps of Swap(alpha, beta) for beta up to one
    past the current number of clusters (the explore step)."""
    ei, ej, w = affinity_edges(W)
    n = W.shape[0]
    L = np.zeros(n, dtype=np.int64) if init is None else np.asarray(init, np.int64)
    L, k = compact_labels(L)
    best = cc_energy_edges(ei, ej, w, L)
    step = 0
    for _ in range(max_sweeps):
        changed = False
        alpha = 0
        while alpha < k:
            beta = alpha + 1
            while beta <= k:
                be, idx = _cc_swap_subenergy(ei, ej, w, L, alpha, beta)
                step_seed = [seed, step]
                step += 1
                if be is None:
                    beta += 1
                    continue
                x0 = (L[idx] == beta).astype(np.int64)
                x = _solve_binary_explore(be, x0, step_seed, stats)
                cand = L.copy()
                cand[idx] = np.where(x == 1, beta, alpha)
                beta += 1
                val = cc_energy_edges(ei, ej, w, cand)
                assert val <= best + 1e-9
                if val < best:
                    L, k, alpha = _relabel(cand, alpha)
                    best = val
                    changed = True
                    beta = min(beta, k + 1)
            alpha += 1
        if not changed:
            break
    return L


def expand_and_explore(W, init=None, max_sweeps=100, seed=0, stats=None):
    """Expand-and-Explore: sweeps of Expand(alpha) for alpha up to one past
    the current number of clusters."""
    ei, ej, w = affinity_edges(W)
    n = W.shape[0]
    L = np.zeros(n, dtype=np.int64) if init is None else np.asarray(init, np.int64)
    L, k = compact_labels(L)
    best = cc_energy_edges(ei, ej, w, L)
    step = 0
    for _ in range(max_sweeps):
        changed = False
        alpha = 0
        while alpha <= k:
            be = _cc_expand_subenergy(ei, ej, w, L, alpha)
            x0 = (L == alpha).astype(np.int64)
            x = _solve_binary_explore(be, x0, [seed, step], stats)
            cand = np.where(x == 1, alpha, L).astype(np.int64)
            step += 1
            val = cc_energy_edges(ei, ej, w, cand)
            assert val <= best + 1e-9
            if val < best:
                L, k, alpha = _relabel(cand, alpha)
                best = val
                changed = True
            alpha += 1
        if not changed:
            break
    return L
