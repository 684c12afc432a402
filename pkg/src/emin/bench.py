"""Synthetic instance generators, brute-force oracles, and the benchmark
runner.

All randomness flows through numpy's default_rng (PCG64), so a (params,
seed) pair reproduces an instance exactly across platforms.  The report
path writes deterministic CSV bodies plus a human-readable table and one
matplotlib figure per generator; wall-clock timings go to a separate file
so report bodies stay byte-identical across runs.
"""

import csv
import io
import json
import os
import time

import numpy as np
import scipy.sparse as sp
from numba import njit

from .core import Energy, evaluate
from .corrclust import affinity_edges, cc_energy, purity
from .local_moves import adaptive_icm, compact_labels, icm
from .large_moves import (alpha_beta_swap, alpha_expansion, expand_and_explore,
                          swap_and_explore)
from .multiscale import solve_multiscale

BRUTE_FORCE_CAP = 10 ** 7
PARTITION_CAP = 13


class SizeCapExceeded(ValueError):
    pass


def gen_grid_energy(h, w, l, lam, seed):
    """4-connected h x w grid energy: D ~ N(0,1), V symmetric ~ U(0,1) with
    zero diagonal, edge weights ~ lam * U(-1,1)."""
    if h < 1 or w < 1 or l < 1:
        raise ValueError("dims and labels must be >= 1")
    rng = np.random.default_rng(seed)
    n = h * w
    D = rng.standard_normal((n, l))
    V = np.zeros((l, l))
    iu = np.triu_indices(l, k=1)
    vals = rng.uniform(0.0, 1.0, size=iu[0].size)
    V[iu] = vals
    V[(iu[1], iu[0])] = vals
    idx = np.arange(n).reshape(h, w)
    right = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    down = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    edges = np.vstack([right, down])
    wvals = lam * rng.uniform(-1.0, 1.0, size=edges.shape[0])
    return Energy(D, V, edges, wvals)


def gen_cc_matrix(n, k, density, noise, seed):
    """Planted-partition signed affinity matrix.

    Cluster sizes interpolate a ~5:1 largest-to-smallest ratio; each
    variable samples neighbors so the expected degree is density*(n-1),
    with ~25% of them intra-cluster.  Clean edges are +certainty inside a
    cluster and -certainty across; a `noise` fraction of edges gets a fresh
    uniform sign and resampled certainty.  Returns (W, ground_truth).
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    rng = np.random.default_rng(seed)
    raw = np.linspace(5.0, 1.0, k) if k > 1 else np.array([1.0])
    target = raw * n / raw.sum()
    sizes = np.maximum(1, np.floor(target).astype(int))
    frac = target - np.floor(target)
    order = np.argsort(-frac, kind="stable")
    pos = 0
    while sizes.sum() < n:
        sizes[order[pos % k]] += 1
        pos += 1
    while sizes.sum() > n:
        big = int(np.argmax(sizes))
        sizes[big] -= 1
    gt = np.repeat(np.arange(k), sizes)
    gt = gt[rng.permutation(n)]
    members = [np.flatnonzero(gt == c) for c in range(k)]
    deg = density * (n - 1)
    per_var = max(1, int(round(deg / 2.0)))
    n_intra = int(round(0.25 * per_var))
    pairs = set()
    for i in range(n):
        own = members[gt[i]]
        own = own[own != i]
        if own.size:
            take = min(n_intra, own.size)
            for j in rng.choice(own, size=take, replace=False):
                pairs.add((min(i, j), max(i, j)))
        n_inter = per_var - min(n_intra, own.size)
        for _ in range(n_inter):
            j = int(rng.integers(0, n))
            if j == i:
                continue
            pairs.add((min(i, j), max(i, j)))
    pairs = sorted(pairs)
    ei = np.array([p[0] for p in pairs], dtype=np.int64)
    ej = np.array([p[1] for p in pairs], dtype=np.int64)
    m = ei.size
    sign = np.where(gt[ei] == gt[ej], 1.0, -1.0)
    cert = 1.0 - rng.random(m)  # U(0, 1]
    noisy = rng.random(m) < noise
    sign[noisy] = np.where(rng.random(noisy.sum()) < 0.5, 1.0, -1.0)
    cert[noisy] = 1.0 - rng.random(int(noisy.sum()))
    w = sign * cert
    W = sp.csr_matrix((w, (ei, ej)), shape=(n, n))
    return W + W.T, gt


def brute_force(energy):
    """Exhaustive global minimum of an Energy (cap: l^n <= 1e7)."""
    n, l = energy.n, energy.l
    total = l ** n
    if total > BRUTE_FORCE_CAP:
        raise SizeCapExceeded("l^n = %d exceeds the brute-force cap" % total)
    pows = l ** np.arange(n)
    best_val = np.inf
    best = None
    chunk = 1 << 14
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        labels = (idx[:, None] // pows[None, :]) % l
        vals = energy.D[np.arange(n)[None, :], labels].sum(axis=1)
        if energy.m:
            vals = vals + (energy.w[None, :]
                           * energy.V[labels[:, energy.ei],
                                      labels[:, energy.ej]]).sum(axis=1)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best = labels[j].astype(np.int64)
    return best, best_val


@njit(cache=True)
def _rgs_min(ei, ej, w, n):
    a = np.zeros(n, dtype=np.int64)
    best = np.inf
    best_a = a.copy()
    count = 0
    while True:
        count += 1
        val = 0.0
        for p in range(ei.shape[0]):
            if a[ei[p]] != a[ej[p]]:
                val += w[p]
        if val < best:
            best = val
            for q in range(n):
                best_a[q] = a[q]
        # next restricted-growth string
        i = n - 1
        while i > 0:
            mx = 0
            for q in range(i):
                if a[q] > mx:
                    mx = a[q]
            if a[i] <= mx:
                a[i] += 1
                for q in range(i + 1, n):
                    a[q] = 0
                break
            i -= 1
        if i == 0:
            break
    return best_a, best, count


def brute_force_partitions(W):
    """Exhaustive CC minimum over all partitions (cap: n <= 13).

    Partitions are enumerated as restricted-growth strings; also returns
    the Bell-number count of partitions visited.
    """
    n = W.shape[0]
    if n > PARTITION_CAP:
        raise SizeCapExceeded("n = %d exceeds the partition cap" % n)
    ei, ej, w = affinity_edges(W)
    best_a, best, count = _rgs_min(ei, ej, w, n)
    return best_a.astype(np.int64), float(best), int(count)


ENERGY_SOLVERS = ("icm", "swap", "expand", "ms-icm", "ms-swap", "ms-expand")
CC_SOLVERS = ("adaptive-icm", "swap-explore", "expand-explore")


def run_energy_solver(name, energy, seed=0):
    if name == "icm":
        return icm(energy, np.argmin(energy.D, axis=1).astype(np.int64))
    if name == "swap":
        return alpha_beta_swap(energy, seed=seed)
    if name == "expand":
        return alpha_expansion(energy, seed=seed)
    if name in ("ms-icm", "ms-swap", "ms-expand"):
        refiner = {
            "ms-icm": lambda en, L: icm(en, L),
            "ms-swap": lambda en, L: alpha_beta_swap(en, L, seed=seed),
            "ms-expand": lambda en, L: alpha_expansion(en, L, seed=seed),
        }[name]
        return solve_multiscale(energy, refiner, seed=seed).labels
    raise ValueError("unknown solver %r" % (name,))


def run_cc_solver(name, W, seed=0):
    n = W.shape[0]
    if name == "adaptive-icm":
        return adaptive_icm(W, np.zeros(n, dtype=np.int64))
    if name == "swap-explore":
        return swap_and_explore(W, seed=seed)
    if name == "expand-explore":
        return expand_and_explore(W, seed=seed)
    raise ValueError("unknown solver %r" % (name,))


def _run_cell(gen, solver, seed):
    kind = gen.get("kind")
    if kind == "grid":
        energy = gen_grid_energy(gen["h"], gen["w"], gen["l"], gen["lam"], seed)
        if solver not in ENERGY_SOLVERS:
            raise ValueError("unknown solver %r for grid generator" % (solver,))
        t0 = time.perf_counter()
        L = run_energy_solver(solver, energy, seed=seed)
        dt = time.perf_counter() - t0
        _, k = compact_labels(L)
        return {"energy": evaluate(energy, L), "k": k, "purity": "", "time": dt}
    if kind == "cc":
        W, gt = gen_cc_matrix(gen["n"], gen["k"], gen["density"], gen["noise"], seed)
        if solver not in CC_SOLVERS:
            raise ValueError("unknown solver %r for cc generator" % (solver,))
        t0 = time.perf_counter()
        L = run_cc_solver(solver, W, seed=seed)
        dt = time.perf_counter() - t0
        L, k = compact_labels(L)
        return {"energy": cc_energy(W, L), "k": k,
                "purity": purity(L, gt), "time": dt}
    raise ValueError("unknown generator kind %r" % (kind,))


def _fmt(x):
    return "%.6f" % x if isinstance(x, float) else str(x)


def bench_run(config, out_dir):
    """Run the (generator x solver x seed) grid and write the report.

    `config` is a dict (or path to a JSON file) with keys `generators`
    (list of {name, kind, ...params}), `solvers` and `seeds`.
    """
    if isinstance(config, str):
        with open(config) as fh:
            config = json.load(fh)
    generators = config["generators"]
    solvers = config["solvers"]
    seeds = config["seeds"]
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for gen in generators:
        for solver in solvers:
            for seed in seeds:
                res = _run_cell(gen, solver, int(seed))
                rows.append({"generator": gen["name"], "solver": solver,
                             "seed": int(seed), **res})
    det_cols = ["generator", "solver", "seed", "energy", "k", "purity"]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(det_cols)
    for r in rows:
        wr.writerow([_fmt(r[c]) for c in det_cols])
    with open(os.path.join(out_dir, "report.csv"), "w") as fh:
        fh.write(buf.getvalue())

    cells = {}
    for r in rows:
        cells.setdefault((r["generator"], r["solver"]), []).append(r)
    sum_cols = ["generator", "solver", "runs", "mean_energy", "std_energy",
                "mean_k", "mean_purity"]
    sbuf = io.StringIO()
    wr = csv.writer(sbuf, lineterminator="\n")
    wr.writerow(sum_cols)
    summary = []
    for (g, s), rs in sorted(cells.items()):
        es = np.array([r["energy"] for r in rs])
        ks = np.array([r["k"] for r in rs], dtype=float)
        ps = [r["purity"] for r in rs if r["purity"] != ""]
        row = [g, s, len(rs), _fmt(float(es.mean())), _fmt(float(es.std())),
               _fmt(float(ks.mean())),
               _fmt(float(np.mean(ps))) if ps else ""]
        summary.append(row)
        wr.writerow(row)
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        fh.write(sbuf.getvalue())

    widths = [max(len(str(r[i])) for r in [sum_cols] + summary)
              for i in range(len(sum_cols))]
    with open(os.path.join(out_dir, "report.txt"), "w") as fh:
        fh.write("  ".join(c.ljust(w) for c, w in zip(sum_cols, widths)) + "\n")
        fh.write("  ".join("-" * w for w in widths) + "\n")
        for row in summary:
            fh.write("  ".join(str(v).ljust(w) for v, w in zip(row, widths)) + "\n")

    with open(os.path.join(out_dir, "timing.csv"), "w") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["generator", "solver", "seed", "seconds"])
        for r in rows:
            wr.writerow([r["generator"], r["solver"], r["seed"],
                         "%.6f" % r["time"]])

    _render_figures(rows, out_dir)
    return rows


def _render_figures(rows, out_dir):
    """One bar chart of mean energy per solver for each generator."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_gen = {}
    for r in rows:
        by_gen.setdefault(r["generator"], {}).setdefault(r["solver"], []).append(
            r["energy"])
    for g, per_solver in by_gen.items():
        names = sorted(per_solver)
        means = [float(np.mean(per_solver[s])) for s in names]
        stds = [float(np.std(per_solver[s])) for s in names]
        fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(names)), 3.2))
        ax.bar(range(len(names)), means, yerr=stds, color="#4878a8")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("mean energy")
        ax.set_title(g)
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, "fig_%s.png" % g))
        plt.close(fig)
