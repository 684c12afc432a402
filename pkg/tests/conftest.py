"""Shared fixtures and small random-instance helpers for the test suite."""

import numpy as np
import pytest

from emin.core import BinaryEnergy, Energy


def random_energy(rng, n, l, density=0.5, wlo=-1.0, whi=1.0):
    """Random general Energy with symmetric V and signed edge weights."""
    D = rng.standard_normal((n, l))
    V = rng.uniform(0.0, 1.0, size=(l, l))
    V = 0.5 * (V + V.T)
    np.fill_diagonal(V, 0.0)
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < density
    edges = np.column_stack([iu[0][keep], iu[1][keep]])
    w = rng.uniform(wlo, whi, size=edges.shape[0])
    return Energy(D, V, edges, w)


def random_binary(rng, n, density=0.6, submodular=True, unary_scale=1.0):
    """Random BinaryEnergy in the 8-parameter form."""
    a = unary_scale * rng.standard_normal(n)
    b = unary_scale * rng.standard_normal(n)
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < density
    ei, ej = iu[0][keep], iu[1][keep]
    m = ei.size
    e, f, g, h = (rng.uniform(0.0, 1.0, size=m) for _ in range(4))
    if submodular:
        # force e + h <= f + g by lifting f
        f = f + np.maximum(e + h - f - g, 0.0)
    else:
        # force at least one strictly non-submodular edge when possible
        if m:
            h = h + np.maximum(f + g - e - h, 0.0) + 0.5
    return BinaryEnergy(a, b, ei, ej, e, f, g, h)


def brute_force_binary(be):
    """Exhaustive minimum of a BinaryEnergy; returns (set of optima, value)."""
    best_val = np.inf
    optima = []
    for code in range(1 << be.n):
        x = np.array([(code >> i) & 1 for i in range(be.n)], dtype=np.int64)
        v = be.energy(x)
        if v < best_val - 1e-12:
            best_val = v
            optima = [x]
        elif abs(v - best_val) <= 1e-12:
            optima.append(x)
    return optima, best_val


def planted_affinity(rng, n, k, certainty_lo=0.2):
    """Noiseless fully-connected planted-partition signed matrix."""
    import scipy.sparse as sp

    gt = np.sort(rng.integers(0, k, size=n))
    # make sure every cluster is non-empty
    gt[:k] = np.arange(k)
    gt = gt[rng.permutation(n)]
    iu = np.triu_indices(n, k=1)
    sign = np.where(gt[iu[0]] == gt[iu[1]], 1.0, -1.0)
    cert = rng.uniform(certainty_lo, 1.0, size=iu[0].size)
    W = sp.csr_matrix((sign * cert, iu), shape=(n, n))
    return W + W.T, gt


@pytest.fixture
def rng():
    return np.random.default_rng(0)
