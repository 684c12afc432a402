"""Correlation clustering: energy forms, log-odds weights, the partition
prior on the number of clusters, and evaluation metrics.

Affinities are sparse symmetric signed matrices in log-odds units; missing
entries carry zero certainty and do not affect the optimization.
"""

import math
import warnings

import numpy as np
import scipy.sparse as sp

from .core import Energy


class AffinityFormatError(ValueError):
    """Raised on malformed .aff input."""


def check_affinity(W):
    W = sp.csr_matrix(W)
    if W.shape[0] != W.shape[1]:
        raise ValueError("affinity matrix must be square")
    if np.abs(W.diagonal()).max(initial=0.0) != 0.0:
        raise ValueError("affinity diagonal must be zero")
    if abs(W - W.T).max() > 1e-12:
        raise ValueError("affinity matrix must be symmetric")
    return W


def affinity_edges(W):
    """Edge arrays (ei, ej, w) with each pair stored once, i < j."""
    W = check_affinity(W)
    up = sp.triu(W, k=1).tocoo()
    order = np.argsort(up.row * W.shape[0] + up.col, kind="stable")
    return (up.row[order].astype(np.int64), up.col[order].astype(np.int64),
            up.data[order].astype(np.float64))


def cc_energy(W, L, form="potts"):
    """Correlation clustering energy of a partition labeling.

    The Potts form charges w_ij when i and j are separated; the U-form
    rewards intra-cluster agreement; they differ by the constant
    -sum_{i<j} w_ij.
    """
    ei, ej, w = affinity_edges(W)
    L = np.asarray(L, dtype=np.int64)
    if L.shape != (W.shape[0],):
        raise ValueError("labeling length mismatch")
    diff = L[ei] != L[ej]
    if form == "potts":
        return float(w[diff].sum())
    if form == "u":
        return float(-w[~diff].sum())
    raise ValueError("unknown form %r" % (form,))


def cc_energy_edges(ei, ej, w, L):
    """Potts-form energy from pre-extracted edge arrays (solver hot path)."""
    return float(w[L[ei] != L[ej]].sum())


def log_odds(p, eps=1e-9):
    """log(p / (1 - p)); probabilities at 0 or 1 are clamped to eps away."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.any(p <= 0) or np.any(p >= 1):
        warnings.warn("probabilities clamped to (%g, 1-%g)" % (eps, eps))
        p = np.clip(p, eps, 1.0 - eps)
    out = np.log(p / (1.0 - p))
    return float(out) if out.ndim == 0 else out


def stirling2_table(n):
    """Exact Stirling numbers of the second kind S(r, k), r,k = 0..n."""
    S = [[0] * (n + 1) for _ in range(n + 1)]
    S[0][0] = 1
    for r in range(1, n + 1):
        for k in range(1, r + 1):
            S[r][k] = k * S[r - 1][k] + S[r - 1][k - 1]
    return S

def bell_number(n):
    return sum(stirling2_table(n)[n])


def prior_on_k(n):
    """-log Pr(k), k = 1..n, with Pr(k) = S(n, k) / B(n).

    Exact big integers up to n = 60; log-domain recurrence beyond (the
    counts overflow any fixed-width float far earlier than n = 500).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= 60:
        S = stirling2_table(n)[n]
        logB = math.log(sum(S))
        return np.array([logB - math.log(S[k]) for k in range(1, n + 1)])
    prev = np.full(n + 1, -np.inf)
    prev[0] = 0.0  # log S(0, 0)
    for r in range(1, n + 1):
        cur = np.full(n + 1, -np.inf)
        ks = np.arange(1, r + 1)
        cur[1:r + 1] = np.logaddexp(np.log(ks) + prev[1:r + 1], prev[0:r])
        prev = cur
    logS = prev[1:]
    logB = logS[0]
    for v in logS[1:]:
        logB = np.logaddexp(logB, v)
    return logB - logS


def purity(L, ground_truth):
    """Fraction of points in agreement with their cluster's majority class."""
    L = np.asarray(L, dtype=np.int64)
    gt = np.asarray(ground_truth, dtype=np.int64)
    if L.shape != gt.shape:
        raise ValueError("length mismatch")
    n = L.shape[0]
    if n == 0:
        return 1.0
    total = 0
    for c in np.unique(L):
        members = gt[L == c]
        total += np.bincount(members).max()
    return float(total) / n


def sketch_to_cc(W):
    """Binary CC instance equivalent to min_S sum w_ij (S_i - S_j)^2, S in {-1,1}.

    The quadratic form over signs equals the 2-label Potts energy with edge
    weights 4 w_ij (the squared difference is 4 exactly when signs differ),
    so the sketch functional is a two-cluster correlation clustering.
    """
    ei, ej, w = affinity_edges(W)
    n = W.shape[0]
    D = np.zeros((n, 2))
    V = np.array([[0.0, 1.0], [1.0, 0.0]])
    return Energy(D, V, np.column_stack([ei, ej]), 4.0 * w)


def read_aff(path):
    """Parse the .aff sparse affinity format: `n`, then `i j w` lines."""
    with open(path, "r") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise AffinityFormatError("empty file")
    try:
        n = int(tokens[0])
        rest = tokens[1:]
        if n < 0 or len(rest) % 3 != 0:
            raise AffinityFormatError("malformed .aff file")
        m = len(rest) // 3
        ei = np.array([int(rest[3 * k]) for k in range(m)], dtype=np.int64)
        ej = np.array([int(rest[3 * k + 1]) for k in range(m)], dtype=np.int64)
        w = np.array([float(rest[3 * k + 2]) for k in range(m)], dtype=np.float64)
    except AffinityFormatError:
        raise
    except ValueError as err:
        raise AffinityFormatError(str(err)) from err
    if m and (np.any(ei >= ej) or ei.min() < 0 or ej.max() >= n):
        raise AffinityFormatError("bad edge indices")
    key = ei * max(n, 1) + ej
    if np.unique(key).size != key.size:
        raise AffinityFormatError("duplicate edge")
    W = sp.csr_matrix((w, (ei, ej)), shape=(n, n))
    return W + W.T


def write_aff(W, path):
    ei, ej, w = affinity_edges(W)
    with open(path, "w") as fh:
        fh.write("%d\n" % W.shape[0])
        for i, j, wv in zip(ei, ej, w):
            fh.write("%d %d %.17g\n" % (i, j, wv))
