"""Canonical pairwise energy representation, evaluation and classification.

An energy over n variables and l labels is

    E(L) = sum_i D[i, L_i] + sum_{(i,j) in E} w_ij * V[L_i, L_j]

where D is the n x l unary cost matrix, V the symmetric l x l label
interaction matrix and w_ij the signed weight of the undirected edge (i,j).
Each edge is stored exactly once with i < j; the relaxed matrix form
Tr(D U^T + W U V U^T) uses the same once-per-edge convention so the two
forms agree.  Labels are 0-based everywhere.
"""

import numpy as np
import scipy.sparse as sp

CLASSIFY_TOL = 1e-12
ROWSUM_TOL = 1e-9


class EnergyFormatError(ValueError):
    """Raised on malformed .pwe input."""


class Energy:
    """Immutable pairwise energy instance (n, l, D, W, V)."""

    def __init__(self, D, V, edges, w):
        D = np.ascontiguousarray(D, dtype=np.float64)
        V = np.ascontiguousarray(V, dtype=np.float64)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.asarray(w, dtype=np.float64).reshape(-1)
        if D.ndim != 2:
            raise ValueError("D must be n x l")
        n, l = D.shape
        if V.shape != (l, l):
            raise ValueError("V must be l x l")
        # V is symmetric in the common energies; the general 8-parameter
        # binary form corresponds to an asymmetric [[e,g],[f,h]], so
        # asymmetry is permitted and the stored i < j orientation is the
        # one V is indexed with.
        if edges.shape[0] != w.shape[0]:
            raise ValueError("edges and weights disagree in length")
        if not (np.isfinite(D).all() and np.isfinite(V).all() and np.isfinite(w).all()):
            raise ValueError("non-finite entries")
        # normalize orientation to i < j, drop zero-weight edges
        ei = np.minimum(edges[:, 0], edges[:, 1])
        ej = np.maximum(edges[:, 0], edges[:, 1])
        if edges.size and (ei.min() < 0 or ej.max() >= n):
            raise ValueError("edge index out of range")
        if np.any(ei == ej):
            raise ValueError("self-loop edge")
        keep = w != 0.0
        ei, ej, w = ei[keep], ej[keep], w[keep]
        key = ei * n + ej
        if np.unique(key).size != key.size:
            raise ValueError("duplicate edge")
        order = np.argsort(key, kind="stable")
        self.n = n
        self.l = l
        self.D = D
        self.V = V
        self.ei = ei[order]
        self.ej = ej[order]
        self.w = w[order]
        self._adj = None
        self._wu = None

    @property
    def m(self):
        return self.w.shape[0]

    @property
    def edges(self):
        return np.column_stack([self.ei, self.ej])

    def W_upper(self):
        """Sparse n x n weight matrix with each edge stored once at (i, j), i < j."""
        if self._wu is None:
            self._wu = sp.csr_matrix(
                (self.w, (self.ei, self.ej)), shape=(self.n, self.n)
            )
        return self._wu

    def W_sym(self):
        """Symmetric materialization (used for matrix products only)."""
        wu = self.W_upper()
        return wu + wu.T

    def adjacency(self):
        """CSR arrays (indptr, indices, weights) of the symmetric adjacency."""
        if self._adj is None:
            a = self.W_sym().tocsr()
            a.sort_indices()
            self._adj = (
                a.indptr.astype(np.int64),
                a.indices.astype(np.int64),
                a.data.astype(np.float64),
            )
        return self._adj


def evaluate(energy, labeling):
    """Scalar energy of a complete labeling."""
    L = np.asarray(labeling, dtype=np.int64)
    if L.shape != (energy.n,):
        raise ValueError("labeling length mismatch")
    if energy.n and (L.min() < 0 or L.max() >= energy.l):
        raise ValueError("label out of range")
    e = energy.D[np.arange(energy.n), L].sum()
    if energy.m:
        e += (energy.w * energy.V[L[energy.ei], L[energy.ej]]).sum()
    return float(e)


def evaluate_relaxed(energy, U, check_rows=True):
    """Relaxed quadratic form Tr(D U^T + W U V U^T) for a row-stochastic U.

    `check_rows=False` skips the row-sum validation; interpolating a coarse
    label assignment back to fine labels (U_c P_hat^T) is generally not
    row-stochastic, yet the coarsening identity still holds for it.
    """
    U = np.asarray(U, dtype=np.float64)
    if U.shape != (energy.n, energy.l):
        raise ValueError("U shape mismatch")
    if check_rows and energy.n and np.abs(U.sum(axis=1) - 1.0).max() > ROWSUM_TOL:
        raise ValueError("rows of U must sum to 1")
    e = float((energy.D * U).sum())
    if energy.m:
        M = U @ energy.V
        e += float((energy.w * np.einsum("ij,ij->i", U[energy.ei], M[energy.ej])).sum())
    return e


def evaluate_relaxed_matrix(D, W, V, U):
    """Tr(D U^T + W U V U^T) for an arbitrary sparse W (diagonal allowed).

    Used by the multiscale tests to evaluate coarse operators before
    diagonal absorption.
    """
    U = np.asarray(U, dtype=np.float64)
    W = sp.coo_matrix(W)
    e = float((np.asarray(D) * U).sum())
    if W.nnz:
        M = U @ np.asarray(V)
        e += float((W.data * np.einsum("ij,ij->i", U[W.row], M[W.col])).sum())
    return e


class Classification:
    def __init__(self, binary_submodular, multilabel_submodular,
                 relaxed_metric, relaxed_semi_metric):
        self.binary_submodular = binary_submodular
        self.multilabel_submodular = multilabel_submodular
        self.relaxed_metric = relaxed_metric
        self.relaxed_semi_metric = relaxed_semi_metric

    def __repr__(self):
        return ("Classification(binary_submodular=%s, multilabel_submodular=%s, "
                "relaxed_metric=%s, relaxed_semi_metric=%s)" % (
                    self.binary_submodular, self.multilabel_submodular,
                    self.relaxed_metric, self.relaxed_semi_metric))


def classify(energy):
    """Structural classification of the pairwise part.

    Each flag holds iff the corresponding inequality holds for every edge's
    effective table w_ij * V; a negative w_ij flips the inequality for that
    edge, so it suffices to bound the V-side expression from both ends.
    """
    V = energy.V
    l = energy.l
    has_pos = bool(np.any(energy.w > 0))
    has_neg = bool(np.any(energy.w < 0))

    def holds(expr):
        hi = float(np.max(expr)) if np.size(expr) else 0.0
        lo = float(np.min(expr)) if np.size(expr) else 0.0
        ok = True
        if has_pos:
            ok = ok and hi <= CLASSIFY_TOL
        if has_neg:
            ok = ok and lo >= -CLASSIFY_TOL
        return ok

    d = V.diagonal()
    if l == 2:
        binary = holds(np.array([V[0, 0] + V[1, 1] - V[1, 0] - V[0, 1]]))
    else:
        binary = None
    if l >= 2:
        adj = V[:-1, :-1] + V[1:, 1:] - V[:-1, 1:] - V[1:, :-1]
        multilabel = holds(adj)
    else:
        multilabel = True
    # relaxed metric: V[a,a] + V[b,c] <= V[b,a] + V[a,c] for all a,b,c
    T = d[:, None, None] + V[None, :, :] - V.T[:, :, None] - V[:, None, :]
    metric = holds(T)
    semi = holds(d[:, None] + d[None, :] - V - V.T)
    return Classification(binary, multilabel, metric, semi)


def to_labeling(U):
    """Per-row argmax with ties broken to the lowest label index."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[1] == 0:
        raise ValueError("U must have at least one column")
    return np.argmax(U, axis=1).astype(np.int64)


def from_labeling(L, l):
    """Exact one-hot assignment matrix of a labeling."""
    L = np.asarray(L, dtype=np.int64)
    if L.size and (L.min() < 0 or L.max() >= l):
        raise ValueError("label out of range")
    U = np.zeros((L.shape[0], l), dtype=np.float64)
    U[np.arange(L.shape[0]), L] = 1.0
    return U


class BinaryEnergy:
    """Two-label energy in the 8-parameter form.

    Per variable i the unary costs are (a_i, b_i) for labels (0, 1); per
    edge (i, j) the pairwise table is e = phi(0,0), f = phi(1,0),
    g = phi(0,1), h = phi(1,1).
    """

    def __init__(self, a, b, ei, ej, e, f, g, h):
        self.a = np.asarray(a, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.ei = np.asarray(ei, dtype=np.int64)
        self.ej = np.asarray(ej, dtype=np.int64)
        self.e = np.asarray(e, dtype=np.float64)
        self.f = np.asarray(f, dtype=np.float64)
        self.g = np.asarray(g, dtype=np.float64)
        self.h = np.asarray(h, dtype=np.float64)
        self.n = self.a.shape[0]
        self.m = self.ei.shape[0]

    @classmethod
    def from_energy(cls, energy):
        if energy.l != 2:
            raise ValueError("BinaryEnergy requires l=2")
        V = energy.V
        w = energy.w
        return cls(energy.D[:, 0], energy.D[:, 1], energy.ei, energy.ej,
                   w * V[0, 0], w * V[1, 0], w * V[0, 1], w * V[1, 1])

    def energy(self, x):
        x = np.asarray(x, dtype=np.int64)
        val = float(np.where(x == 0, self.a, self.b).sum())
        if self.m:
            xi = x[self.ei]
            xj = x[self.ej]
            tab = (self.e * ((1 - xi) * (1 - xj))
                   + self.f * (xi * (1 - xj))
                   + self.g * ((1 - xi) * xj)
                   + self.h * (xi * xj))
            val += float(tab.sum())
        return val

    def is_submodular(self, tol=1e-12):
        if self.m == 0:
            return True
        return bool(np.all(self.e + self.h <= self.f + self.g + tol))

    def restrict(self, active, x):
        """Sub-energy over the active variables with the rest fixed at x.

        Fixed neighbors contribute unary offsets: a fixed j at value x_j adds
        phi(0, x_j) to a_i and phi(1, x_j) to b_i of an active neighbor i.
        Returns (sub_energy, active_index_array).
        """
        active = np.asarray(active, dtype=bool)
        idx = np.flatnonzero(active)
        remap = -np.ones(self.n, dtype=np.int64)
        remap[idx] = np.arange(idx.size)
        a = self.a[idx].copy()
        b = self.b[idx].copy()
        mi = active[self.ei]
        mj = active[self.ej]
        both = mi & mj
        # i active, j fixed
        sel = mi & ~mj
        if np.any(sel):
            xj = np.asarray(x)[self.ej[sel]]
            ti = remap[self.ei[sel]]
            np.add.at(a, ti, np.where(xj == 0, self.e[sel], self.g[sel]))
            np.add.at(b, ti, np.where(xj == 0, self.f[sel], self.h[sel]))
        # j active, i fixed
        sel = ~mi & mj
        if np.any(sel):
            xi = np.asarray(x)[self.ei[sel]]
            tj = remap[self.ej[sel]]
            np.add.at(a, tj, np.where(xi == 0, self.e[sel], self.f[sel]))
            np.add.at(b, tj, np.where(xi == 0, self.g[sel], self.h[sel]))
        sub = BinaryEnergy(a, b, remap[self.ei[both]], remap[self.ej[both]],
                           self.e[both], self.f[both], self.g[both], self.h[both])
        return sub, idx


def read_pwe(path):
    """Parse the .pwe text energy format.

    Line 1: `n l m`; next n lines: l unary values; next l lines: l values of
    V; next m lines: `i j w` with 0-based indices and i < j.
    """
    with open(path, "r") as fh:
        tokens = fh.read().split()
    pos = 0

    def take(k):
        nonlocal pos
        if pos + k > len(tokens):
            raise EnergyFormatError("truncated .pwe file")
        out = tokens[pos:pos + k]
        pos += k
        return out

    try:
        n, l, m = (int(t) for t in take(3))
        if n < 0 or l < 1 or m < 0:
            raise EnergyFormatError("bad header")
        D = np.array([float(t) for t in take(n * l)]).reshape(n, l)
        V = np.array([float(t) for t in take(l * l)]).reshape(l, l)
        ei = np.empty(m, dtype=np.int64)
        ej = np.empty(m, dtype=np.int64)
        w = np.empty(m, dtype=np.float64)
        for k in range(m):
            i_s, j_s, w_s = take(3)
            ei[k], ej[k], w[k] = int(i_s), int(j_s), float(w_s)
    except EnergyFormatError:
        raise
    except ValueError as err:
        raise EnergyFormatError(str(err)) from err
    if pos != len(tokens):
        raise EnergyFormatError("trailing data")
    if m and np.any(ei >= ej):
        raise EnergyFormatError("edges must satisfy i < j")
    if m and (ei.min() < 0 or ej.max() >= n):
        raise EnergyFormatError("edge index out of range")
    keys = ei * max(n, 1) + ej
    if np.unique(keys).size != keys.size:
        raise EnergyFormatError("duplicate edge")
    try:
        return Energy(D, V, np.column_stack([ei, ej]), w)
    except ValueError as err:
        raise EnergyFormatError(str(err)) from err


def write_pwe(energy, path):
    with open(path, "w") as fh:
        fh.write("%d %d %d\n" % (energy.n, energy.l, energy.m))
        for row in energy.D:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")
        for row in energy.V:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")
        for i, j, wv in zip(energy.ei, energy.ej, energy.w):
            fh.write("%d %d %.17g\n" % (i, j, wv))
