"""Core data model for the two-way node popularity model (TNPM).

The model places each row node i of a bipartite network into one of K
row communities and each column node j into one of L column communities.
Conditional on the labels z, w, edge counts are independent Poisson,

    A_ij ~ Poisson(theta[i, w_j] * lam[j, z_i]),

so every row node carries a popularity parameter per column community
(theta, m x L) and every column node carries one per row community
(lam, n x K).  Multiple edges are permitted: counts are non-negative
integers, not indicators.

This module houses the adjacency container, soft/hard assignment
containers, the parameter container, and the elementary likelihood
quantities shared by the fitting, generation, and evaluation code.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.special import gammaln

# Popularity estimates are clamped below at this floor so logarithms in
# the E-step and objective stay finite; the model itself assumes the
# parameters are bounded away from zero.
PARAM_FLOOR = 1e-10

# Mixing proportions are clamped at this floor before logs, preventing
# -inf when a cluster empties mid-run.
MIXING_FLOOR = 1e-12

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BipartiteAdjacency:
    """Sparse m x n matrix of non-negative integer edge counts.

    Entries are stored as a coordinate list sorted by (i, j) with all
    stored counts >= 1 (zeros are implicit).  Row and column sums are
    precomputed because every estimation formula needs only row, column,
    or block sums over the nonzeros.

    Parameters
    ----------
    m, n : int
        Number of row and column nodes.
    rows, cols : ndarray of int64
        Coordinates of the nonzero entries.
    counts : ndarray of int64
        Edge counts, aligned with ``rows``/``cols``.

    Use :meth:`from_entries` or :meth:`from_dense` to build instances
    from unsorted or duplicated coordinate data.
    """

    m: int
    n: int
    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if self.m <= 0 or self.n <= 0:
            raise ValueError("matrix dimensions must be positive")
        if rows.ndim != 1 or rows.shape != cols.shape or rows.shape != counts.shape:
            raise ValueError("rows, cols, counts must be 1-d arrays of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.m:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.n:
                raise ValueError("column index out of range")
            if counts.min() < 1:
                raise ValueError("stored counts must be >= 1")
            keys = rows * self.n + cols
            if np.any(np.diff(keys) <= 0):
                raise ValueError("entries must be sorted by (i, j) without duplicates")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "counts", counts)
        row_sums = np.zeros(self.m, dtype=np.int64)
        col_sums = np.zeros(self.n, dtype=np.int64)
        np.add.at(row_sums, rows, counts)
        np.add.at(col_sums, cols, counts)
        object.__setattr__(self, "row_sums", row_sums)
        object.__setattr__(self, "col_sums", col_sums)
        for arr in (rows, cols, counts, row_sums, col_sums):
            arr.setflags(write=False)

    @classmethod
    def from_entries(
        cls,
        m: int,
        n: int,
        rows: np.ndarray,
        cols: np.ndarray,
        counts: np.ndarray | None = None,
    ) -> "BipartiteAdjacency":
        """Build from coordinate data, summing duplicates and dropping zeros."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if counts is None:
            counts = np.ones(rows.shape, dtype=np.int64)
        raw = np.asarray(counts)
        if not np.issubdtype(raw.dtype, np.integer) and not np.all(raw == np.rint(raw)):
            raise ValueError("counts must be integer-valued")
        counts = raw.astype(np.int64)
        if rows.size:
            if rows.min() < 0 or rows.max() >= m:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= n:
                raise ValueError("column index out of range")
            if counts.min() < 0:
                raise ValueError("counts must be non-negative")
        keys = rows * np.int64(n) + cols
        uniq, inverse = np.unique(keys, return_inverse=True)
        summed = np.zeros(uniq.size, dtype=np.int64)
        np.add.at(summed, inverse, counts)
        keep = summed > 0
        uniq = uniq[keep]
        summed = summed[keep]
        return cls(m, n, uniq // n, uniq % n, summed)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "BipartiteAdjacency":
        dense = np.asarray(dense)
        if dense.ndim != 2:
            raise ValueError("dense input must be 2-d")
        rows, cols = np.nonzero(dense)
        return cls.from_entries(dense.shape[0], dense.shape[1], rows, cols, dense[rows, cols])

    @property
    def nnz(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> int:
        """Total edge count, sum over all entries."""
        return int(self.counts.sum())

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.int64)
        out[self.rows, self.cols] = self.counts
        return out

    def transpose(self) -> "BipartiteAdjacency":
        order = np.lexsort((self.rows, self.cols))
        return BipartiteAdjacency(
            self.n, self.m, self.cols[order], self.rows[order], self.counts[order]
        )

    def to_csr(self) -> csr_matrix:
        """View as a SciPy CSR matrix of float64 counts (cached)."""
        cached = getattr(self, "_csr", None)
        if cached is None:
            cached = csr_matrix(
                (self.counts.astype(np.float64), (self.rows, self.cols)),
                shape=(self.m, self.n),
            )
            object.__setattr__(self, "_csr", cached)
        return cached

    def log_factorial_total(self) -> float:
        """Sum of log(A_ij!) over stored entries, via log-gamma.

        Computed once per distinct count value; irrelevant to any argmax
        but needed whenever the full Poisson likelihood is reported.
        """
        vals, mult = np.unique(self.counts, return_counts=True)
        return float(np.dot(mult, gammaln(vals + 1.0)))


@dataclass(frozen=True, eq=False)
class SoftAssignment:
    """Row-stochastic membership-probability matrix (q^z: m x K or q^w: n x L).

    Every entry lies in [0, 1] and every row sums to 1 within 1e-9.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] == 0 or probs.shape[1] == 0:
            raise ValueError("probabilities must form a non-empty 2-d matrix")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")
        if probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if np.max(np.abs(probs.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOL}")
        object.__setattr__(self, "probs", probs)
        probs.setflags(write=False)

    @property
    def n_items(self) -> int:
        return self.probs.shape[0]

    @property
    def n_groups(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def degenerate(cls, labels: "HardLabels") -> "SoftAssignment":
        """One-hot assignment placing probability 1 on each hard label."""
        return cls(labels.one_hot())


@dataclass(frozen=True, eq=False)
class HardLabels:
    """Vector of cluster indices in [0, n_clusters).

    ``n_clusters`` is carried explicitly because a labeling may leave
    some clusters empty.
    """

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty vector")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if labels.min() < 0 or labels.max() >= self.n_clusters:
            raise ValueError("label out of range")
        object.__setattr__(self, "labels", labels)
        labels.setflags(write=False)

    def __len__(self) -> int:
        return int(self.labels.size)

    def one_hot(self) -> np.ndarray:
        """The 0-1 indicator matrix view (m x n_clusters)."""
        out = np.zeros((self.labels.size, self.n_clusters), dtype=np.float64)
        out[np.arange(self.labels.size), self.labels] = 1.0
        return out


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Mixing proportions and popularity matrices (pi, rho, theta, lam).

    Parameters
    ----------
    pi : ndarray, shape (K,)
        Row-community mixing proportions; sums to 1.
    rho : ndarray, shape (L,)
        Column-community mixing proportions; sums to 1.
    theta : ndarray, shape (m, L)
        Popularity of row node i toward column community l.
    lam : ndarray, shape (n, K)
        Popularity of column node j toward row community k.
    """

    pi: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    lam: np.ndarray

    def __post_init__(self) -> None:
        pi = np.asarray(self.pi, dtype=np.float64)
        rho = np.asarray(self.rho, dtype=np.float64)
        theta = np.asarray(self.theta, dtype=np.float64)
        lam = np.asarray(self.lam, dtype=np.float64)
        if pi.ndim != 1 or rho.ndim != 1:
            raise ValueError("pi and rho must be vectors")
        if theta.ndim != 2 or lam.ndim != 2:
            raise ValueError("theta and lam must be matrices")
        for name, vec in (("pi", pi), ("rho", rho)):
            if vec.min() < 0.0 or abs(vec.sum() - 1.0) > ROW_SUM_TOL:
                raise ValueError(f"{name} must be a probability vector (sum 1 within {ROW_SUM_TOL})")
        if theta.min() < 0.0 or lam.min() < 0.0:
            raise ValueError("popularity parameters must be non-negative")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(lam))):
            raise ValueError("popularity parameters must be finite")
        if theta.shape[1] != rho.size:
            raise ValueError("theta must have one column per column community")
        if lam.shape[1] != pi.size:
            raise ValueError("lam must have one column per row community")
        for name, arr in (("pi", pi), ("rho", rho), ("theta", theta), ("lam", lam)):
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)

    @property
    def n_row_clusters(self) -> int:
        return self.pi.size

    @property
    def n_col_clusters(self) -> int:
        return self.rho.size


def poisson_log_pmf(count, mean):
    """Log-probability of a Poisson count.

    Parameters
    ----------
    count : int or array_like of int
        Non-negative observed count(s).
    mean : float or array_like of float
        Positive Poisson mean(s).

    Returns
    -------
    float or ndarray
        count * log(mean) - mean - log(count!), with the factorial term
        computed via log-gamma.
    """
    count_arr = np.asarray(count)
    mean_arr = np.asarray(mean, dtype=np.float64)
    if np.any(count_arr < 0):
        raise ValueError("count must be non-negative")
    if np.any(mean_arr <= 0.0):
        raise ValueError("mean must be positive")
    out = count_arr * np.log(mean_arr) - mean_arr - gammaln(count_arr + 1.0)
    return float(out) if np.isscalar(count) and np.isscalar(mean) else out


def kl_poisson(a, b):
    """Kullback-Leibler divergence between Poisson(a) and Poisson(b).

    Equals a*log(a/b) - (a - b), which is non-negative for all positive
    a, b and zero exactly when a = b.
    """
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if np.any(a_arr <= 0.0) or np.any(b_arr <= 0.0):
        raise ValueError("kl_poisson requires positive means")
    out = a_arr * np.log(a_arr / b_arr) - (a_arr - b_arr)
    return float(out) if np.isscalar(a) and np.isscalar(b) else out


def joint_log_likelihood(
    A: BipartiteAdjacency,
    z: HardLabels,
    w: HardLabels,
    params: ModelParams,
) -> float:
    """Joint log-likelihood log P(z, w, A; pi, rho, theta, lam).

    Equals sum_i log pi_{z_i} + sum_j log rho_{w_j}
    + sum_ij [-theta_{i w_j} lam_{j z_i} + A_ij log(theta_{i w_j} lam_{j z_i})
    - log(A_ij!)].  The dense -sum(theta*lam) term is computed blockwise
    from per-cluster sums in O(mL + nK + nnz); the remaining terms touch
    only the stored nonzeros.

    Returns -inf (with a warning) if any positive count sits on a zero
    rate.
    """
    if len(z) != A.m or len(w) != A.n:
        raise ValueError("label lengths must match the adjacency dimensions")
    if z.n_clusters != params.n_row_clusters or w.n_clusters != params.n_col_clusters:
        raise ValueError("label cluster counts must match the parameter shapes")
    if params.theta.shape[0] != A.m or params.lam.shape[0] != A.n:
        raise ValueError("parameter shapes must match the adjacency dimensions")

    with np.errstate(divide="ignore"):
        prior = float(np.log(params.pi[z.labels]).sum() + np.log(params.rho[w.labels]).sum())

    # -sum_ij theta_{i w_j} lam_{j z_i} = -sum_kl S_kl T_lk with
    # S_kl = sum_{i in R_k} theta_il and T_lk = sum_{j in C_l} lam_jk.
    S = np.zeros((z.n_clusters, w.n_clusters))
    np.add.at(S, z.labels, params.theta)
    T = np.zeros((w.n_clusters, z.n_clusters))
    np.add.at(T, w.labels, params.lam)
    rate_term = -float(np.sum(S * T.T))

    rates = params.theta[A.rows, w.labels[A.cols]] * params.lam[A.cols, z.labels[A.rows]]
    if np.any(rates <= 0.0):
        bad = int(np.argmax(rates <= 0.0))
        warnings.warn(
            "zero rate at positive count "
            f"(i={int(A.rows[bad])}, j={int(A.cols[bad])}); joint log-likelihood is -inf",
            RuntimeWarning,
            stacklevel=2,
        )
        return float("-inf")
    count_term = float(np.dot(A.counts, np.log(rates))) - A.log_factorial_total()

    return prior + rate_term + count_term
