"""Spectral initialization: truncated SVD plus k-means on singular vectors.

The fitting loop seeds its first restart with hard labels obtained by
clustering the rows of the leading left singular vectors (row nodes) and
of the leading right singular vectors (column nodes).  The remaining
restarts use uniform random labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BipartiteAdjacency, HardLabels

_OVERSAMPLING = 10
_POWER_ITERS = 4


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Leading singular factors A ~ U diag(s) V^T.

    Columns of U and V are orthonormal within 1e-8 and the singular
    values are non-negative and non-increasing.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        U = np.asarray(self.U, dtype=np.float64)
        s = np.asarray(self.singular_values, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        r = s.size
        if U.ndim != 2 or V.ndim != 2 or U.shape[1] != r or V.shape[1] != r:
            raise ValueError("factor ranks must agree")
        for name, mat in (("U", U), ("V", V)):
            gram = mat.T @ mat
            if np.max(np.abs(gram - np.eye(r))) > 1e-8:
                raise ValueError(f"{name} columns must be orthonormal within 1e-8")
        if s.min() < 0.0 or np.any(np.diff(s) > 1e-12):
            raise ValueError("singular values must be non-negative and non-increasing")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "singular_values", s)
        object.__setattr__(self, "V", V)

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


def truncated_svd(A: BipartiteAdjacency, r: int, seed) -> SvdFactors:
    """Top-r singular factors via randomized subspace iteration.

    Uses a Gaussian sketch with oversampling 10 and 4 power iterations,
    re-orthonormalizing with QR at every pass, then solves the small
    projected problem exactly.

    Parameters
    ----------
    A : BipartiteAdjacency
    r : int
        Number of factors, 1 <= r <= min(m, n).
    seed : int, SeedSequence or Generator
        Source of the Gaussian test matrix.
    """
    if not 1 <= r <= min(A.m, A.n):
        raise ValueError(f"rank must satisfy 1 <= r <= min(m, n) = {min(A.m, A.n)}")
    rng = np.random.default_rng(seed)
    X = A.to_csr()
    sketch = min(r + _OVERSAMPLING, min(A.m, A.n))
    Q = np.linalg.qr(X @ rng.standard_normal((A.n, sketch)))[0]
    for _ in range(_POWER_ITERS):
        Q = np.linalg.qr(X.T @ Q)[0]
        Q = np.linalg.qr(X @ Q)[0]
    B = (X.T @ Q).T
    Ub, s, Vt = np.linalg.svd(B, full_matrices=False)
    U = Q @ Ub
    return SvdFactors(U[:, :r], np.maximum(s[:r], 0.0), Vt[:r].T)


def _kmeans_pp_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(points.shape[0])]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(points.shape[0], p=d2 / total)
        else:
            idx = rng.integers(points.shape[0])
        centroids[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centroids[c]) ** 2, axis=1))
    return centroids


def _lloyd(
    points: np.ndarray, centroids: np.ndarray, max_iters: int
) -> tuple[np.ndarray, float]:
    k = centroids.shape[0]
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    for _ in range(max_iters):
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if members.any():
                centroids[c] = points[members].mean(axis=0)
            else:
                # Empty cluster: reseed at the point farthest from its centroid.
                farthest = int(np.argmax(d2[np.arange(points.shape[0]), labels]))
                centroids[c] = points[farthest]
                labels[farthest] = c
    d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels, inertia


def kmeans(
    points: np.ndarray,
    k: int,
    seed,
    *,
    n_restarts: int = 10,
    max_iters: int = 100,
    initial_centroids: np.ndarray | None = None,
) -> HardLabels:
    """Lloyd's algorithm with k-means++ seeding and restarts.

    Runs ``n_restarts`` independent seedings and keeps the labeling with
    the lowest within-cluster sum of squares; deterministic given seed.
    When a cluster empties during an iteration its centroid is reseeded
    at the point farthest from its current centroid.

    Passing ``initial_centroids`` skips seeding and restarts and runs a
    single Lloyd's descent from the given centroids.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a non-empty 2-d array")
    if not 1 <= k <= points.shape[0]:
        raise ValueError("k must satisfy 1 <= k <= number of points")
    rng = np.random.default_rng(seed)
    if initial_centroids is not None:
        start = np.array(initial_centroids, dtype=np.float64)
        if start.shape != (k, points.shape[1]):
            raise ValueError("initial_centroids must have shape (k, dim)")
        labels, _ = _lloyd(points, start, max_iters)
        return HardLabels(labels, k)
    best_labels: np.ndarray | None = None
    best_inertia = np.inf
    for _ in range(n_restarts):
        centroids = _kmeans_pp_centroids(points, k, rng)
        labels, inertia = _lloyd(points, centroids, max_iters)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    assert best_labels is not None
    return HardLabels(best_labels, k)


def svd_init(A: BipartiteAdjacency, K: int, L: int, seed) -> tuple[HardLabels, HardLabels]:
    """Initial hard labels from one truncated SVD of the adjacency matrix.

    Factorizes at rank max(K, L), then k-means clusters the rows of the
    first K left-singular-vector columns (row labels) and of the first L
    right-singular-vector columns (column labels).
    """
    if K < 1 or L < 1:
        raise ValueError("cluster counts must be >= 1")
    rank = min(max(K, L), min(A.m, A.n))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    svd_seed, row_seed, col_seed = ss.spawn(3)
    factors = truncated_svd(A, rank, svd_seed)
    z_init = kmeans(factors.U[:, : min(K, rank)], K, row_seed)
    w_init = kmeans(factors.V[:, : min(L, rank)], L, col_seed)
    return z_init, w_init


def random_init(count: int, k: int, seed) -> HardLabels:
    """I.i.d. uniform labels over k clusters; deterministic given seed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    return HardLabels(rng.integers(0, k, size=count), k)
