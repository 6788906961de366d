"""Shared builders for randomized test instances.

Every helper takes an explicit Generator so tests stay reproducible,
and every oracle here is written longhand (dense loops, scalar math)
rather than delegating to the library under test.
"""

import math
from fractions import Fraction

import numpy as np

from tnpm import BipartiteAdjacency, HardLabels, ModelParams, SoftAssignment


def random_soft(rng, n_items, k):
    probs = rng.random((n_items, k)) + 1e-3
    return SoftAssignment(probs / probs.sum(axis=1, keepdims=True))


def random_simplex(rng, k):
    v = rng.random(k) + 1e-3
    return v / v.sum()


def occupied_labels(rng, n_items, k):
    """Random hard labels with every cluster guaranteed non-empty."""
    if n_items < k:
        raise ValueError("need at least one item per cluster")
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n_items - k)])
    return HardLabels(rng.permutation(labels), k)


def random_params(rng, m, n, K, L, low=0.2, high=2.0):
    return ModelParams(
        pi=random_simplex(rng, K),
        rho=random_simplex(rng, L),
        theta=rng.uniform(low, high, size=(m, L)),
        lam=rng.uniform(low, high, size=(n, K)),
    )


def random_counts(rng, m, n, mean=1.5):
    return BipartiteAdjacency.from_dense(rng.poisson(mean, size=(m, n)))


def dense_objective(A_dense, qz, qw, pi, rho, theta, lam):
    """Quadruple-loop objective oracle with 0 * log 0 = 0.

    Mirrors the variational objective definition term by term and
    excludes the constant -sum log(A_ij!).
    """
    m, n = A_dense.shape
    K, L = len(pi), len(rho)
    total = 0.0
    for i in range(m):
        for j in range(n):
            for k in range(K):
                for l in range(L):
                    weight = qz[i, k] * qw[j, l]
                    rate = theta[i, l] * lam[j, k]
                    total -= weight * rate
                    if A_dense[i, j] and weight:
                        total += A_dense[i, j] * weight * math.log(rate)
    for i in range(m):
        for k in range(K):
            if qz[i, k]:
                total += qz[i, k] * (math.log(pi[k]) - math.log(qz[i, k]))
    for j in range(n):
        for l in range(L):
            if qw[j, l]:
                total += qw[j, l] * (math.log(rho[l]) - math.log(qw[j, l]))
    return total


def ari_pair_oracle(a, b):
    """ARI from an explicit loop over all item pairs, in exact rationals.

    Returns None when the adjustment denominator is zero (both
    partitions trivial), where the index is a convention rather than a
    computed value.
    """
    n = len(a)
    together_a = together_b = both = 0
    for i in range(n):
        for j in range(i + 1, n):
            sa = a[i] == a[j]
            sb = b[i] == b[j]
            together_a += sa
            together_b += sb
            both += sa and sb
    expected = Fraction(int(together_a) * int(together_b), n * (n - 1) // 2)
    denom = Fraction(int(together_a) + int(together_b), 2) - expected
    if denom == 0:
        return None
    return (Fraction(int(both)) - expected) / denom


def dense_joint_log_likelihood(A_dense, z, w, pi, rho, theta, lam):
    """Scalar-loop oracle for log P(z, w, A) including -log(A_ij!)."""
    m, n = A_dense.shape
    total = 0.0
    for i in range(m):
        total += math.log(pi[z[i]])
    for j in range(n):
        total += math.log(rho[w[j]])
    for i in range(m):
        for j in range(n):
            rate = theta[i, w[j]] * lam[j, z[i]]
            a = A_dense[i, j]
            total += a * math.log(rate) - rate - math.lgamma(a + 1)
    return total
