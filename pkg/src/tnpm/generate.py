"""Synthetic benchmark networks with planted community structure.

Two designs are provided: a bipartite Poisson network whose edge means
follow the two-way node popularity model, and an undirected binary
network from a popularity-adjusted block model with two communities and
a controllable homophily factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BipartiteAdjacency, HardLabels

# Popularity levels of the two node categories in the undirected design:
# category 0 nodes lean toward their own community (alpha), category 1
# nodes toward the other (beta).
_ALPHA = (0.8, 0.2)
_BETA = (0.2, 0.8)


@dataclass(frozen=True, eq=False)
class PlantedBipartite:
    """A generated bipartite network with its ground truth.

    ``theta_true`` and ``lambda_true`` are the drawn popularity matrices
    before the density factor r is applied, so E[A_ij] =
    r * theta_true[i, w_j] * lambda_true[j, z_i].
    """

    A: BipartiteAdjacency
    z_true: HardLabels
    w_true: HardLabels
    theta_true: np.ndarray
    lambda_true: np.ndarray
    r: float


@dataclass(frozen=True, eq=False)
class PlantedUndirected:
    """A generated undirected binary network with its ground truth.

    ``A`` is symmetric with a zero diagonal and 0/1 entries; ``labels``
    holds the two planted communities and ``categories`` the popularity
    category (0 or 1) of every node.  ``lambda_true`` is the n x 2
    matrix of popularity parameters used for the Bernoulli means.
    """

    A: BipartiteAdjacency
    labels: HardLabels
    categories: HardLabels
    lambda_true: np.ndarray
    h: float


def gen_bipartite_tnpm(
    m: int, n: int, K: int, L: int, r: float, seed
) -> PlantedBipartite:
    """Bipartite Poisson network under the two-way popularity model.

    Row labels z and column labels w are uniform categorical; the
    popularity entries are i.i.d. Uniform(0, 1); each count is drawn as
    A_ij ~ Poisson(r * theta[i, w_j] * lambda[j, z_i]).  Draw order is
    z, w, theta, lambda, counts, so the output is fully determined by
    the seed.
    """
    if m < 1 or n < 1 or K < 1 or L < 1:
        raise ValueError("dimensions and cluster counts must be >= 1")
    if r <= 0.0:
        raise ValueError("density factor r must be positive")
    rng = np.random.default_rng(seed)
    z = rng.integers(0, K, size=m)
    w = rng.integers(0, L, size=n)
    theta = rng.uniform(size=(m, L))
    lam = rng.uniform(size=(n, K))
    rate = r * theta[:, w] * lam[:, z].T
    counts = rng.poisson(rate)
    return PlantedBipartite(
        A=BipartiteAdjacency.from_dense(counts),
        z_true=HardLabels(z, K),
        w_true=HardLabels(w, L),
        theta_true=theta,
        lambda_true=lam,
        r=float(r),
    )


def gen_undirected_pabm(n: int, h: float, seed) -> PlantedUndirected:
    """Undirected two-community popularity-adjusted block model.

    Nodes split into two communities of n/2; within each community the
    first half is category 0 and the rest category 1.  Node i's
    popularity toward community r is

        alpha_i * sqrt(h / (1 + h))  if r equals i's community,
        beta_i  * sqrt(1 / (1 + h))  otherwise,

    with (alpha, beta) = (0.8, 0.2) for category 0 and (0.2, 0.8) for
    category 1, so the expected intra-community edge count is h times
    the inter-community one.  Upper-triangle entries are independent
    Bernoulli with mean lam[i, c_j] * lam[j, c_i], mirrored below; the
    diagonal is zero.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even (two equal communities)")
    if h <= 0.0:
        raise ValueError("homophily factor h must be positive")
    half = n // 2
    labels = np.repeat([0, 1], half)
    categories = np.concatenate(
        [np.repeat([0, 1], [(half + 1) // 2, half // 2])] * 2
    )
    alpha = np.array(_ALPHA)[categories]
    beta = np.array(_BETA)[categories]
    lam = np.empty((n, 2))
    own = np.sqrt(h / (1.0 + h))
    other = np.sqrt(1.0 / (1.0 + h))
    for comm in (0, 1):
        in_comm = labels == comm
        lam[in_comm, comm] = alpha[in_comm] * own
        lam[in_comm, 1 - comm] = beta[in_comm] * other
    means = lam[:, labels] * lam[:, labels].T
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    edges = rng.random(iu[0].size) < means[iu]
    dense = np.zeros((n, n), dtype=np.int64)
    dense[iu[0][edges], iu[1][edges]] = 1
    dense += dense.T
    return PlantedUndirected(
        A=BipartiteAdjacency.from_dense(dense),
        labels=HardLabels(labels, 2),
        categories=HardLabels(categories, 2),
        lambda_true=lam,
        h=float(h),
    )
