"""Clustering-quality and statistical-association metrics.

Houses the soft confusion matrix, permutation-minimized misclustering
rates, the adjusted Rand index, objective-based scoring of external
labelings, and a chi-square test of independence.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import gammaincc

from .model import BipartiteAdjacency, HardLabels, ModelParams, SoftAssignment
from . import vem

EXHAUSTIVE_LIMIT = 8


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Soft confusion matrix between two membership matrices.

    ``matrix[k, k']`` is the normalized overlap between group k of the
    first assignment and group k' of the second; ``normalization`` is
    the 1/m factor that was applied.  For row-stochastic inputs the
    entries sum to 1.
    """

    matrix: np.ndarray
    normalization: float

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("confusion matrix must be 2-d")
        if matrix.min() < 0.0 or not np.all(np.isfinite(matrix)):
            raise ValueError("confusion entries must be finite and non-negative")
        object.__setattr__(self, "matrix", matrix)
        matrix.setflags(write=False)


def soft_confusion(qa: SoftAssignment, qb: SoftAssignment) -> ConfusionMatrix:
    """Entry (k, k') = (1/m) sum_i qa_ik qb_ik'."""
    if qa.n_items != qb.n_items:
        raise ValueError("assignments must cover the same items")
    norm = 1.0 / qa.n_items
    return ConfusionMatrix(norm * (qa.probs.T @ qb.probs), norm)


def _best_overlap_exhaustive(overlap: np.ndarray) -> float:
    k = overlap.shape[0]
    cols = np.arange(overlap.shape[1])
    return max(
        float(overlap[list(perm), cols].sum())
        for perm in itertools.permutations(range(k))
    )


def _best_overlap_assignment(overlap: np.ndarray) -> float:
    rows, cols = linear_sum_assignment(-overlap)
    return float(overlap[rows, cols].sum())


def misclustering_rate(
    true_labels: HardLabels, q: SoftAssignment, method: str = "auto"
) -> float:
    """Permutation-minimized misclustering rate of q against hard truth.

    Equals min over cluster permutations s of 1 - sum_k' R[s(k'), k'],
    with R the soft confusion matrix between the degenerate truth and q.
    ``method`` picks the minimization route: "exhaustive" enumerates all
    K! permutations (square confusion, K <= 8), "assignment" solves the
    equivalent linear assignment problem, and "auto" uses exhaustive
    where it applies and assignment otherwise.  The overlap total is
    accumulated unnormalized and divided by the item count once, so a
    perfect hard match yields exactly 0.
    """
    if len(true_labels) != q.n_items:
        raise ValueError("label vector and assignment must cover the same items")
    overlap = true_labels.one_hot().T @ q.probs  # K x K', unnormalized
    square = overlap.shape[0] == overlap.shape[1]
    if method == "auto":
        method = "exhaustive" if square and overlap.shape[0] <= EXHAUSTIVE_LIMIT else "assignment"
    if method == "exhaustive":
        if not square:
            raise ValueError("exhaustive path requires equal cluster counts")
        if overlap.shape[0] > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive path limited to K <= {EXHAUSTIVE_LIMIT}")
        best = _best_overlap_exhaustive(overlap)
    elif method == "assignment":
        best = _best_overlap_assignment(overlap)
    else:
        raise ValueError("method must be 'auto', 'exhaustive', or 'assignment'")
    return 1.0 - best / q.n_items


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def ari(a: HardLabels, b: HardLabels) -> float:
    """Adjusted Rand index between two hard partitions.

    Pair counting on the contingency table with exact integer
    arithmetic, rounded to float only at the end:

        (sum_ij C(n_ij,2) - E) / ((sum_i C(a_i,2) + sum_j C(b_j,2))/2 - E),
        E = sum_i C(a_i,2) sum_j C(b_j,2) / C(n,2).

    A degenerate denominator (both partitions trivial) yields 1.0 when
    the partitions are identical and 0.0 otherwise, with a warning.
    """
    if len(a) != len(b):
        raise ValueError("label vectors must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("ari requires at least two items")
    table = np.zeros((a.n_clusters, b.n_clusters), dtype=np.int64)
    np.add.at(table, (a.labels, b.labels), 1)
    sum_cells = sum(_comb2(int(x)) for x in table.ravel() if x > 1)
    sum_a = sum(_comb2(int(x)) for x in table.sum(axis=1))
    sum_b = sum(_comb2(int(x)) for x in table.sum(axis=0))
    expected = Fraction(sum_a * sum_b, _comb2(n))
    denom = Fraction(sum_a + sum_b, 2) - expected
    if denom == 0:
        identical = np.all(np.count_nonzero(table, axis=0) <= 1) and np.all(
            np.count_nonzero(table, axis=1) <= 1
        )
        warnings.warn(
            "both partitions are trivial; ari defined as 1 for identical partitions, else 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 1.0 if identical else 0.0
    return float((Fraction(sum_cells) - expected) / denom)


def score_labels(A: BipartiteAdjacency, z: HardLabels, w: HardLabels, K: int, L: int) -> float:
    """Objective value of a hard labeling under the fitted model.

    Builds degenerate memberships from (z, w), estimates the popularity
    matrices in closed form and the mixing proportions as cluster
    frequencies, and returns the objective at that point.  This is the
    quantity used to compare external labelings of the same network.
    """
    if z.n_clusters != K:
        z = HardLabels(z.labels, K)
    if w.n_clusters != L:
        w = HardLabels(w.labels, L)
    qz = SoftAssignment.degenerate(z)
    qw = SoftAssignment.degenerate(w)
    theta, lam = vem.m_step_popularity_closed(A, z, w)
    pi, rho = vem.m_step_mixing(qz, qw)
    params = ModelParams(pi, rho, theta, lam)
    return vem.elbo(A, qz, qw, params)


def chi_square_independence(table) -> tuple[float, int, float]:
    """Pearson chi-square test of independence on a contingency table.

    Returns (statistic, degrees of freedom, p-value) with the statistic
    sum (O - E)^2 / E against expected counts from the product of the
    margins, dof = (R-1)(C-1), and the p-value from the regularized
    upper incomplete gamma function Q(dof/2, statistic/2).  A table with
    a single row or column has dof 0 and p-value 1.
    """
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.size == 0:
        raise ValueError("table must be a non-empty 2-d array")
    if table.min() < 0.0:
        raise ValueError("table entries must be non-negative")
    row_sums = table.sum(axis=1)
    col_sums = table.sum(axis=0)
    for r in np.nonzero(row_sums == 0.0)[0]:
        raise ValueError(f"row {int(r)} has zero sum")
    for c in np.nonzero(col_sums == 0.0)[0]:
        raise ValueError(f"column {int(c)} has zero sum")
    expected = np.outer(row_sums, col_sums) / table.sum()
    statistic = float(((table - expected) ** 2 / expected).sum())
    dof = (table.shape[0] - 1) * (table.shape[1] - 1)
    p_value = 1.0 if dof == 0 else float(gammaincc(dof / 2.0, statistic / 2.0))
    return statistic, dof, p_value
