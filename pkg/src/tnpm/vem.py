"""Variational EM for the two-way node popularity model.

Maximizes the evidence lower bound

    J(q1, q2, Phi) = -sum_ij sum_kl qz_ik qw_jl theta_il lam_jk
                     + sum_ij A_ij sum_kl qz_ik qw_jl log(theta_il lam_jk)
                     + sum_ik qz_ik log pi_k + sum_jl qw_jl log rho_l
                     - sum_ik qz_ik log qz_ik - sum_jl qw_jl log qw_jl,

with the convention 0 log 0 = 0 and the constant -sum_ij log(A_ij!)
dropped.  The E-step updates each side's membership distribution by an
exact softmax coordinate maximization; the M-step sets the mixing
proportions to column means and alternates multiplicative updates for
the popularity matrices.  The full fit runs one SVD-seeded restart plus
N uniform-random restarts and keeps the restart with the largest final
objective.

The undirected variant fits the same model to a symmetric adjacency
matrix with identical row/column initialization and a lagged E-step
(both sides updated from the previous iteration's distributions).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .model import (
    MIXING_FLOOR,
    PARAM_FLOOR,
    BipartiteAdjacency,
    HardLabels,
    ModelParams,
    SoftAssignment,
)
from .spectral import random_init, svd_init

logger = logging.getLogger(__name__)

MODES = ("bipartite", "undirected")


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the multi-restart fitting loop.

    Parameters
    ----------
    n_random_restarts : int
        Number of uniform-random restarts run in addition to the
        SVD-seeded one (default 10).
    max_outer_iters : int
        Cap on E/M alternations per restart.
    outer_tol : float
        Relative objective-change threshold: stop when
        |J_t - J_{t-1}| <= outer_tol * (1 + |J_{t-1}|).
    max_inner_m_iters : int
        Cap on alternating popularity-update sweeps per M-step.
    inner_tol : float
        Max absolute parameter change declaring the inner loop converged.
    seed : int
        Base seed; restart s draws from stream seed + s.
    mode : str
        "bipartite" or "undirected".
    """

    n_random_restarts: int = 10
    max_outer_iters: int = 200
    outer_tol: float = 1e-8
    max_inner_m_iters: int = 100
    inner_tol: float = 1e-10
    seed: int = 0
    mode: str = "bipartite"

    def __post_init__(self) -> None:
        if self.n_random_restarts < 0:
            raise ValueError("n_random_restarts must be >= 0")
        if self.max_outer_iters < 1 or self.max_inner_m_iters < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.outer_tol <= 0.0 or self.inner_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a multi-restart fit.

    ``elbo_trace`` holds the winning restart's objective values: the
    value at initialization followed by one value per outer iteration.
    ``restart_elbos`` and ``restart_traces`` keep the final objective
    and full trace of every restart (index 0 is the SVD-seeded one).
    ``mutual_ari`` is populated only by the undirected fit: the ARI
    between the hard row and column labelings.
    """

    qz: SoftAssignment
    qw: SoftAssignment
    params: ModelParams
    elbo: float
    restart_index: int
    outer_iterations: int
    elbo_trace: np.ndarray
    converged: bool
    restart_elbos: np.ndarray
    restart_traces: tuple[np.ndarray, ...]
    mutual_ari: float | None = None

    @property
    def row_labels(self) -> HardLabels:
        return hard_labels(self.qz)

    @property
    def col_labels(self) -> HardLabels:
        return hard_labels(self.qw)


def _csr_pair(A: BipartiteAdjacency):
    """A as CSR plus its transpose, memoized on the (immutable) instance."""
    cached = getattr(A, "_csr_pair", None)
    if cached is None:
        X = A.to_csr()
        cached = (X, X.T.tocsr())
        object.__setattr__(A, "_csr_pair", cached)
    return cached


def _check_dims(A: BipartiteAdjacency, qz, qw, params: ModelParams) -> None:
    if qz is not None and qz.n_items != A.m:
        raise ValueError("qz must have one row per row node")
    if qw is not None and qw.n_items != A.n:
        raise ValueError("qw must have one row per column node")
    if params.theta.shape != (A.m, params.n_col_clusters):
        raise ValueError("theta must be m x L")
    if params.lam.shape != (A.n, params.n_row_clusters):
        raise ValueError("lam must be n x K")
    if qz is not None and qz.n_groups != params.n_row_clusters:
        raise ValueError("qz must have K columns")
    if qw is not None and qw.n_groups != params.n_col_clusters:
        raise ValueError("qw must have L columns")


def elbo(
    A: BipartiteAdjacency,
    qz: SoftAssignment,
    qw: SoftAssignment,
    params: ModelParams,
) -> float:
    """Evidence lower bound J(q1, q2, Phi), excluding -sum log(A_ij!).

    The quadratic rate term is computed from the cluster aggregates
    (qz^T theta) and (qw^T lam) in O((m+n)KL); the data term touches
    only stored nonzeros, costing O(nnz (K+L)).
    """
    _check_dims(A, qz, qw, params)
    if params.theta.min() < PARAM_FLOOR or params.lam.min() < PARAM_FLOOR:
        raise ValueError(f"theta and lam must be >= {PARAM_FLOOR}")
    S = qz.probs.T @ params.theta  # K x L
    T = qw.probs.T @ params.lam  # L x K
    rate_term = -float(np.sum(S * T.T))
    log_theta = np.log(params.theta)
    log_lam = np.log(params.lam)
    row_part = np.sum(log_theta[A.rows] * qw.probs[A.cols], axis=1)
    col_part = np.sum(log_lam[A.cols] * qz.probs[A.rows], axis=1)
    data_term = float(np.dot(A.counts, row_part + col_part))
    prior_term = float(xlogy(qz.probs, params.pi[None, :]).sum())
    prior_term += float(xlogy(qw.probs, params.rho[None, :]).sum())
    entropy_term = -float(xlogy(qz.probs, qz.probs).sum())
    entropy_term -= float(xlogy(qw.probs, qw.probs).sum())
    return rate_term + data_term + prior_term + entropy_term


def _softmax_rows(g: np.ndarray) -> SoftAssignment:
    shifted = g - g.max(axis=1, keepdims=True)
    p = np.exp(shifted)
    p /= p.sum(axis=1, keepdims=True)
    return SoftAssignment(p)


def e_step_rows(
    A: BipartiteAdjacency, params: ModelParams, qw: SoftAssignment
) -> SoftAssignment:
    """Exact coordinate maximization of J over the row distribution.

    For each row node i and row community k,

        g1(i, k) = -sum_l theta_il T_lk
                   + sum_j A_ij sum_l qw_jl log theta_il
                   + sum_j A_ij log lam_jk + log pi_k,

    with T_lk = sum_j qw_jl lam_jk, followed by a row softmax computed
    in log-domain.  The middle term is constant in k (it cancels in the
    softmax) but is included so g1 matches its definition.
    """
    _check_dims(A, None, qw, params)
    X, _ = _csr_pair(A)
    T = qw.probs.T @ params.lam  # L x K
    g = -(params.theta @ T)
    g += (X @ np.log(params.lam))  # sum_j A_ij log lam_jk
    const = np.sum((X @ qw.probs) * np.log(params.theta), axis=1)
    g += const[:, None]
    g += np.log(np.maximum(params.pi, MIXING_FLOOR))[None, :]
    return _softmax_rows(g)


def e_step_cols(
    A: BipartiteAdjacency, params: ModelParams, qz: SoftAssignment
) -> SoftAssignment:
    """Mirror of :func:`e_step_rows` for the column distribution.

    g2(j, l) = -sum_k lam_jk S_kl + sum_i A_ij sum_k qz_ik log lam_jk
               + sum_i A_ij log theta_il + log rho_l,
    with S_kl = sum_i qz_ik theta_il.
    """
    _check_dims(A, qz, None, params)
    _, Xt = _csr_pair(A)
    S = qz.probs.T @ params.theta  # K x L
    g = -(params.lam @ S)
    g += Xt @ np.log(params.theta)
    const = np.sum((Xt @ qz.probs) * np.log(params.lam), axis=1)
    g += const[:, None]
    g += np.log(np.maximum(params.rho, MIXING_FLOOR))[None, :]
    return _softmax_rows(g)


def m_step_mixing(qz: SoftAssignment, qw: SoftAssignment) -> tuple[np.ndarray, np.ndarray]:
    """Exact mixing-proportion update: column means of the memberships."""
    return qz.probs.mean(axis=0), qw.probs.mean(axis=0)


@dataclass(frozen=True, eq=False)
class InnerMStepResult:
    theta: np.ndarray
    lam: np.ndarray
    iterations: int
    converged: bool


def m_step_popularity_iterative(
    A: BipartiteAdjacency,
    qz: SoftAssignment,
    qw: SoftAssignment,
    theta_init: np.ndarray,
    lambda_init: np.ndarray,
    inner_tol: float = 1e-10,
    max_inner_m_iters: int = 100,
) -> InnerMStepResult:
    """Alternating popularity updates holding (qz, qw) fixed.

    Each sweep applies

        theta_il <- sum_j A_ij qw_jl / sum_k qz_ik T_lk,
        lam_jk   <- sum_i A_ij qz_ik / sum_l qw_jl S_kl,

    with T = qw^T lam and S = qz^T theta recomputed from the freshest
    values, so every single update is an exact coordinate maximization
    of J.  Results are clamped at PARAM_FLOOR; a zero numerator over a
    zero denominator lands on the floor.  Stops when the max absolute
    parameter change drops below ``inner_tol``; hitting the sweep cap
    returns converged=False.
    """
    theta = np.maximum(np.asarray(theta_init, dtype=np.float64), PARAM_FLOOR)
    lam = np.maximum(np.asarray(lambda_init, dtype=np.float64), PARAM_FLOOR)
    qzp, qwp = qz.probs, qw.probs
    X, Xt = _csr_pair(A)
    num_theta = X @ qwp  # m x L
    num_lam = Xt @ qzp  # n x K
    # preallocated work buffers; a zero numerator over a zero denominator
    # stays 0 (masked divide) and lands on the floor below
    den_theta = np.empty_like(num_theta)
    den_lam = np.empty_like(num_lam)
    new_theta = np.empty_like(num_theta)
    new_lam = np.empty_like(num_lam)
    mask_theta = np.empty(num_theta.shape, dtype=bool)
    mask_lam = np.empty(num_lam.shape, dtype=bool)
    iterations = 0
    converged = False
    for iterations in range(1, max_inner_m_iters + 1):
        np.matmul(qzp, (qwp.T @ lam).T, out=den_theta)  # T = qw^T lam
        np.greater(den_theta, 0.0, out=mask_theta)
        new_theta.fill(0.0)
        np.divide(num_theta, den_theta, out=new_theta, where=mask_theta)
        np.maximum(new_theta, PARAM_FLOOR, out=new_theta)
        np.matmul(qwp, (qzp.T @ new_theta).T, out=den_lam)  # S = qz^T theta
        np.greater(den_lam, 0.0, out=mask_lam)
        new_lam.fill(0.0)
        np.divide(num_lam, den_lam, out=new_lam, where=mask_lam)
        np.maximum(new_lam, PARAM_FLOOR, out=new_lam)
        np.subtract(new_theta, theta, out=den_theta)
        np.subtract(new_lam, lam, out=den_lam)
        np.abs(den_theta, out=den_theta)
        np.abs(den_lam, out=den_lam)
        delta = max(den_theta.max(), den_lam.max())
        theta, new_theta = new_theta, theta
        lam, new_lam = new_lam, lam
        if delta < inner_tol:
            converged = True
            break
    if not converged:
        logger.debug("inner M-step hit the %d-sweep cap", max_inner_m_iters)
    return InnerMStepResult(theta, lam, iterations, converged)


def m_step_popularity_closed(
    A: BipartiteAdjacency, z: HardLabels, w: HardLabels
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form popularity estimates under degenerate memberships.

        theta_il = (sum_{j in C_l} A_ij) / sqrt(B_{z_i, l}),
        lam_jk   = (sum_{i in R_k} A_ij) / sqrt(B_{k, w_j}),

    where B_kl is the total edge count between row cluster k and column
    cluster l.  Entries whose block sum is zero (including blocks of
    empty clusters) land on PARAM_FLOOR.
    """
    if len(z) != A.m or len(w) != A.n:
        raise ValueError("label lengths must match the adjacency dimensions")
    K, L = z.n_clusters, w.n_clusters
    zr = z.labels[A.rows]
    wc = w.labels[A.cols]
    B = np.zeros((K, L))
    np.add.at(B, (zr, wc), A.counts)
    row_block = np.zeros((A.m, L))
    np.add.at(row_block, (A.rows, wc), A.counts)
    col_block = np.zeros((A.n, K))
    np.add.at(col_block, (A.cols, zr), A.counts)
    row_counts = np.bincount(z.labels, minlength=K)
    col_counts = np.bincount(w.labels, minlength=L)
    for k in np.nonzero(row_counts == 0)[0]:
        logger.debug("row cluster %d is empty; its blocks land on the floor", k)
    for l in np.nonzero(col_counts == 0)[0]:
        logger.debug("column cluster %d is empty; its blocks land on the floor", l)
    root = np.sqrt(B)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = row_block / root[z.labels, :]
        lam = col_block / root.T[w.labels, :]
    theta = np.maximum(np.nan_to_num(theta, nan=0.0, posinf=0.0), PARAM_FLOOR)
    lam = np.maximum(np.nan_to_num(lam, nan=0.0, posinf=0.0), PARAM_FLOOR)
    return theta, lam


def hard_labels(q: SoftAssignment) -> HardLabels:
    """Per-row argmax, ties broken toward the smallest cluster index."""
    return HardLabels(np.argmax(q.probs, axis=1), q.n_groups)


def _init_restart(
    A: BipartiteAdjacency, z0: HardLabels, w0: HardLabels
) -> tuple[SoftAssignment, SoftAssignment, ModelParams]:
    qz = SoftAssignment.degenerate(z0)
    qw = SoftAssignment.degenerate(w0)
    theta, lam = m_step_popularity_closed(A, z0, w0)
    pi = np.full(z0.n_clusters, 1.0 / z0.n_clusters)
    rho = np.full(w0.n_clusters, 1.0 / w0.n_clusters)
    return qz, qw, ModelParams(pi, rho, theta, lam)


def _run_restart(
    A: BipartiteAdjacency,
    z0: HardLabels,
    w0: HardLabels,
    config: FitConfig,
    lagged: bool,
) -> tuple[SoftAssignment, SoftAssignment, ModelParams, np.ndarray, int, bool]:
    qz, qw, params = _init_restart(A, z0, w0)
    trace = [elbo(A, qz, qw, params)]
    converged = False
    iterations = 0
    for iterations in range(1, config.max_outer_iters + 1):
        if lagged:
            qz_new = e_step_rows(A, params, qw)
            qw = e_step_cols(A, params, qz)
            qz = qz_new
        else:
            qz = e_step_rows(A, params, qw)
            qw = e_step_cols(A, params, qz)
        pi, rho = m_step_mixing(qz, qw)
        inner = m_step_popularity_iterative(
            A, qz, qw, params.theta, params.lam, config.inner_tol, config.max_inner_m_iters
        )
        params = ModelParams(pi, rho, inner.theta, inner.lam)
        value = elbo(A, qz, qw, params)
        trace.append(value)
        if abs(value - trace[-2]) <= config.outer_tol * (1.0 + abs(trace[-2])):
            converged = True
            break
    return qz, qw, params, np.array(trace), iterations, converged


def _fit_restarts(
    A: BipartiteAdjacency,
    inits: list[tuple[HardLabels, HardLabels]],
    config: FitConfig,
    lagged: bool,
) -> FitResult:
    runs = [_run_restart(A, z0, w0, config, lagged) for z0, w0 in inits]
    finals = np.array([run[3][-1] for run in runs])
    best = int(np.argmax(finals))
    qz, qw, params, trace, iterations, converged = runs[best]
    if not any(run[5] for run in runs):
        logger.debug("no restart converged within %d iterations", config.max_outer_iters)
    return FitResult(
        qz=qz,
        qw=qw,
        params=params,
        elbo=float(trace[-1]),
        restart_index=best,
        outer_iterations=iterations,
        elbo_trace=trace,
        converged=converged,
        restart_elbos=finals,
        restart_traces=tuple(run[3] for run in runs),
    )


def fit(A: BipartiteAdjacency, K: int, L: int, config: FitConfig | None = None) -> FitResult:
    """Multi-restart variational EM fit of the bipartite model.

    Restart 0 is seeded by SVD + k-means; restarts 1..N use uniform
    random labels drawn from stream seed + restart index.  Every restart
    starts from the closed-form popularity estimates at its hard labels
    with uniform mixing, then alternates the E-step (rows, then columns
    from the freshly updated rows) and the M-step until the relative
    objective change drops below ``outer_tol``.  Returns the restart
    with the largest final objective; deterministic given the seed.
    """
    config = config or FitConfig()
    if not (1 <= K <= A.m and 1 <= L <= A.n):
        raise ValueError("cluster counts must satisfy 1 <= K <= m and 1 <= L <= n")
    inits: list[tuple[HardLabels, HardLabels]] = [svd_init(A, K, L, config.seed)]
    for s in range(1, config.n_random_restarts + 1):
        rng = np.random.default_rng(config.seed + s)
        inits.append((random_init(A.m, K, rng), random_init(A.n, L, rng)))
    return _fit_restarts(A, inits, config, lagged=False)


def fit_undirected(A: BipartiteAdjacency, K: int, config: FitConfig | None = None) -> FitResult:
    """Symmetric-network variant of :func:`fit`.

    Requires a square, symmetric adjacency matrix with an empty
    diagonal.  Each restart initializes the row and column sides with
    the same label vector, and the E-step is lagged: the new qz comes
    from the previous qw and the new qw from the previous qz (never the
    fresh one).  The result carries the ARI between the hard row and
    column labelings in ``mutual_ari``.
    """
    config = config or FitConfig(mode="undirected")
    if A.m != A.n:
        raise ValueError("undirected fit requires a square adjacency matrix")
    if np.any(A.rows == A.cols):
        raise ValueError("undirected fit requires a zero diagonal")
    At = A.transpose()
    if not (
        np.array_equal(A.rows, At.rows)
        and np.array_equal(A.cols, At.cols)
        and np.array_equal(A.counts, At.counts)
    ):
        raise ValueError("undirected fit requires a symmetric adjacency matrix")
    if not 1 <= K <= A.m:
        raise ValueError("cluster count must satisfy 1 <= K <= n")
    z_svd, _ = svd_init(A, K, K, config.seed)
    inits: list[tuple[HardLabels, HardLabels]] = [(z_svd, z_svd)]
    for s in range(1, config.n_random_restarts + 1):
        labels = random_init(A.m, K, np.random.default_rng(config.seed + s))
        inits.append((labels, labels))
    result = _fit_restarts(A, inits, config, lagged=True)
    from .metrics import ari

    mutual = ari(result.row_labels, result.col_labels)
    return FitResult(
        qz=result.qz,
        qw=result.qw,
        params=result.params,
        elbo=result.elbo,
        restart_index=result.restart_index,
        outer_iterations=result.outer_iterations,
        elbo_trace=result.elbo_trace,
        converged=result.converged,
        restart_elbos=result.restart_elbos,
        restart_traces=result.restart_traces,
        mutual_ari=mutual,
    )
