"""Core containers and likelihood primitives."""

import math

import numpy as np
import pytest

from tnpm import (
    BipartiteAdjacency,
    HardLabels,
    ModelParams,
    SoftAssignment,
    joint_log_likelihood,
    kl_poisson,
    poisson_log_pmf,
)

from helpers import dense_joint_log_likelihood, occupied_labels, random_simplex


class TestPoissonLogPmf:
    def test_zero_count_unit_mean(self):
        assert poisson_log_pmf(0, 1.0) == -1.0

    def test_unit_count_unit_mean(self):
        assert poisson_log_pmf(1, 1.0) == -1.0

    def test_direct_formula_value(self):
        # log(2.5^3 e^{-2.5} / 3!) evaluated with scalar math
        expected = 3 * math.log(2.5) - 2.5 - math.log(6.0)
        assert poisson_log_pmf(3, 2.5) == pytest.approx(expected, rel=1e-15)
        assert poisson_log_pmf(3, 2.5) == pytest.approx(-1.5428872736055896, rel=1e-15)

    def test_vectorized_matches_scalar(self):
        counts = np.array([0, 1, 2, 7, 40])
        means = np.array([0.3, 1.0, 2.5, 7.0, 39.0])
        out = poisson_log_pmf(counts, means)
        for idx in range(counts.size):
            assert out[idx] == pytest.approx(
                poisson_log_pmf(int(counts[idx]), float(means[idx])), rel=1e-15
            )

    def test_distribution_normalizes(self):
        mass = sum(math.exp(poisson_log_pmf(a, 3.7)) for a in range(60))
        assert mass == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            poisson_log_pmf(-1, 1.0)
        with pytest.raises(ValueError):
            poisson_log_pmf(2, 0.0)


class TestKlPoisson:
    def test_identical_means_vanish(self):
        for c in (0.25, 1.0, 7.0):
            assert kl_poisson(c, c) == 0.0

    def test_hand_values(self):
        assert kl_poisson(2.0, 1.0) == pytest.approx(2 * math.log(2.0) - 1.0, rel=1e-15)
        assert kl_poisson(1.0, 2.0) == pytest.approx(math.log(0.5) + 1.0, rel=1e-15)

    def test_non_negative(self):
        rng = np.random.default_rng(5)
        a = rng.uniform(0.05, 5.0, size=200)
        b = rng.uniform(0.05, 5.0, size=200)
        assert np.all(kl_poisson(a, b) >= 0.0)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            kl_poisson(0.0, 1.0)
        with pytest.raises(ValueError):
            kl_poisson(1.0, -2.0)


class TestJointLogLikelihood:
    def test_single_cell(self):
        A = BipartiteAdjacency.from_dense(np.array([[0]]))
        params = ModelParams(
            pi=np.array([1.0]),
            rho=np.array([1.0]),
            theta=np.array([[1.0]]),
            lam=np.array([[1.0]]),
        )
        z = HardLabels(np.array([0]), 1)
        w = HardLabels(np.array([0]), 1)
        assert joint_log_likelihood(A, z, w, params) == -1.0

    def test_fitted_means_equal_counts(self):
        # with theta, lam chosen so every fitted mean equals its count,
        # the count terms reduce to a sum of Poisson log-pmfs at the mode
        A = BipartiteAdjacency.from_dense(np.array([[4, 1], [1, 9]]))
        params = ModelParams(
            pi=np.array([0.5, 0.5]),
            rho=np.array([0.5, 0.5]),
            theta=np.array([[2.0, 1.0], [1.0, 3.0]]),
            lam=np.array([[2.0, 1.0], [1.0, 3.0]]),
        )
        z = HardLabels(np.array([0, 1]), 2)
        w = HardLabels(np.array([0, 1]), 2)
        expected = 4 * math.log(4.0) - 4 - math.lgamma(5.0)
        expected += 2 * (1 * math.log(1.0) - 1 - math.lgamma(2.0))
        expected += 9 * math.log(9.0) - 9 - math.lgamma(10.0)
        expected += 4 * math.log(0.5)
        assert joint_log_likelihood(A, z, w, params) == pytest.approx(expected, rel=1e-14)

    def test_dense_loop_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(8):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 7))
            K = int(rng.integers(1, 4))
            L = int(rng.integers(1, 4))
            dense = rng.poisson(2.0, size=(m, n))
            A = BipartiteAdjacency.from_dense(dense)
            params = ModelParams(
                pi=random_simplex(rng, K),
                rho=random_simplex(rng, L),
                theta=rng.uniform(0.2, 2.0, size=(m, L)),
                lam=rng.uniform(0.2, 2.0, size=(n, K)),
            )
            z = HardLabels(rng.integers(0, K, size=m), K)
            w = HardLabels(rng.integers(0, L, size=n), L)
            expected = dense_joint_log_likelihood(
                dense, z.labels, w.labels, params.pi, params.rho, params.theta, params.lam
            )
            assert joint_log_likelihood(A, z, w, params) == pytest.approx(expected, rel=1e-12)

    def test_zero_rate_at_positive_count(self):
        A = BipartiteAdjacency.from_dense(np.array([[3]]))
        params = ModelParams(
            pi=np.array([1.0]),
            rho=np.array([1.0]),
            theta=np.array([[0.0]]),
            lam=np.array([[1.0]]),
        )
        z = HardLabels(np.array([0]), 1)
        w = HardLabels(np.array([0]), 1)
        with pytest.warns(RuntimeWarning, match="zero rate"):
            value = joint_log_likelihood(A, z, w, params)
        assert value == -math.inf

    def test_dimension_mismatch(self):
        A = BipartiteAdjacency.from_dense(np.ones((2, 3), dtype=int))
        params = ModelParams(
            pi=np.array([1.0]),
            rho=np.array([1.0]),
            theta=np.ones((2, 1)),
            lam=np.ones((3, 1)),
        )
        z = HardLabels(np.array([0]), 1)
        w = HardLabels(np.array([0, 0, 0]), 1)
        with pytest.raises(ValueError):
            joint_log_likelihood(A, z, w, params)


class TestBipartiteAdjacency:
    def test_from_entries_coalesces_duplicates(self):
        A = BipartiteAdjacency.from_entries(
            2, 3, np.array([0, 0, 1, 0]), np.array([1, 1, 2, 0]), np.array([2, 3, 4, 1])
        )
        dense = A.to_dense()
        assert np.array_equal(dense, np.array([[1, 5, 0], [0, 0, 4]]))
        assert A.nnz == 3
        assert A.total == 10

    def test_from_entries_drops_zero_counts(self):
        A = BipartiteAdjacency.from_entries(
            1, 2, np.array([0, 0]), np.array([0, 1]), np.array([0, 2])
        )
        assert A.nnz == 1
        assert np.array_equal(A.to_dense(), np.array([[0, 2]]))

    def test_from_entries_rejects_bad_values(self):
        with pytest.raises(ValueError):
            BipartiteAdjacency.from_entries(2, 2, np.array([2]), np.array([0]))
        with pytest.raises(ValueError):
            BipartiteAdjacency.from_entries(2, 2, np.array([0]), np.array([-1]))
        with pytest.raises(ValueError):
            BipartiteAdjacency.from_entries(
                2, 2, np.array([0]), np.array([0]), np.array([-3])
            )
        with pytest.raises(ValueError):
            BipartiteAdjacency.from_entries(
                2, 2, np.array([0]), np.array([0]), np.array([1.5])
            )

    def test_dense_round_trip(self):
        rng = np.random.default_rng(4)
        dense = rng.poisson(0.8, size=(7, 5))
        A = BipartiteAdjacency.from_dense(dense)
        assert np.array_equal(A.to_dense(), dense)
        assert np.array_equal(A.to_csr().toarray(), dense)

    def test_margins_match_dense(self):
        rng = np.random.default_rng(9)
        dense = rng.poisson(1.2, size=(6, 8))
        A = BipartiteAdjacency.from_dense(dense)
        assert np.array_equal(A.row_sums, dense.sum(axis=1))
        assert np.array_equal(A.col_sums, dense.sum(axis=0))

    def test_transpose_is_involution(self):
        rng = np.random.default_rng(14)
        dense = rng.poisson(1.0, size=(5, 9))
        A = BipartiteAdjacency.from_dense(dense)
        At = A.transpose()
        assert np.array_equal(At.to_dense(), dense.T)
        assert np.array_equal(At.transpose().to_dense(), dense)

    def test_log_factorial_total(self):
        dense = np.array([[0, 1, 4], [3, 0, 2]])
        A = BipartiteAdjacency.from_dense(dense)
        expected = sum(math.lgamma(a + 1) for a in dense.ravel())
        assert A.log_factorial_total() == pytest.approx(expected, rel=1e-14)


class TestSoftAssignment:
    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            SoftAssignment(np.array([[1.2, -0.2]]))

    def test_rejects_rows_not_summing_to_one(self):
        with pytest.raises(ValueError):
            SoftAssignment(np.array([[0.6, 0.3]]))

    def test_degenerate_is_one_hot(self):
        labels = HardLabels(np.array([2, 0, 1]), 3)
        q = SoftAssignment.degenerate(labels)
        assert np.array_equal(q.probs, np.eye(3)[[2, 0, 1]])
        assert q.n_items == 3
        assert q.n_groups == 3


class TestHardLabels:
    def test_validation(self):
        with pytest.raises(ValueError):
            HardLabels(np.array([0, -1]), 2)
        with pytest.raises(ValueError):
            HardLabels(np.array([0, 2]), 2)
        with pytest.raises(ValueError):
            HardLabels(np.array([0, 1]), 0)

    def test_one_hot(self):
        labels = HardLabels(np.array([1, 1, 0]), 3)
        assert np.array_equal(
            labels.one_hot(), np.array([[0, 1, 0], [0, 1, 0], [1, 0, 0]], dtype=float)
        )

    def test_empty_cluster_allowed(self):
        rng = np.random.default_rng(3)
        labels = occupied_labels(rng, 10, 3)
        widened = HardLabels(labels.labels, 5)
        assert widened.one_hot().shape == (10, 5)


class TestModelParams:
    def test_rejects_non_simplex_mixing(self):
        with pytest.raises(ValueError):
            ModelParams(
                pi=np.array([0.7, 0.7]),
                rho=np.array([1.0]),
                theta=np.ones((2, 1)),
                lam=np.ones((3, 2)),
            )

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            ModelParams(
                pi=np.array([0.5, 0.5]),
                rho=np.array([1.0]),
                theta=np.ones((2, 1)),
                lam=np.ones((3, 3)),
            )

    def test_cluster_counts(self):
        params = ModelParams(
            pi=np.array([0.5, 0.5]),
            rho=np.array([0.2, 0.3, 0.5]),
            theta=np.ones((4, 3)),
            lam=np.ones((5, 2)),
        )
        assert params.n_row_clusters == 2
        assert params.n_col_clusters == 3
