"""Tests for the synthetic benchmark generators."""

import math

import numpy as np
import pytest

from tnpm import (
    FitConfig,
    HardLabels,
    fit_undirected,
    gen_bipartite_tnpm,
    gen_undirected_pabm,
)


def realized_rate_total(net):
    theta_cols = net.theta_true[:, net.w_true.labels]
    lam_rows = net.lambda_true[:, net.z_true.labels].T
    return net.r * float(np.sum(theta_cols * lam_rows))


class TestGenBipartiteTnpm:
    def test_shapes_and_ranges(self):
        net = gen_bipartite_tnpm(12, 15, 3, 4, 2.0, 7)
        assert (net.A.m, net.A.n) == (12, 15)
        assert net.z_true.n_clusters == 3
        assert net.w_true.n_clusters == 4
        assert net.z_true.labels.shape == (12,)
        assert net.w_true.labels.shape == (15,)
        assert net.theta_true.shape == (12, 4)
        assert net.lambda_true.shape == (15, 3)
        assert np.all(net.theta_true >= 0.0) and np.all(net.theta_true < 1.0)
        assert np.all(net.lambda_true >= 0.0) and np.all(net.lambda_true < 1.0)
        assert net.r == 2.0

    def test_deterministic_given_seed(self):
        a = gen_bipartite_tnpm(20, 25, 3, 2, 1.5, 42)
        b = gen_bipartite_tnpm(20, 25, 3, 2, 1.5, 42)
        assert np.array_equal(a.A.to_dense(), b.A.to_dense())
        assert np.array_equal(a.z_true.labels, b.z_true.labels)
        assert np.array_equal(a.w_true.labels, b.w_true.labels)
        assert np.array_equal(a.theta_true, b.theta_true)
        assert np.array_equal(a.lambda_true, b.lambda_true)

    def test_different_seeds_differ(self):
        a = gen_bipartite_tnpm(30, 30, 2, 2, 2.0, 0)
        b = gen_bipartite_tnpm(30, 30, 2, 2, 2.0, 1)
        assert not np.array_equal(a.A.to_dense(), b.A.to_dense())

    def test_total_count_within_poisson_bounds(self):
        # conditional on the drawn parameters the total count is Poisson
        # with mean equal to the summed rates, so a 4 sigma band holds
        # except with negligible probability
        for seed in range(10):
            net = gen_bipartite_tnpm(40, 50, 3, 4, 5.0, seed)
            expected = realized_rate_total(net)
            total = float(net.A.total)
            assert abs(total - expected) <= 4.0 * math.sqrt(expected)

    def test_density_concentrates_at_scale(self):
        # popularity entries are Uniform(0, 1) so the mean cell rate is
        # r/4; at 400 x 400 the empirical density lands well inside a
        # generous band around it
        m = n = 400
        r = 0.5
        net = gen_bipartite_tnpm(m, n, 3, 4, r, 11)
        expected = realized_rate_total(net)
        total = float(net.A.total)
        assert abs(total - expected) <= 4.0 * math.sqrt(expected)
        density = total / (m * n)
        assert abs(density - r / 4.0) < 0.1 * r

    def test_tiny_density_yields_empty_network(self):
        net = gen_bipartite_tnpm(50, 60, 3, 4, 1e-9, 3)
        assert net.A.nnz == 0

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            gen_bipartite_tnpm(0, 5, 2, 2, 1.0, 0)
        with pytest.raises(ValueError):
            gen_bipartite_tnpm(5, 0, 2, 2, 1.0, 0)
        with pytest.raises(ValueError):
            gen_bipartite_tnpm(5, 5, 0, 2, 1.0, 0)
        with pytest.raises(ValueError):
            gen_bipartite_tnpm(5, 5, 2, 0, 1.0, 0)
        with pytest.raises(ValueError):
            gen_bipartite_tnpm(5, 5, 2, 2, 0.0, 0)
        with pytest.raises(ValueError):
            gen_bipartite_tnpm(5, 5, 2, 2, -1.0, 0)


class TestGenUndirectedPabm:
    def test_structure(self):
        net = gen_undirected_pabm(40, 3.0, 5)
        dense = net.A.to_dense()
        assert dense.shape == (40, 40)
        assert np.array_equal(dense, dense.T)
        assert np.all(np.diag(dense) == 0)
        assert np.all((dense == 0) | (dense == 1))
        assert net.h == 3.0

    def test_planted_layout(self):
        net = gen_undirected_pabm(8, 2.0, 0)
        assert np.array_equal(net.labels.labels, [0, 0, 0, 0, 1, 1, 1, 1])
        assert np.array_equal(net.categories.labels, [0, 0, 1, 1, 0, 0, 1, 1])
        assert net.labels.n_clusters == 2
        assert net.categories.n_clusters == 2

    def test_popularity_values(self):
        h = 2.5
        net = gen_undirected_pabm(8, h, 0)
        own = math.sqrt(h / (1.0 + h))
        other = math.sqrt(1.0 / (1.0 + h))
        # node 0: community 0, category 0 (alpha 0.8, beta 0.2)
        assert net.lambda_true[0, 0] == pytest.approx(0.8 * own, abs=1e-15)
        assert net.lambda_true[0, 1] == pytest.approx(0.2 * other, abs=1e-15)
        # node 2: community 0, category 1 (alpha 0.2, beta 0.8)
        assert net.lambda_true[2, 0] == pytest.approx(0.2 * own, abs=1e-15)
        assert net.lambda_true[2, 1] == pytest.approx(0.8 * other, abs=1e-15)
        # node 6: community 1, category 1
        assert net.lambda_true[6, 1] == pytest.approx(0.2 * own, abs=1e-15)
        assert net.lambda_true[6, 0] == pytest.approx(0.8 * other, abs=1e-15)

    def test_edge_means_bounded(self):
        for h in (0.5, 1.0, 4.0, 50.0):
            net = gen_undirected_pabm(20, h, 1)
            labels = net.labels.labels
            means = net.lambda_true[:, labels] * net.lambda_true[:, labels].T
            assert float(means.max()) <= 0.64 * max(h, 1.0) / (1.0 + h) + 1e-12
            assert float(means.max()) < 0.64

    def test_homophily_ratio(self):
        # the expected intra-community edge count is h times the
        # inter-community one, so at n = 2000 the empirical ratio sits
        # within a few percent of h
        n, h = 2000, 2.0
        net = gen_undirected_pabm(n, h, 9)
        dense = net.A.to_dense()
        same = net.labels.labels[:, None] == net.labels.labels[None, :]
        intra = float(dense[same].sum()) / 2.0
        inter = float(dense[~same].sum()) / 2.0
        assert abs(intra / inter - h) < 0.05 * h

    def test_deterministic_given_seed(self):
        a = gen_undirected_pabm(60, 1.5, 21)
        b = gen_undirected_pabm(60, 1.5, 21)
        assert np.array_equal(a.A.to_dense(), b.A.to_dense())
        assert np.array_equal(a.labels.labels, b.labels.labels)
        assert np.array_equal(a.categories.labels, b.categories.labels)
        assert np.array_equal(a.lambda_true, b.lambda_true)

    def test_output_accepted_by_undirected_fit(self):
        net = gen_undirected_pabm(16, 3.0, 2)
        config = FitConfig(n_random_restarts=1, max_outer_iters=5, seed=0, mode="undirected")
        result = fit_undirected(net.A, 2, config)
        assert result.qz.probs.shape == (16, 2)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            gen_undirected_pabm(7, 2.0, 0)
        with pytest.raises(ValueError):
            gen_undirected_pabm(0, 2.0, 0)
        with pytest.raises(ValueError):
            gen_undirected_pabm(20, 0.0, 0)
        with pytest.raises(ValueError):
            gen_undirected_pabm(20, -1.0, 0)
