"""Generative sampler: trajectory moments and the latent-utility rank rows."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from rankspace import ConfigurationError, Hyperparams, ModelParams, RankPanel, row_loglik
from rankspace.simulate import (
    GenSpec,
    generate_panel,
    sample_params,
    sample_rank_row,
    sample_trajectories,
)

from helpers import panel_with_row


def make_params(n, T, rng, tau=2.0, theta=10.0):
    return ModelParams(r=rng.dirichlet(np.ones(n)), tau0=1.0, tau1=tau,
                       tau=np.full(T - 1, tau), theta=theta)


class TestTrajectories:
    def test_huge_initial_precision_pins_origin(self):
        rng = np.random.default_rng(40)
        params = ModelParams(r=np.full(4, 0.25), tau0=1e12, tau1=1.0,
                             tau=np.ones(2), theta=5.0)
        X = sample_trajectories(GenSpec(n=4, T=3, params=params), rng)
        assert np.abs(X[0]).max() < 1e-4

    def test_initial_variance_matches_precision(self):
        # 1e5 iid initial coordinates via a single wide slice
        rng = np.random.default_rng(41)
        tau0 = 2.5
        params = ModelParams(r=np.full(50_000, 1 / 50_000), tau0=tau0, tau1=1.0,
                             tau=np.array([1.0]), theta=5.0)
        X = sample_trajectories(GenSpec(n=50_000, T=2, params=params), rng)
        var = X[0].ravel().var()
        assert var == pytest.approx(1.0 / tau0, rel=0.02)

    def test_precision_ratios_have_unit_mean(self):
        # theta pinned by a near-degenerate log-normal prior; the path's
        # consecutive ratios are then Gamma(theta, theta) with mean 1
        rng = np.random.default_rng(42)
        theta = 4.0
        hyper = Hyperparams(lambda0=1.0, lambda1=6.0, mu=math.log(theta),
                            sigma2=1e-12)
        ratios = []
        for _ in range(50):
            spec = GenSpec(n=2, T=2001, hyper=hyper)
            params = sample_params(spec, rng)
            prev = np.concatenate(([params.tau1], params.tau[:-1]))
            ratios.append(params.tau / prev)
        ratios = np.concatenate(ratios)
        assert ratios.mean() == pytest.approx(1.0, rel=0.01)
        _, pvalue = stats.kstest(ratios, stats.gamma(a=theta, scale=1 / theta).cdf)
        assert pvalue > 0.01

    def test_step_variance_matches_tau(self):
        rng = np.random.default_rng(43)
        tau = 4.0
        n = 50_000
        params = ModelParams(r=np.full(n, 1 / n), tau0=1.0, tau1=tau,
                             tau=np.array([tau]), theta=5.0)
        X = sample_trajectories(GenSpec(n=n, T=2, params=params), rng)
        steps = (X[1] - X[0]).ravel()
        assert steps.var() == pytest.approx(1.0 / tau, rel=0.02)


class TestSampleRankRow:
    def test_two_actors_forced(self):
        rng = np.random.default_rng(44)
        X = np.zeros((1, 2, 2))
        r = np.array([0.5, 0.5])
        for _ in range(50):
            row = sample_rank_row(X, r, 0, 0, rng)
            assert list(row) == [0, 1]

    def test_equal_weights_uniform_orderings(self):
        rng = np.random.default_rng(45)
        n = 4
        X = np.zeros((1, n, 2))
        r = np.full(n, 1 / n)
        counts = {}
        draws = 30_000
        for _ in range(draws):
            row = sample_rank_row(X, r, 0, 0, rng)
            key = tuple(int(v) for v in row[1:])
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 6
        _, pvalue = stats.chisquare(list(counts.values()))
        assert pvalue > 0.01

    def test_frequencies_match_likelihood(self):
        # the central equivalence: utility-ordering frequencies reproduce
        # the sequential-choice probabilities
        rng = np.random.default_rng(46)
        n = 4
        X = rng.normal(size=(1, n, 2))
        r = rng.dirichlet(np.ones(n))
        i = 0
        draws = 40_000
        counts: dict[tuple, int] = {}
        for _ in range(draws):
            row = sample_rank_row(X, r, 0, i, rng)
            order = tuple(int(a) for a in np.argsort(row)[1:])
            counts[order] = counts.get(order, 0) + 1
        others = [j for j in range(n) if j != i]
        for perm in itertools.permutations(others):
            panel = panel_with_row(n, i, perm)
            prob = math.exp(row_loglik(panel, X, r, 0, i))
            se = math.sqrt(prob * (1 - prob) / draws)
            observed = counts.get(perm, 0) / draws
            assert abs(observed - prob) <= 3 * se + 1e-12


class TestGeneratePanel:
    def test_output_validates(self):
        hyper = Hyperparams(lambda0=1.0, lambda1=6.0, mu=math.log(5.0), sigma2=0.25)
        panel, params, X = generate_panel(GenSpec(n=6, T=4, hyper=hyper, seed=2))
        assert isinstance(panel, RankPanel)
        assert panel.n == 6 and panel.T == 4
        assert X.shape == (4, 6, 2)
        params.validate()

    def test_deterministic_per_seed(self):
        rng_spec = dict(n=5, T=3,
                        hyper=Hyperparams(lambda0=1.0, lambda1=6.0, mu=1.0, sigma2=0.5))
        a, pa, Xa = generate_panel(GenSpec(**rng_spec, seed=9))
        b, pb, Xb = generate_panel(GenSpec(**rng_spec, seed=9))
        c, _, _ = generate_panel(GenSpec(**rng_spec, seed=10))
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(Xa, Xb)
        assert np.array_equal(pa.r, pb.r)
        assert not np.array_equal(a.y, c.y)

    def test_static_positions_give_iid_rows(self):
        # enormous precisions freeze the trajectory; first choices of one
        # actor across time halves must then be homogeneous
        rng = np.random.default_rng(47)
        n, T = 3, 2000
        params = ModelParams(r=rng.dirichlet(np.ones(n)), tau0=1.0, tau1=1e12,
                             tau=np.full(T - 1, 1e12), theta=5.0)
        panel, _, _ = generate_panel(GenSpec(n=n, T=T, params=params, seed=3))
        first_choice = np.array([
            int(np.argmax(panel.y[t, 0] == 1)) for t in range(T)
        ])
        half = T // 2
        table = np.array([
            [np.sum(first_choice[:half] == j) for j in (1, 2)],
            [np.sum(first_choice[half:] == j) for j in (1, 2)],
        ])
        _, pvalue, _, _ = stats.chi2_contingency(table)
        assert pvalue > 0.01

    def test_paper_scale_shape(self):
        hyper = Hyperparams(lambda0=1.0, lambda1=6.0, mu=math.log(5.0), sigma2=0.25)
        panel, _, X = generate_panel(GenSpec(n=17, T=15, hyper=hyper, seed=4))
        assert (panel.n, panel.T) == (17, 15)
        assert X.shape == (15, 17, 2)

    def test_spec_requires_priors_or_params(self):
        with pytest.raises(ConfigurationError, match="concrete"):
            GenSpec(n=4, T=3, hyper=Hyperparams())
        with pytest.raises(ConfigurationError):
            GenSpec(n=0, T=3)
