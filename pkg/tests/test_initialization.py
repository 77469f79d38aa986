"""Initialization pipeline: reaches, dissimilarities, MDS, alignment, scale, precisions."""

import math
import warnings

import numpy as np
import pytest

from rankspace import ModelParams, RankPanel, total_loglik
from rankspace.initialization import (
    PRECISION_CAP,
    build_dissimilarity,
    classical_mds,
    init_precisions,
    init_social_reach,
    initialize,
    scale_search,
)
from rankspace.procrustes import procrustes_align
from rankspace.simulate import GenSpec, generate_panel

from helpers import random_panel


def pairwise(coords):
    n = coords.shape[0]
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = math.dist(coords[i], coords[j])
    return D


class TestInitSocialReach:
    def test_two_actor_symmetry(self):
        y = np.array([[[0, 1], [1, 0]]] * 4)
        r = init_social_reach(RankPanel(y))
        assert r == pytest.approx([0.5, 0.5])

    def test_sums_to_one_random_panels(self):
        rng = np.random.default_rng(20)
        for _ in range(10):
            n = int(rng.integers(3, 12))
            T = int(rng.integers(1, 6))
            panel = random_panel(rng, n, T)
            r = init_social_reach(panel)
            # summation oracle: sum_i sum_{j!=i} (n - y_jit) = n^2 (n-1) / 2 per t
            direct = sum(
                n - panel.y[t, j, i]
                for t in range(T) for i in range(n) for j in range(n) if j != i
            )
            assert direct == n * n * (n - 1) * T / 2
            assert r.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(r > 0)

    def test_three_actor_hand_value(self):
        # actor 1 receives rank 1 from both others: r_1 = (2*2 + 2*2) / (9*2*1)
        y = np.array([[[0, 1, 2], [1, 0, 2], [1, 2, 0]]])
        r = init_social_reach(RankPanel(y))
        assert r[0] == pytest.approx(8 / 18, abs=1e-15)


class TestBuildDissimilarity:
    def test_diagonal_zero_and_symmetric(self):
        rng = np.random.default_rng(21)
        panel = random_panel(rng, 6, 2)
        r1 = init_social_reach(panel)
        for t in range(2):
            d = build_dissimilarity(panel, r1, t)
            assert np.all(np.diag(d) == 0)
            assert np.array_equal(d, d.T)
            assert np.all(d >= 0)

    def test_mutual_rank_one_pair_hand_value(self):
        # uniform reaches, actors 1 and 2 rank each other first:
        # d = (1/3)/(3-1) + (1/3)/(3-1) = 1/3
        y = np.array([[[0, 1, 2], [1, 0, 2], [1, 2, 0]]])
        panel = RankPanel(y)
        d = build_dissimilarity(panel, np.full(3, 1 / 3), 0)
        assert d[0, 1] == pytest.approx(1 / 3, abs=1e-15)


class TestClassicalMDS:
    def test_collinear_points(self):
        D = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        coords = classical_mds(D, 2)
        rec = pairwise(coords)
        assert rec[0, 1] == pytest.approx(1.0, abs=1e-8)
        assert rec[1, 2] == pytest.approx(1.0, abs=1e-8)
        assert rec[0, 2] == pytest.approx(2.0, abs=1e-8)
        assert np.abs(coords[:, 1]).max() == pytest.approx(0.0, abs=1e-8)

    def test_output_is_centered(self):
        rng = np.random.default_rng(22)
        pts = rng.normal(size=(7, 3))
        coords = classical_mds(pairwise(pts), 2)
        assert np.abs(coords.mean(axis=0)).max() < 1e-10

    def test_planar_round_trip(self):
        rng = np.random.default_rng(23)
        pts = rng.normal(size=(9, 2)) * 3.0
        coords = classical_mds(pairwise(pts), 2)
        assert np.abs(pairwise(coords) - pairwise(pts)).max() < 1e-6

    def test_non_euclidean_input_clips_negatives(self):
        # a metric violating the Euclidean embedding condition still embeds
        D = np.array([
            [0.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 2.0],
            [1.0, 1.0, 2.0, 0.0],
        ])
        coords = classical_mds(D, 3)
        assert np.all(np.isfinite(coords))


class TestProcrustes:
    def test_identity(self):
        rng = np.random.default_rng(24)
        pts = rng.normal(size=(8, 2))
        aligned = procrustes_align(pts, pts)
        assert np.abs(aligned - pts).max() < 1e-12

    def test_recovers_rigid_motion(self):
        rng = np.random.default_rng(25)
        target = rng.normal(size=(10, 2))
        theta = 0.5 * math.pi
        R = np.array([[math.cos(theta), -math.sin(theta)],
                      [math.sin(theta), math.cos(theta)]])
        source = target @ R.T + np.array([4.0, -1.0])
        aligned = procrustes_align(source, target)
        assert np.abs(aligned - target).max() < 1e-10

    def test_recovers_reflection(self):
        rng = np.random.default_rng(26)
        target = rng.normal(size=(10, 2))
        source = target @ np.diag([1.0, -1.0]) + 2.0
        aligned = procrustes_align(source, target)
        assert np.abs(aligned - target).max() < 1e-10

    def test_beats_random_rigid_motions(self):
        rng = np.random.default_rng(27)
        source = rng.normal(size=(6, 2))
        target = rng.normal(size=(6, 2))
        best = np.sum((procrustes_align(source, target) - target) ** 2)
        centered = source - source.mean(axis=0)
        for _ in range(1000):
            angle = rng.uniform(0, 2 * math.pi)
            R = np.array([[math.cos(angle), -math.sin(angle)],
                          [math.sin(angle), math.cos(angle)]])
            if rng.random() < 0.5:
                R = R @ np.diag([1.0, -1.0])
            shift = rng.normal(size=2)
            candidate = np.sum((centered @ R.T + target.mean(axis=0) + shift - target) ** 2)
            assert best <= candidate + 1e-9

    def test_degenerate_source_translates(self):
        target = np.array([[1.0, 2.0], [3.0, 4.0]])
        source = np.ones((2, 2))
        with pytest.warns(UserWarning, match="degenerate"):
            aligned = procrustes_align(source, target)
        assert np.abs(aligned.mean(axis=0) - target.mean(axis=0)).max() < 1e-12


class TestScaleSearch:
    def test_local_optimality(self):
        rng = np.random.default_rng(28)
        panel = random_panel(rng, 6, 3)
        r1 = init_social_reach(panel)
        Xstar = rng.normal(size=(3, 6, 2))
        c0, X1 = scale_search(panel, Xstar, r1)
        best = total_loglik(panel, X1, r1)
        assert best >= total_loglik(panel, 1.1 * c0 * Xstar, r1)
        assert best >= total_loglik(panel, 0.9 * c0 * Xstar, r1)

    def test_recovers_unit_scale_from_simulation(self):
        rng = np.random.default_rng(29)
        n, T = 12, 6
        params = ModelParams(r=rng.dirichlet(np.full(n, 8.0)), tau0=0.5,
                             tau1=2.0, tau=np.full(T - 1, 2.0), theta=20.0)
        panel, _, X_true = generate_panel(GenSpec(n=n, T=T, params=params, seed=31))
        c0, _ = scale_search(panel, X_true, params.r)
        assert 0.8 <= c0 <= 1.25

    def test_degenerate_flat_objective(self):
        rng = np.random.default_rng(30)
        panel = random_panel(rng, 4, 2)
        with pytest.warns(UserWarning, match="constant"):
            c0, X1 = scale_search(panel, np.zeros((2, 4, 2)), init_social_reach(panel))
        assert c0 == 1.0
        assert np.all(X1 == 0)


class TestInitPrecisions:
    def test_unit_mean_square_norm(self):
        # sum of squared initial coordinates equal to n*p gives tau0 = 1
        T, n, p = 4, 5, 2
        rng = np.random.default_rng(31)
        X = rng.normal(size=(T, n, p))
        X[0] *= math.sqrt(n * p / np.sum(X[0] ** 2))
        out = init_precisions(X)
        assert out["tau0_1"] == pytest.approx(1.0, abs=1e-12)
        assert out["lambda0"] == pytest.approx(1.0, abs=1e-12)

    def test_identical_steps_clamp_theta(self):
        X = np.zeros((5, 3, 2))
        X[0] = np.random.default_rng(32).normal(size=(3, 2))
        for t in range(1, 5):
            X[t] = X[t - 1] + 0.5  # constant displacement magnitude
        with pytest.warns(UserWarning, match="zero ratio variance"):
            out = init_precisions(X)
        assert out["theta1"] == PRECISION_CAP

    def test_matches_direct_formulas(self):
        rng = np.random.default_rng(33)
        T, n, p = 6, 7, 3
        X = rng.normal(size=(T, n, p)).cumsum(axis=0)
        out = init_precisions(X)
        assert out["tau0_1"] == pytest.approx(
            1.0 / (np.sum(X[0] ** 2) / (n * p)), rel=1e-12)
        for t in range(1, T):
            expected = 1.0 / (np.sum((X[t] - X[t - 1]) ** 2) / (n * p))
            assert out["tau_1"][t - 1] == pytest.approx(expected, rel=1e-12)
        assert out["tau1_1"] == out["tau_1"][0]
        ratios = out["tau_1"][1:] / out["tau_1"][:-1]
        assert out["theta1"] == pytest.approx(1.0 / np.var(ratios, ddof=1), rel=1e-12)
        assert out["lambda1"] == pytest.approx(2.0 + 1.0 / out["tau1_1"], rel=1e-12)
        assert out["mu"] == pytest.approx(math.log(out["theta1"]), rel=1e-12)

    def test_zero_displacement_clamps(self):
        X = np.zeros((3, 4, 2))
        X[0] = 1.0
        X[1] = 1.0  # zero displacement from t=1 to t=2
        X[2] = 2.0
        with pytest.warns(UserWarning):
            out = init_precisions(X)
        assert out["tau_1"][0] == PRECISION_CAP

    def test_two_time_points_theta_one(self):
        rng = np.random.default_rng(34)
        X = rng.normal(size=(2, 4, 2))
        with pytest.warns(UserWarning, match="fewer than two"):
            out = init_precisions(X)
        assert out["theta1"] == 1.0


class TestFullPipeline:
    def test_deterministic(self):
        rng = np.random.default_rng(35)
        panel = random_panel(rng, 7, 4)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = initialize(panel, p=2)
            b = initialize(panel, p=2)
        assert np.array_equal(a.X1, b.X1)
        assert np.array_equal(a.r1, b.r1)
        assert a.c0 == b.c0 and a.theta1 == b.theta1

    def test_chaining_never_increases_frame_motion(self):
        rng = np.random.default_rng(36)
        panel = random_panel(rng, 8, 5)
        r1 = init_social_reach(panel)
        raw = [classical_mds(build_dissimilarity(panel, r1, t), 2)
               for t in range(panel.T)]
        chained = [raw[0]]
        for t in range(1, panel.T):
            chained.append(procrustes_align(raw[t], chained[-1]))
        motion_raw = sum(np.sum((raw[t] - raw[t - 1]) ** 2) for t in range(1, panel.T))
        motion_chained = sum(np.sum((chained[t] - chained[t - 1]) ** 2)
                             for t in range(1, panel.T))
        assert motion_chained <= motion_raw + 1e-9

    def test_result_invariants(self):
        rng = np.random.default_rng(37)
        panel = random_panel(rng, 6, 5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = initialize(panel, p=2)
        assert res.r1.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(res.r1 > 0)
        assert res.tau0_1 > 0 and res.tau1_1 > 0 and np.all(res.tau_1 > 0)
        assert np.all(np.isfinite(res.X1))
        assert res.X1.shape == (5, 6, 2)
