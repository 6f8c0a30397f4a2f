"""Alternating-optimization tests: exact subproblem solvers, dual-domain
objective agreement, monotone training."""

import numpy as np
import pytest

import cbe
from cbe import dsp, optimizer
from cbe.dataio import synth_clustered
from cbe.optimizer import _frequency_objective, _pair_objective

from oracles import dense_circulant, grid_min_1d, grid_min_2d


def unit_rows(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


class TestUpdateTargets:
    def test_identity_generator_gives_sign_of_x(self):
        X = unit_rows(6, 8, seed=0)
        e0 = np.zeros(8)
        e0[0] = 1.0
        B = optimizer.update_targets(e0, X, k=5)
        np.testing.assert_array_equal(B[:, :5], np.where(X[:, :5] >= 0, 1.0, -1.0))
        assert np.all(B[:, 5:] == 0)

    def test_full_k_has_no_zeros(self):
        X = unit_rows(4, 16, seed=1)
        B = optimizer.update_targets(np.random.default_rng(2).standard_normal(16), X, k=16)
        assert np.all(np.abs(B) == 1)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(3)
        X = unit_rows(5, 8, seed=3)
        r = rng.standard_normal(8)
        B = optimizer.update_targets(r, X, k=8)
        projections = X @ dense_circulant(r).T
        np.testing.assert_array_equal(B, np.where(projections >= 0, 1.0, -1.0))

    def test_scale_option(self):
        X = unit_rows(3, 4, seed=4)
        r = np.random.default_rng(5).standard_normal(4)
        B = optimizer.update_targets(r, X, k=4, scale=0.5)
        assert set(np.unique(B)) <= {-0.5, 0.5}


class TestAccumulateStats:
    def test_zero_data_gives_zero_stats(self):
        X = np.zeros((4, 8))
        B = np.zeros((4, 8))
        stats = optimizer.accumulate_stats(X, B)
        assert not np.any(stats.m) and not np.any(stats.h) and not np.any(stats.g)

    def test_no_constraints_gives_zero_a(self):
        X = unit_rows(5, 8, seed=6)
        B = optimizer.update_targets(np.ones(8), X, k=8)
        stats = optimizer.accumulate_stats(X, B, constraints=None, mu=3.0)
        assert not np.any(stats.a)

    def test_frequency_binarization_term_matches_time_domain(self):
        # the Parseval identity behind the whole frequency-domain update
        n, d = 3, 4
        X = unit_rows(n, d, seed=7)
        B = optimizer.update_targets(np.random.default_rng(8).standard_normal(d), X, k=d)
        stats = optimizer.accumulate_stats(X, B)
        for seed in range(20):
            r = np.random.default_rng(100 + seed).standard_normal(d)
            spectrum = dsp.fft(r)
            re, im = spectrum.real, spectrum.imag
            freq = (re @ (stats.m * re) + im @ (stats.m * im)
                    + re @ stats.h + im @ stats.g) / d + stats.b_sq
            time = np.sum((B - X @ dense_circulant(r).T) ** 2)
            assert abs(freq - time) < 1e-8 * max(1.0, abs(time))

    def test_pairwise_diagonal(self):
        X = unit_rows(6, 8, seed=9)
        B = optimizer.update_targets(np.ones(8), X, k=8)
        constraints = optimizer.PairConstraints(similar=[(0, 1)], dissimilar=[(2, 3)])
        stats = optimizer.accumulate_stats(X, B, constraints=constraints, mu=1.0)
        sim = dsp.fft(X[0] - X[1])
        dis = dsp.fft(X[2] - X[3])
        np.testing.assert_allclose(stats.a, np.abs(sim) ** 2 - np.abs(dis) ** 2, atol=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            optimizer.accumulate_stats(np.zeros((3, 4)), np.zeros((3, 8)))


class TestSolveDc:
    def test_symmetric_double_well_breaks_tie_up(self):
        assert cbe.solve_dc(0.0, 0.0, 1.0) == 1.0

    def test_matches_frozen_grid_oracle(self):
        # grid argmin of -t + (t^2-1)^2 over [-4, 4], zoomed: t* = 1.1071599
        assert abs(cbe.solve_dc(0.0, -1.0, 1.0) - 1.1071599) < 1e-6

    def test_strong_quadratic_pins_to_zero(self):
        assert abs(cbe.solve_dc(1e6, 0.0, 1.0)) < 1e-5

    def test_degenerate_quadratic_branch(self):
        assert cbe.solve_dc(2.0, -4.0, 0.0) == 1.0

    def test_unbounded_raises(self):
        with pytest.raises(optimizer.UnboundedObjectiveError):
            cbe.solve_dc(-1.0, 0.5, 0.0)

    def test_thousand_random_instances_beat_grid(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            m = rng.uniform(-2.0, 10.0)
            h = rng.uniform(-5.0, 5.0)
            c = rng.uniform(0.2, 5.0)
            t = cbe.solve_dc(m, h, c)
            value = m * t * t + h * t + c * (t * t - 1) ** 2
            _, oracle = grid_min_1d(lambda u: m * u * u + h * u + c * (u * u - 1) ** 2)
            assert value <= oracle + 1e-6


class TestSolvePair:
    def test_unit_circle_uses_warm_direction(self):
        a, b = cbe.solve_pair(0.0, 0.0, 0.0, 1.0, warm=(0.3, 0.4))
        np.testing.assert_allclose([a, b], [0.6, 0.8], atol=1e-12)

    def test_matches_frozen_2d_grid_oracle(self):
        # 2-D grid argmin of (a^2+b^2) + (a^2+b^2-1)^2 - 2a: (1.0, 0.0)
        a, b = cbe.solve_pair(1.0, -2.0, 0.0, 1.0)
        np.testing.assert_allclose([a, b], [1.0, 0.0], atol=1e-9)

    def test_zero_tilt_zero_warm_falls_back_to_real_axis(self):
        a, b = cbe.solve_pair(0.0, 0.0, 0.0, 2.0, warm=(0.0, 0.0))
        assert b == 0.0 and a > 0

    def test_degenerate_quadratic_branch(self):
        a, b = cbe.solve_pair(2.0, -4.0, 2.0, 0.0)
        np.testing.assert_allclose([a, b], [1.0, -0.5])

    def test_unbounded_raises(self):
        with pytest.raises(optimizer.UnboundedObjectiveError):
            cbe.solve_pair(-1.0, 0.0, 0.0, 0.0)

    def test_thousand_random_instances_beat_grid(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            m = rng.uniform(-2.0, 10.0)
            h = rng.uniform(-5.0, 5.0)
            g = rng.uniform(-5.0, 5.0)
            c = rng.uniform(0.2, 5.0)
            a, b = cbe.solve_pair(m, h, g, c)
            value = _pair_objective(a, b, m, h, g, c)
            _, oracle = grid_min_2d(lambda aa, bb: _pair_objective(aa, bb, m, h, g, c))
            assert value <= oracle + 1e-6

    def test_modes_agree(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            m = rng.uniform(-2.0, 10.0)
            h = rng.uniform(-5.0, 5.0)
            g = rng.uniform(-5.0, 5.0)
            c = rng.uniform(0.2, 5.0)
            warm = tuple(rng.uniform(-2, 2, size=2))
            exact = _pair_objective(*cbe.solve_pair(m, h, g, c, warm=warm), m, h, g, c)
            descent = _pair_objective(
                *cbe.solve_pair(m, h, g, c, mode="gradient_descent", warm=warm), m, h, g, c
            )
            assert abs(exact - descent) < 1e-6


class TestUpdateSpectrum:
    def config(self, k, lam=1.0, **kw):
        return optimizer.OptConfig(k=k, lam=lam, **kw)

    def test_d2_smallest_even_case(self):
        X = unit_rows(4, 2, seed=13)
        B = optimizer.update_targets(np.array([1.0, 0.0]), X, k=2)
        stats = optimizer.accumulate_stats(X, B)
        spectrum = dsp.fft(np.array([0.5, -0.3]))
        out = optimizer.update_spectrum(spectrum, stats, self.config(k=2))
        assert out.shape == (2,)
        assert out[0].imag == 0 and out[1].imag == 0

    def test_output_spectrum_gives_real_signal(self):
        rng = np.random.default_rng(14)
        X = unit_rows(6, 4, seed=14)
        B = optimizer.update_targets(rng.standard_normal(4), X, k=4)
        stats = optimizer.accumulate_stats(X, B)
        out = optimizer.update_spectrum(dsp.fft(rng.standard_normal(4)), stats, self.config(k=4))
        assert np.max(np.abs(dsp.ifft(out).imag)) < 1e-10

    def test_objective_never_increases(self):
        rng = np.random.default_rng(15)
        for trial in range(10):
            d = 4
            X = unit_rows(5, d, seed=20 + trial)
            r = rng.standard_normal(d)
            B = optimizer.update_targets(r, X, k=d)
            stats = optimizer.accumulate_stats(X, B)
            spectrum = dsp.fft(r)
            before = _frequency_objective(spectrum, stats, lam=1.0, mu=0.0)
            after_spectrum = optimizer.update_spectrum(spectrum, stats, self.config(k=d))
            after = _frequency_objective(after_spectrum, stats, lam=1.0, mu=0.0)
            assert after <= before + 1e-9


class TestObjective:
    def test_unit_modulus_spectrum_has_zero_penalty(self):
        # r = e0 makes circ(r) the identity: orthogonal, penalty-free
        d = 8
        e0 = np.zeros(d)
        e0[0] = 1.0
        X = unit_rows(5, d, seed=16)
        B = optimizer.update_targets(e0, X, k=d)
        value = cbe.objective(e0, X, B, lam=123.0, domain="time")
        assert abs(value - np.sum((np.where(X >= 0, 1.0, -1.0) - X) ** 2)) < 1e-9

    @pytest.mark.parametrize("mu,with_pairs", [(0.0, False), (0.7, True)])
    def test_time_and_frequency_agree(self, mu, with_pairs):
        d = 8
        X = unit_rows(10, d, seed=17)
        constraints = None
        if with_pairs:
            constraints = optimizer.PairConstraints(similar=[(0, 1), (2, 3)],
                                                    dissimilar=[(4, 5)])
        for seed in range(5):
            r = np.random.default_rng(200 + seed).standard_normal(d)
            B = optimizer.update_targets(r, X, k=6)
            t = cbe.objective(r, X, B, lam=1.0, mu=mu, constraints=constraints, domain="time")
            f = cbe.objective(r, X, B, lam=1.0, mu=mu, constraints=constraints,
                              domain="frequency")
            assert abs(t - f) < 1e-8 * max(1.0, abs(t))


class TestPairConstraints:
    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            optimizer.PairConstraints(similar=[(0, 1)], dissimilar=[(0, 1)])

    def test_rejects_out_of_range(self):
        constraints = optimizer.PairConstraints(similar=[(0, 99)])
        with pytest.raises(ValueError):
            constraints.check_range(10)


class TestTrain:
    def test_monotone_trace(self):
        X = synth_clustered(10, 16, 3, 0.3, seed=18)
        _, state = cbe.train(X, optimizer.OptConfig(k=16, lam=1.0, max_outer_iters=10), seed=1)
        trace = np.asarray(state.objective_trace)
        assert trace.size >= 2
        assert np.all(np.diff(trace) <= 1e-9)

    def test_zero_iters_returns_random_init(self):
        X = synth_clustered(10, 16, 3, 0.3, seed=19)
        params, state = cbe.train(X, optimizer.OptConfig(k=16, max_outer_iters=0), seed=7)
        reference = cbe.cbe_random(16, 16, seed=7)
        np.testing.assert_array_equal(params.r, reference.r)
        np.testing.assert_array_equal(params.signs, reference.signs)
        assert state.objective_trace == []

    def test_beats_random_start_on_clustered_data(self):
        X = synth_clustered(200, 64, 10, 0.25, seed=20)
        _, state = cbe.train(X, optimizer.OptConfig(k=64, lam=1.0, max_outer_iters=10), seed=3)
        trace = state.objective_trace
        assert trace[-1] < 0.95 * trace[0]

    def test_mu_zero_matches_unsupervised_bitwise(self):
        X = synth_clustered(30, 16, 4, 0.3, seed=21)
        constraints = optimizer.PairConstraints(similar=[(0, 1)], dissimilar=[(2, 3)])
        plain, _ = cbe.train(X, optimizer.OptConfig(k=16, mu=0.0), seed=5)
        with_pairs, _ = cbe.train(X, optimizer.OptConfig(k=16, mu=0.0),
                                  constraints=constraints, seed=5)
        np.testing.assert_array_equal(plain.r, with_pairs.r)

    def test_semi_supervised_changes_solution_and_stays_monotone(self):
        X = synth_clustered(30, 16, 4, 0.3, seed=22)
        constraints = optimizer.PairConstraints(similar=[(0, 4), (1, 5)],
                                                dissimilar=[(0, 1), (2, 3)])
        plain, _ = cbe.train(X, optimizer.OptConfig(k=16, mu=0.0), seed=6)
        semi, state = cbe.train(X, optimizer.OptConfig(k=16, mu=0.5),
                                constraints=constraints, seed=6)
        assert not np.array_equal(plain.r, semi.r)
        assert np.all(np.diff(state.objective_trace) <= 1e-9)

    def test_reduced_bits_keep_zero_columns(self):
        X = synth_clustered(20, 16, 4, 0.3, seed=23)
        _, state = cbe.train(X, optimizer.OptConfig(k=6), seed=8)
        assert np.all(state.targets[:, 6:] == 0)
        assert np.all(np.abs(state.targets[:, :6]) == 1)

    def test_normalized_targets_option(self):
        X = synth_clustered(20, 16, 4, 0.3, seed=24)
        _, state = cbe.train(X, optimizer.OptConfig(k=16, normalized_targets=True), seed=9)
        assert set(np.unique(state.targets)) <= {-0.25, 0.25}  # +-1/sqrt(16)
        assert np.all(np.diff(state.objective_trace) <= 1e-9)

    def test_gradient_descent_mode_trains_monotone(self):
        X = synth_clustered(20, 16, 4, 0.3, seed=25)
        config = optimizer.OptConfig(k=16, solver_mode="gradient_descent", max_outer_iters=5)
        _, state = cbe.train(X, config, seed=10)
        assert np.all(np.diff(state.objective_trace) <= 1e-9)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            cbe.train(np.zeros((0, 16)), optimizer.OptConfig(k=16))
        with pytest.raises(ValueError):
            cbe.train(np.ones((4, 12)), optimizer.OptConfig(k=12))
        with pytest.raises(ValueError):
            cbe.train(np.ones((4, 8)), optimizer.OptConfig(k=16))
