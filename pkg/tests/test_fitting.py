"""Tests for population-record synthesis and parameter recovery.

Oracles: the eigendecomposition propagator is checked against the
fixed-step integrator, and every fit claim is a simulate-then-fit round
trip whose truth is known by construction.
"""

import numpy as np
import pytest

from epbraid import (
    FitResult,
    ObservationSet,
    SystemParams,
    ValidationError,
    fit_parameters,
    population_dynamics,
    population_model,
    simulate_observations,
)

EXCITED = np.array([1.0, 0.0, 0.0], dtype=complex)
SPREAD = np.array([1.0, 1.0, 1.0], dtype=complex) / np.sqrt(3.0)

TRUTH = (0.5, 1.2, 0.8)
KAPPA = 5.0
TIMES = np.linspace(0.005, 1.0, 200)
GUESS = (0.6, 1.44, 0.96)


def max_relative_error(params, truth):
    return max(abs(p - t) / abs(t) for p, t in zip(params, truth))


class TestPopulationModel:
    def test_matches_the_integrator(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            theta = (rng.uniform(-1.5, 1.5), rng.uniform(0.1, 1.5), rng.uniform(0.1, 1.5))
            kappa = rng.uniform(0.2, 3.0)
            series = population_dynamics(
                SystemParams(theta[0], theta[1], theta[2], kappa), EXCITED, T=4.0
            )
            triples = population_model(theta, kappa, EXCITED, series.times[1:])
            integrated = np.column_stack(
                [
                    series.p_g1[1:] + series.p_g0[1:],
                    series.p_e[1:],
                    series.p_f[1:],
                ]
            )
            assert np.allclose(triples, integrated, atol=1e-10)

    def test_channels_close_exactly(self):
        triples = population_model(TRUTH, KAPPA, EXCITED, TIMES)
        assert np.allclose(triples.sum(axis=1), 1.0, atol=1e-15)
        assert np.all(triples >= -1e-12) and np.all(triples <= 1.0 + 1e-12)

    def test_validation(self):
        with pytest.raises(ValidationError):
            population_model((1.0, 2.0), KAPPA, EXCITED, TIMES)
        with pytest.raises(ValidationError):
            population_model((np.nan, 1.0, 1.0), KAPPA, EXCITED, TIMES)
        with pytest.raises(ValidationError):
            population_model(TRUTH, KAPPA, EXCITED, [0.2, 0.1])
        with pytest.raises(ValidationError):
            population_model(TRUTH, KAPPA, np.array([1.0, 0.0]), TIMES)


class TestObservationSet:
    def test_accepts_synthetic_records(self):
        for seed in range(10):
            data = simulate_observations(TRUTH, KAPPA, SPREAD, TIMES, 0.01, seed)
            assert data.n_points == len(TIMES)

    def test_rejects_out_of_range_values(self):
        observed = population_model(TRUTH, KAPPA, EXCITED, TIMES)
        observed[5, 1] = 1.5
        with pytest.raises(ValidationError):
            ObservationSet(TIMES, observed)

    def test_rejects_systematic_closure_failure(self):
        observed = np.full((50, 3), 0.1)
        with pytest.raises(ValidationError):
            ObservationSet(np.linspace(0.1, 5.0, 50), observed, sigma=1e-6)

    def test_scalar_sigma_broadcasts(self):
        observed = population_model(TRUTH, KAPPA, EXCITED, TIMES)
        data = ObservationSet(TIMES, observed, sigma=0.25)
        assert data.sigma.shape == (len(TIMES),)
        assert float(data.sigma[0]) == 0.25

    def test_rejects_bad_sigma_and_shapes(self):
        observed = population_model(TRUTH, KAPPA, EXCITED, TIMES)
        with pytest.raises(ValidationError):
            ObservationSet(TIMES, observed, sigma=-0.1)
        with pytest.raises(ValidationError):
            ObservationSet(TIMES, observed[:, :2])
        with pytest.raises(ValidationError):
            ObservationSet(TIMES[::-1], observed)


class TestSimulateObservations:
    def test_noiseless_equals_the_model(self):
        data = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES)
        assert np.array_equal(data.observed, population_model(TRUTH, KAPPA, EXCITED, TIMES))
        assert np.all(data.sigma == 1.0)

    def test_deterministic_per_seed(self):
        a = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES, 0.01, seed=42)
        b = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES, 0.01, seed=42)
        c = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES, 0.01, seed=43)
        assert np.array_equal(a.observed, b.observed)
        assert not np.array_equal(a.observed, c.observed)

    def test_noise_scale_is_as_declared(self):
        clean = population_model(TRUTH, KAPPA, SPREAD, TIMES)
        deviations = []
        for seed in range(10):
            noisy = simulate_observations(TRUTH, KAPPA, SPREAD, TIMES, 0.01, seed)
            deviations.append(noisy.observed - clean)
        spread = float(np.std(np.concatenate(deviations)))
        assert 0.008 < spread < 0.012

    def test_clipping_keeps_the_unit_interval(self):
        noisy = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES, 5.0, seed=1)
        assert np.all(noisy.observed >= 0.0) and np.all(noisy.observed <= 1.0)

    def test_negative_noise_rejected(self):
        with pytest.raises(ValidationError):
            simulate_observations(TRUTH, KAPPA, EXCITED, TIMES, -0.01)


class TestFitParameters:
    def test_noiseless_round_trip(self):
        data = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES)
        result = fit_parameters(data, KAPPA, EXCITED, GUESS)
        assert isinstance(result, FitResult)
        assert result.converged
        assert max_relative_error(result.params, TRUTH) < 1e-6
        assert result.residual_rms < 1e-9
        assert not result.ill_posed

    def test_exact_guess_stops_immediately(self):
        data = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES)
        result = fit_parameters(data, KAPPA, EXCITED, TRUTH)
        assert result.converged and result.iterations <= 2
        assert result.residual_rms < 1e-10

    def test_never_worse_than_the_guess(self):
        for seed in range(5):
            data = simulate_observations(TRUTH, KAPPA, SPREAD, TIMES, 0.01, seed)
            result = fit_parameters(data, KAPPA, SPREAD, GUESS)
            at_guess = population_model(GUESS, KAPPA, SPREAD, TIMES) - data.observed
            assert result.residual_rms <= float(np.sqrt(np.mean(at_guess**2))) + 1e-15

    def test_noisy_recovery_within_five_percent(self):
        errors = []
        for seed in range(5):
            data = simulate_observations(TRUTH, KAPPA, SPREAD, TIMES, 0.01, seed)
            result = fit_parameters(data, KAPPA, SPREAD, GUESS)
            errors.append(max_relative_error(result.params, TRUTH))
        assert float(np.median(errors)) < 0.05

    def test_sign_gauge_resolved_to_nonnegative(self):
        data = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES)
        result = fit_parameters(data, KAPPA, EXCITED, (0.6, -1.1, 0.9))
        assert result.params[1] >= 0.0 and result.params[2] >= 0.0
        assert max_relative_error(result.params, TRUTH) < 1e-6

    def test_negative_coupling_data_recovers_positive_rep(self):
        data = simulate_observations((0.5, -1.2, 0.8), KAPPA, EXCITED, TIMES)
        result = fit_parameters(data, KAPPA, EXCITED, GUESS)
        assert max_relative_error(result.params, TRUTH) < 1e-6

    def test_scaling_equivariance(self):
        c = 3.0
        scaled_truth = tuple(c * t for t in TRUTH)
        data = simulate_observations(scaled_truth, c * KAPPA, EXCITED, TIMES / c)
        result = fit_parameters(data, c * KAPPA, EXCITED, tuple(c * g for g in GUESS))
        assert max_relative_error(result.params, scaled_truth) < 1e-8

    def test_flat_direction_flags_ill_posed(self):
        data = simulate_observations((0.5, 0.0, 0.8), KAPPA, EXCITED, TIMES)
        result = fit_parameters(data, KAPPA, EXCITED, (0.5, 0.0, 0.8))
        assert result.ill_posed

    def test_validation(self):
        data = simulate_observations(TRUTH, KAPPA, EXCITED, TIMES)
        short = ObservationSet(TIMES[:5], data.observed[:5], data.sigma[:5])
        with pytest.raises(ValidationError):
            fit_parameters(short, KAPPA, EXCITED, GUESS)
        with pytest.raises(ValidationError):
            fit_parameters(data, KAPPA, EXCITED, (np.inf, 1.0, 1.0))
        with pytest.raises(ValidationError):
            fit_parameters("records", KAPPA, EXCITED, GUESS)
