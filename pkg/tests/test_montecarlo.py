"""Sampling, likelihood, MLE and benchmark tests (fast configurations;
the full-scale Cramer-Rao run lives in the acceptance suite)."""

import math

import numpy as np
import pytest

from qdeform.algebra import DeformationKind, DeformationParams
from qdeform.errors import DomainError
from qdeform.montecarlo import (
    CountSample,
    crb_benchmark,
    log_likelihood,
    log_likelihood_gradient,
    mle_epsilon,
    sample_counts,
)
from qdeform.states import (
    CoherentSpec,
    PhotonDistribution,
    ThermalSpec,
    build_distribution,
    coherent_distribution,
    mean_photon,
)

M, P = DeformationKind.M, DeformationKind.P


def params(kind, eps):
    return DeformationParams(kind, eps)


class TestSampling:
    def test_deterministic_distribution(self):
        dist = PhotonDistribution(
            probs=np.array([1.0]),
            log_probs=np.array([0.0]),
            n_max=0,
            tail_bound=0.0,
            params=params(M, 0.0),
            spec=CoherentSpec(1e-12),
        )
        sample = sample_counts(dist, 10, seed=1)
        assert sample.counts == {0: 10}
        assert sample.shots == 10

    def test_reproducibility(self):
        dist, _ = coherent_distribution(CoherentSpec(2.0), params(M, 1e-3))
        s1 = sample_counts(dist, 5000, seed=42)
        s2 = sample_counts(dist, 5000, seed=42)
        assert s1 == s2
        s3 = sample_counts(dist, 5000, seed=43)
        assert s3 != s1

    def test_poisson_sample_mean(self):
        # empirical mean within 4 sigma, sigma = sqrt(var/shots) = sqrt(1/1e5)
        dist, _ = coherent_distribution(CoherentSpec(1.0), params(M, 0.0))
        sample = sample_counts(dist, 100_000, seed=7)
        mean = sum(n * c for n, c in sample.counts.items()) / sample.shots
        assert abs(mean - 1.0) < 4 * math.sqrt(1.0 / 100_000)

    def test_sample_mean_matches_mean_photon(self):
        # within 5 standard errors for each family config
        for spec, kind, eps in [
            (CoherentSpec(4.0), M, 5e-3),
            (ThermalSpec.from_mean_photon(3.0), P, 1e-2),
        ]:
            dist = build_distribution(spec, params(kind, eps))
            sample = sample_counts(dist, 40_000, seed=11)
            ns = np.array(sorted(sample.counts))
            cs = np.array([sample.counts[int(n)] for n in ns], dtype=float)
            emp_mean = float(ns @ cs) / sample.shots
            emp_var = float((ns - emp_mean) ** 2 @ cs) / (sample.shots - 1)
            se = math.sqrt(emp_var / sample.shots)
            assert abs(emp_mean - mean_photon(dist)) < 5 * se

    def test_counts_invariant(self):
        with pytest.raises(DomainError):
            CountSample(counts={0: 3, 1: 2}, shots=6, seed=0)
        with pytest.raises(DomainError):
            CountSample(counts={}, shots=0, seed=0)


class TestLogLikelihood:
    def test_vacuum_counts_poisson(self):
        # counts {0: M} on a Poisson(|alpha|^2) probe: ln p_0 = -|alpha|^2
        sample = CountSample(counts={0: 50}, shots=50, seed=0)
        ll = log_likelihood(sample, CoherentSpec(1.5), M, 0.0)
        assert ll == pytest.approx(-50 * 1.5, rel=1e-9)

    def test_single_shot(self):
        sample = CountSample(counts={3: 1}, shots=1, seed=0)
        dist, _ = coherent_distribution(CoherentSpec(2.0), params(M, 1e-3))
        ll = log_likelihood(sample, CoherentSpec(2.0), M, 1e-3)
        assert ll == pytest.approx(float(dist.log_probs[3]), rel=1e-9)

    def test_scales_with_multiplicity(self):
        s1 = CountSample(counts={0: 10, 2: 5}, shots=15, seed=0)
        s2 = CountSample(counts={0: 20, 2: 10}, shots=30, seed=0)
        ll1 = log_likelihood(s1, CoherentSpec(1.0), M, 1e-3)
        ll2 = log_likelihood(s2, CoherentSpec(1.0), M, 1e-3)
        assert ll2 == pytest.approx(2 * ll1, rel=1e-12)

    def test_maximized_near_truth(self):
        spec = ThermalSpec.from_mean_photon(10.0)
        eps_true = 8e-3
        dist = build_distribution(spec, params(M, eps_true))
        sample = sample_counts(dist, 20_000, seed=3)
        grid = np.linspace(2e-3, 14e-3, 13)
        values = [log_likelihood(sample, spec, M, float(e)) for e in grid]
        best = grid[int(np.argmax(values))]
        assert abs(best - eps_true) < 3e-3


class TestMle:
    def test_degenerate_bracket(self):
        sample = CountSample(counts={0: 5}, shots=5, seed=0)
        result = mle_epsilon(sample, CoherentSpec(1.0), M, (1e-3, 1e-3))
        assert result.converged
        assert result.epsilon_hat == 1e-3
        assert result.iterations == 0

    def test_recovers_zero_deformation(self):
        spec = CoherentSpec(5.0)
        dist, _ = coherent_distribution(spec, params(M, 0.0))
        sample = sample_counts(dist, 50_000, seed=21)
        result = mle_epsilon(sample, spec, M, (-0.05, 0.05))
        assert result.converged
        from qdeform.estimation import classical_fisher

        fisher = classical_fisher(spec, M, 0.0, hold="intensity")
        assert abs(result.epsilon_hat) < 3.0 / math.sqrt(50_000 * fisher)

    def test_recovers_thermal_truth(self):
        spec = ThermalSpec.from_mean_photon(8.0)
        eps_true = 1e-2
        dist = build_distribution(spec, params(M, eps_true))
        sample = sample_counts(dist, 100_000, seed=5)
        result = mle_epsilon(sample, spec, M, (0.0, 0.05))
        from qdeform.estimation import classical_fisher

        fisher = classical_fisher(spec, M, eps_true, hold="intensity")
        se = 1.0 / math.sqrt(100_000 * fisher)
        assert result.converged
        assert abs(result.epsilon_hat - eps_true) < 5 * se

    def test_score_vanishes_at_mle(self):
        spec = ThermalSpec.from_mean_photon(8.0)
        eps_true = 1e-2
        dist = build_distribution(spec, params(M, eps_true))
        sample = sample_counts(dist, 20_000, seed=9)
        result = mle_epsilon(sample, spec, M, (0.0, 0.05))
        grad = log_likelihood_gradient(sample, spec, M, result.epsilon_hat)
        from qdeform.estimation import classical_fisher

        curvature = sample.shots * classical_fisher(spec, M, result.epsilon_hat,
                                                    hold="intensity")
        # |l'(eps_hat)| / |l''| is the residual offset: below 1e-6
        assert abs(grad) / curvature < 1e-6

    def test_bracket_validation(self):
        sample = CountSample(counts={0: 5}, shots=5, seed=0)
        with pytest.raises(DomainError):
            mle_epsilon(sample, CoherentSpec(1.0), M, (-2.0, 0.0))


class TestCrbBenchmark:
    def test_bit_identical_determinism(self):
        spec = ThermalSpec.from_mean_photon(5.0)
        kwargs = dict(spec=spec, kind=M, epsilon_true=5e-3, shots=2000,
                      replications=60, seed=123)
        b1 = crb_benchmark(**kwargs)
        b2 = crb_benchmark(**kwargs)
        assert b1 == b2

    def test_crb_halves_with_double_shots(self):
        spec = ThermalSpec.from_mean_photon(5.0)
        b1 = crb_benchmark(spec, M, 5e-3, shots=1000, replications=60, seed=1)
        b2 = crb_benchmark(spec, M, 5e-3, shots=2000, replications=60, seed=1)
        assert b2.crb == pytest.approx(b1.crb / 2.0, rel=1e-12)

    def test_ratio_near_unity(self):
        spec = ThermalSpec.from_mean_photon(5.0)
        bench = crb_benchmark(spec, M, 5e-3, shots=4000, replications=80, seed=77)
        assert bench.estimable
        assert bench.failed == 0
        assert 0.6 < bench.ratio < 1.8  # loose at 80 replications
        assert abs(bench.bias) < 4 * math.sqrt(bench.empirical_var / 80)
        # one-sided bound-respect with variance-of-variance allowance
        assert bench.empirical_var >= bench.crb * (1 - 3 * math.sqrt(2 / 80))

    def test_crb_respected_across_configs(self):
        # empirical_var >= crb (1 - 3 sqrt(2/reps)) on a small grid
        import warnings as _warnings

        reps = 60
        allowance = 1 - 3 * math.sqrt(2 / reps)
        configs = [
            (ThermalSpec.from_mean_photon(5.0), M, 5e-3, 2000, 1),
            (CoherentSpec(8.0), M, 5e-3, 2000, 2),
            (ThermalSpec.from_mean_photon(5.0), P, 2e-2, 2000, 3),
        ]
        for spec, kind, eps, shots, seed in configs:
            with _warnings.catch_warnings():
                # near-flat likelihoods can trip the unimodality heuristic on
                # single replications; the best point is still returned
                _warnings.simplefilter("ignore", RuntimeWarning)
                bench = crb_benchmark(spec, kind, eps, shots=shots,
                                      replications=reps, seed=seed)
            assert bench.empirical_var >= bench.crb * allowance

    def test_non_estimable_at_zero_p(self):
        bench = crb_benchmark(CoherentSpec(5.0), P, 0.0, shots=100,
                              replications=60, seed=2)
        assert not bench.estimable
        assert math.isinf(bench.crb)
        assert math.isnan(bench.ratio)

    def test_validation(self):
        with pytest.raises(DomainError):
            crb_benchmark(CoherentSpec(1.0), M, 0.0, shots=0, replications=60, seed=0)
        with pytest.raises(DomainError):
            crb_benchmark(CoherentSpec(1.0), M, 0.0, shots=10, replications=1, seed=0)

    def test_small_replication_warning(self):
        with pytest.warns(RuntimeWarning):
            crb_benchmark(ThermalSpec.from_mean_photon(2.0), M, 5e-3,
                          shots=500, replications=10, seed=4)
