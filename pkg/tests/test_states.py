"""State-construction tests: undeformed limits, normalization certificates,
parity, expansions, and the divergence guards."""

import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from qdeform.algebra import DeformationKind, DeformationParams
from qdeform.errors import DivergenceError, DomainError
from qdeform.states import (
    CatSpec,
    CoherentSpec,
    ThermalSpec,
    build_distribution,
    cat_distribution,
    cat_normalization_crosscheck,
    coherent_distribution,
    extend_truncation,
    fixed_support_log_probs,
    mean_photon,
    mean_photon_expansion,
    thermal_distribution,
)

M, P = DeformationKind.M, DeformationKind.P


def params(kind, eps):
    return DeformationParams(kind, eps)


class TestUndeformedLimits:
    def test_coherent_is_poisson(self):
        dist, amps = coherent_distribution(CoherentSpec(1.0), params(M, 0.0))
        for n in range(dist.n_max + 1):
            expected = math.exp(-1.0) / math.factorial(n)
            assert abs(dist.probs[n] - expected) < 1e-12
        assert np.allclose(amps.amps**2, dist.probs)

    def test_thermal_is_geometric(self):
        dist = thermal_distribution(ThermalSpec(beta=math.log(2.0)), params(P, 0.0))
        for n in range(dist.n_max + 1):
            assert abs(dist.probs[n] - 0.5 ** (n + 1)) < 1e-12

    def test_thermal_from_mean_photon(self):
        spec = ThermalSpec.from_mean_photon(1.0)
        assert spec.beta == pytest.approx(math.log(2.0), rel=1e-14)
        assert spec.n_mean == pytest.approx(1.0, rel=1e-14)

    def test_cat_is_even_poisson(self):
        dist, _ = cat_distribution(CatSpec(1.0), params(M, 0.0))
        norm = math.cosh(1.0)  # sum over even n of 1/n!
        for n in range(dist.n_max + 1):
            expected = (1.0 / math.factorial(n)) / norm if n % 2 == 0 else 0.0
            assert abs(dist.probs[n] - expected) < 1e-12


class TestNormalization:
    @pytest.mark.parametrize("eps", [-0.05, -0.01, 0.0, 0.01, 0.05])
    @pytest.mark.parametrize("intensity", [0.1, 1.0, 10.0, 100.0])
    @pytest.mark.parametrize("kind", [M, P])
    def test_grid(self, kind, eps, intensity):
        pr = params(kind, eps)
        tol = 1e-12
        specs = [CoherentSpec(intensity), ThermalSpec.from_mean_photon(intensity),
                 CatSpec(intensity)]
        for spec in specs:
            diverges = (
                kind is M and eps < 0.0 and (
                    isinstance(spec, ThermalSpec)
                    or getattr(spec, "alpha_sq", 0.0) * (-eps) >= 1.0
                )
            )
            if diverges:
                with pytest.raises(DivergenceError):
                    build_distribution(spec, pr, tol)
                continue
            dist = build_distribution(spec, pr, tol)
            total = float(dist.probs.sum())
            assert 1.0 - dist.tail_bound - 1e-14 <= total <= 1.0 + 1e-14
            assert dist.tail_bound <= tol
            assert np.all(dist.probs >= 0.0)

    def test_tail_bound_is_honest(self):
        # The certified bound must dominate the actual omitted mass, which a
        # much finer rebuild reveals.
        spec = CoherentSpec(5.0)
        pr = params(M, 0.02)
        coarse = build_distribution(spec, pr, 1e-6)
        fine = build_distribution(spec, pr, 1e-14)
        omitted = float(fine.probs[coarse.n_max + 1:].sum()) + fine.tail_bound
        assert omitted <= coarse.tail_bound * (1 + 1e-9)

    def test_tol_validation(self):
        with pytest.raises(DomainError):
            build_distribution(CoherentSpec(1.0), params(M, 0.0), tol=1e-3)
        with pytest.raises(DomainError):
            build_distribution(CoherentSpec(1.0), params(M, 0.0), tol=0.0)


class TestDivergenceGuards:
    def test_thermal_m_negative_eps(self):
        with pytest.raises(DivergenceError):
            thermal_distribution(ThermalSpec.from_mean_photon(5.0), params(M, -1e-3))

    def test_coherent_m_negative_eps_large_intensity(self):
        # |alpha|^2 |eps| >= 1: geometric weight ratio does not fall below 1.
        with pytest.raises(DivergenceError):
            coherent_distribution(CoherentSpec(100.0), params(M, -0.05))

    def test_coherent_m_negative_eps_small_intensity_ok(self):
        dist, _ = coherent_distribution(CoherentSpec(10.0), params(M, -0.01))
        assert dist.tail_bound <= 1e-12
        # mean grows relative to the undeformed value for eps < 0
        assert mean_photon(dist) > 10.0

    def test_cat_m_negative_eps_large_intensity(self):
        with pytest.raises(DivergenceError):
            cat_distribution(CatSpec(40.0), params(M, -0.05))


class TestCat:
    @pytest.mark.parametrize("kind", [M, P])
    @pytest.mark.parametrize("eps", [0.0, 1e-3, -1e-3, 1e-2])
    def test_parity(self, kind, eps):
        dist, amps = cat_distribution(CatSpec(4.0), params(kind, eps))
        assert np.all(dist.probs[1::2] == 0.0)
        assert np.all(amps.amps[1::2] == 0.0)

    @pytest.mark.parametrize("alpha_sq", [0.5, 2.0, 10.0, 50.0])
    def test_normalization_crosscheck(self, alpha_sq):
        wf, wd = cat_normalization_crosscheck(CatSpec(alpha_sq), params(M, 1e-3))
        assert wf == pytest.approx(wd, rel=1e-10)

    def test_mean_photon_limits(self):
        # large |alpha|: mean -> |alpha|^2; small |alpha|: mean -> |alpha|^4
        big, _ = cat_distribution(CatSpec(25.0), params(M, 0.0))
        assert mean_photon(big) == pytest.approx(25.0, rel=1e-9)
        small, _ = cat_distribution(CatSpec(0.1), params(M, 0.0))
        assert mean_photon(small) == pytest.approx(0.1 * math.tanh(0.1), rel=1e-7)
        assert mean_photon(small) == pytest.approx(0.01, rel=0.01)


class TestMeanPhoton:
    def test_poisson(self):
        dist, _ = coherent_distribution(CoherentSpec(3.0), params(M, 0.0))
        assert mean_photon(dist) == pytest.approx(3.0, rel=1e-11)

    def test_geometric(self):
        # truncation shifts the mean by O(n_max * tail_bound)
        dist = thermal_distribution(ThermalSpec.from_mean_photon(1.0), params(M, 0.0))
        assert mean_photon(dist) == pytest.approx(
            1.0, abs=2 * (dist.n_max + 2) * dist.tail_bound
        )

    def test_coherent_m_first_order(self):
        # N = x - eps x^2 / 2 + O(eps^2) at x = 4, eps = 1e-3
        dist, _ = coherent_distribution(CoherentSpec(4.0), params(M, 1e-3))
        assert mean_photon(dist) == pytest.approx(4.0 - 0.5e-3 * 16.0, abs=2e-4)

    def test_expansion_coherent(self):
        spec = CoherentSpec(4.0)
        assert mean_photon_expansion(spec, params(M, 1e-3)) == pytest.approx(4.0 - 0.008)
        x = 4.0
        assert mean_photon_expansion(spec, params(P, 1e-2)) == pytest.approx(
            x - 0.5e-4 * (x * x + x**3 / 3.0)
        )

    def test_expansion_thermal_branches(self):
        spec = ThermalSpec.from_mean_photon(30.0)
        n_t = spec.n_mean
        large = mean_photon_expansion(spec, params(M, 1e-3), regime="large")
        assert large == pytest.approx(n_t - 1e-3 * (2 * n_t**2 + 1.5 * n_t - 1 / 12))
        small_spec = ThermalSpec.from_mean_photon(0.05)
        small = mean_photon_expansion(small_spec, params(M, 1e-3), regime="small")
        assert small == pytest.approx(0.05 + 0.5e-3 * 0.05 * math.log(0.05), rel=1e-6)

    def test_expansion_small_thermal_informational(self):
        # Loose (50%) agreement of the small-n_T correction, both kinds.
        for kind, power in [(M, 1), (P, 2)]:
            spec = ThermalSpec.from_mean_photon(0.05)
            eps = 1e-3
            exact = mean_photon(thermal_distribution(spec, params(kind, eps)))
            approx = mean_photon_expansion(spec, params(kind, eps), regime="small")
            corr_exact = exact - spec.n_mean
            corr_approx = approx - spec.n_mean
            assert corr_exact != 0.0
            assert abs(corr_approx - corr_exact) <= 0.5 * abs(corr_exact)

    def test_expansion_cat_small_branch(self):
        for kind, rel in [(M, 0.25), (P, 0.25)]:
            spec = CatSpec(0.3)
            eps = 1e-2
            dist, _ = cat_distribution(spec, params(kind, eps))
            exact_corr = mean_photon(dist) - 0.3 * math.tanh(0.3)
            approx_corr = mean_photon_expansion(spec, params(kind, eps),
                                                regime="small") - 0.3 * math.tanh(0.3)
            assert abs(approx_corr - exact_corr) <= rel * abs(exact_corr)

    def test_expansion_regime_validation(self):
        with pytest.raises(DomainError):
            mean_photon_expansion(CoherentSpec(1.0), params(M, 0.0), regime="medium")


class TestThermalWeightExpansion:
    def test_m_first_order_weights(self):
        # nu_n ~ e^{-beta n} (1 - eps beta n^2 / 2): check the correction
        # term itself (next order is relatively O(eps n^2)).
        beta, eps = 0.7, 1e-4
        spec = ThermalSpec(beta=beta)
        dist = thermal_distribution(spec, params(M, eps))
        for n in range(1, 12):
            corr = dist.probs[n] / dist.probs[0] / math.exp(-beta * n) - 1.0
            assert corr == pytest.approx(-0.5 * eps * beta * n * n, rel=2e-2)

    def test_p_correction_is_second_order(self):
        # The P-deformation weight correction scales as eps^2 with
        # coefficient -(beta/12) n(1+n)(1+2n) (derived from exact gamma_n,
        # one power of eps beyond the M line).
        beta = 0.7
        spec = ThermalSpec(beta=beta)
        n = 6
        def correction(eps):
            dist = thermal_distribution(spec, params(P, eps))
            nu = dist.probs[n] / dist.probs[0]
            return nu / math.exp(-beta * n) - 1.0
        c1, c2 = correction(1e-3), correction(5e-4)
        assert c1 / c2 == pytest.approx(4.0, rel=0.05)  # quadratic in eps
        pred = -(beta / 12.0) * 1e-6 * n * (1 + n) * (1 + 2 * n)
        assert c1 == pytest.approx(pred, rel=0.01)


class TestTruncationControls:
    def test_extend_truncation_grows(self):
        dist, _ = coherent_distribution(CoherentSpec(1.0), params(M, 0.0), tol=1e-8)
        finer = extend_truncation(dist, dist.tail_bound / 100.0)
        assert finer.n_max > dist.n_max
        assert finer.tail_bound < dist.tail_bound
        # a few units for a Poisson tail
        assert finer.n_max - dist.n_max <= 8
        # retained entries agree up to the tiny renormalization shift
        shared = dist.probs[: dist.n_max + 1]
        assert np.allclose(finer.probs[: dist.n_max + 1], shared, rtol=1e-7, atol=0)

    def test_extend_truncation_geometric(self):
        dist = thermal_distribution(ThermalSpec.from_mean_photon(50.0),
                                    params(M, 0.0), tol=1e-6)
        finer = extend_truncation(dist, 1e-12)
        assert finer.n_max > dist.n_max
        assert finer.n_max >= 100
        assert float(finer.probs.sum()) >= 1.0 - 1e-12 - 1e-15

    def test_extend_truncation_requires_tighter_tol(self):
        dist, _ = coherent_distribution(CoherentSpec(1.0), params(M, 0.0), tol=1e-8)
        with pytest.raises(DomainError):
            extend_truncation(dist, dist.tail_bound * 2)

    def test_fixed_support_matches_adaptive(self):
        spec = ThermalSpec.from_mean_photon(3.0)
        pr = params(P, 1e-3)
        dist = thermal_distribution(spec, pr)
        lp = fixed_support_log_probs(spec, pr, dist.n_max)
        assert np.allclose(lp, dist.log_probs, rtol=0, atol=1e-11)


class TestHighPrecisionOracle:
    def test_coherent_p_against_decimal_sum(self):
        # Independent 50-digit evaluation of the deformed Poisson weights at
        # |alpha|^2 = 2, eps = 0.01 (exactly representable choices avoided on
        # purpose: the oracle uses the same binary epsilon).
        getcontext().prec = 60
        eps_f = 0.01
        dist, _ = coherent_distribution(CoherentSpec(2.0), params(P, eps_f))
        eps = Decimal(eps_f)
        q = 1 + eps
        x = Decimal(2)
        weights = []
        log_q_cache = []
        qn = Decimal(1)
        for n in range(dist.n_max + 1):
            if n == 0:
                weights.append(Decimal(1))
            else:
                qnum = q ** (1 - n) * (q ** (2 * n) - 1) / (eps * (2 + eps))
                log_q_cache.append(qnum)
                delta = Decimal(1)
                for v in log_q_cache:
                    delta *= v
                weights.append(x ** n / delta)
            qn *= q
        total = sum(weights)
        for n in range(dist.n_max + 1):
            expected = float(weights[n] / total)
            if expected > 1e-18:
                assert dist.probs[n] == pytest.approx(expected, rel=1e-10)
