"""Monte Carlo photon-counting experiments and Cramer-Rao benchmarking.

Synthetic intensity measurements are drawn by inverse-CDF sampling from a
truncated photon distribution (renormalized to one), epsilon is recovered
by golden-section maximum likelihood with the probe intensity held at its
known value, and the empirical estimator variance across replications is
compared against the Cramer-Rao prediction 1/(M F), with F the Fisher
information of that same fixed-intensity family.

Reproducibility: replication streams are derived from the root seed by
counter (one 64-bit sub-seed per replication index), so identical inputs
give bit-identical benchmarks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .algebra import DeformationKind, DeformationParams
from .errors import BenchmarkError, DomainError, OutOfSupportError
from .estimation import (
    PROB_FLOOR,
    DerivativeConfig,
    _analytic_score,
    _raw_scores,
    classical_fisher,
)
from .states import (
    PhotonDistribution,
    ProbeSpec,
    ThermalSpec,
    build_distribution,
    fixed_support_log_probs,
)

__all__ = [
    "CountSample",
    "MleResult",
    "CrbBenchmark",
    "sample_counts",
    "log_likelihood",
    "log_likelihood_gradient",
    "mle_epsilon",
    "crb_benchmark",
]

_LOG_SUPPORT_FLOOR = math.log(1e-300)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CountSample:
    """Histogram of observed Fock outcomes from `shots` measurements."""

    counts: Dict[int, int]
    shots: int
    seed: int

    def __post_init__(self) -> None:
        if self.shots <= 0:
            raise DomainError(f"shots must be positive, got {self.shots}")
        if sum(self.counts.values()) != self.shots:
            raise DomainError("count multiplicities must sum to shots")


@dataclass(frozen=True)
class MleResult:
    epsilon_hat: float
    log_likelihood: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class CrbBenchmark:
    """Empirical MLE variance versus the Cramer-Rao bound 1/(M F)."""

    epsilon_true: float
    shots: int
    replications: int
    seed: int
    empirical_var: float
    crb: float
    ratio: float
    bias: float
    estimable: bool = True
    failed: int = 0


def sample_counts(dist: PhotonDistribution, shots: int, seed: int) -> CountSample:
    """Draw i.i.d. Fock outcomes by inverse CDF; deterministic given seed."""
    if shots <= 0:
        raise DomainError(f"shots must be positive, got {shots}")
    p = dist.probs / dist.probs.sum()
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    u = rng.random(shots)
    outcomes = np.searchsorted(cdf, u, side="right")
    values, mult = np.unique(outcomes, return_counts=True)
    return CountSample(
        counts={int(v): int(m) for v, m in zip(values, mult)},
        shots=shots,
        seed=seed,
    )


def _counts_arrays(sample: CountSample) -> Tuple[np.ndarray, np.ndarray]:
    ns = np.array(sorted(sample.counts), dtype=int)
    cs = np.array([sample.counts[int(n)] for n in ns], dtype=float)
    return ns, cs


def _loglik_fixed(
    ns: np.ndarray,
    cs: np.ndarray,
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    n_support: int,
) -> float:
    lp = fixed_support_log_probs(spec, DeformationParams(kind, epsilon), n_support)[ns]
    if np.any(lp < _LOG_SUPPORT_FLOOR):
        bad = int(ns[int(np.argmin(lp))])
        raise OutOfSupportError(
            f"observed outcome n={bad} has probability below 1e-300 at epsilon={epsilon}"
        )
    return float(cs @ lp)


def log_likelihood(
    sample: CountSample,
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    tol: float = 1e-12,
) -> float:
    """Sum of counts[n] ln p_n(epsilon), with support sized to the sample."""
    ns, cs = _counts_arrays(sample)
    dist = build_distribution(spec, DeformationParams(kind, epsilon), tol)
    n_support = max(dist.n_max, int(ns[-1]))
    return _loglik_fixed(ns, cs, spec, kind, epsilon, n_support)


def log_likelihood_gradient(
    sample: CountSample,
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    tol: float = 1e-12,
) -> float:
    """d/d epsilon of the log-likelihood, from the analytic score."""
    ns, cs = _counts_arrays(sample)
    dist = build_distribution(spec, DeformationParams(kind, epsilon), tol)
    if int(ns[-1]) > dist.n_max:
        raise OutOfSupportError(
            f"observed outcome n={int(ns[-1])} beyond certified support {dist.n_max}"
        )
    pm, s = _analytic_score(dist, "intensity", PROB_FLOOR)
    sbar = float(pm @ s)
    d_full, _ = _raw_scores(dist)
    return float(cs @ (d_full[ns] - sbar))


def mle_epsilon(
    sample: CountSample,
    spec: ProbeSpec,
    kind: DeformationKind,
    bracket: Tuple[float, float],
    xtol: float = 1e-10,
    max_iter: int = 200,
    tol: float = 1e-12,
    n_support: Optional[int] = None,
) -> MleResult:
    """Golden-section maximization of the log-likelihood over a bracket.

    The likelihood is evaluated over one fixed outcome support sized for
    the bracket's slowest-decaying endpoint, so the objective is smooth in
    epsilon.  A coarse 9-point scan warns (but does not fail) when the
    objective looks non-unimodal; the best point found is still returned.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a
    if a <= -1.0:
        raise DomainError(f"bracket must lie inside epsilon > -1, got {bracket}")
    ns, cs = _counts_arrays(sample)
    if n_support is None:
        n_support = max(
            build_distribution(spec, DeformationParams(kind, a), tol).n_max,
            build_distribution(spec, DeformationParams(kind, b), tol).n_max,
            int(ns[-1]),
        )
    n_support = max(n_support, int(ns[-1]))

    cache: Dict[float, float] = {}

    def ll(e: float) -> float:
        if e not in cache:
            cache[e] = _loglik_fixed(ns, cs, spec, kind, e, n_support)
        return cache[e]

    if a == b:
        return MleResult(a, ll(a), True, 0)

    coarse = np.linspace(a, b, 9)
    coarse_ll = np.array([ll(float(e)) for e in coarse])
    peaks = sum(
        1
        for i in range(1, 8)
        if coarse_ll[i] >= coarse_ll[i - 1] and coarse_ll[i] >= coarse_ll[i + 1]
    )
    if peaks > 1:
        warnings.warn("log-likelihood appears non-unimodal on the bracket",
                      RuntimeWarning, stacklevel=2)

    lo, hi = a, b
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = ll(c), ll(d)
    iterations = 0
    while (hi - lo) > xtol and iterations < max_iter:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = ll(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = ll(d)
        iterations += 1
    converged = (hi - lo) <= xtol
    eps_hat = 0.5 * (lo + hi)
    ll_hat = ll(eps_hat)
    best_coarse = int(np.argmax(coarse_ll))
    if coarse_ll[best_coarse] > ll_hat:
        eps_hat = float(coarse[best_coarse])
        ll_hat = float(coarse_ll[best_coarse])
    return MleResult(eps_hat, ll_hat, converged, iterations)


def _min_admissible_epsilon(spec: ProbeSpec, kind: DeformationKind) -> float:
    """Lower bracket clip keeping the likelihood family normalizable."""
    if kind is DeformationKind.M:
        if isinstance(spec, ThermalSpec):
            return 0.0
        return -0.9 / spec.alpha_sq
    return -0.9


def crb_benchmark(
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon_true: float,
    shots: int,
    replications: int,
    seed: int,
    tol: float = 1e-12,
    bracket: Optional[Tuple[float, float]] = None,
) -> CrbBenchmark:
    """Empirical MLE variance over replications versus 1/(shots * F).

    F is the fixed-intensity Fisher information of the sampled family (the
    quantity the MLE over epsilon at known intensity is bounded by).  A
    vanishing F (e.g. P deformation at epsilon_true = 0) is reported as
    non-estimable with an infinite-CRB sentinel instead of sampling.
    """
    if shots <= 0:
        raise DomainError(f"shots must be positive, got {shots}")
    if replications < 2:
        raise DomainError(f"replications must be >= 2, got {replications}")
    if replications < 50:
        warnings.warn("fewer than 50 replications: variance estimate will be noisy",
                      RuntimeWarning, stacklevel=2)
    fisher = classical_fisher(
        spec, kind, epsilon_true, DerivativeConfig(), tol, hold="intensity"
    )
    if fisher <= 1e-280:
        return CrbBenchmark(
            epsilon_true=epsilon_true,
            shots=shots,
            replications=replications,
            seed=seed,
            empirical_var=math.nan,
            crb=math.inf,
            ratio=math.nan,
            bias=math.nan,
            estimable=False,
            failed=0,
        )
    crb = 1.0 / (shots * fisher)
    if bracket is None:
        half = max(0.02, 20.0 / math.sqrt(shots * fisher))
        lo = max(epsilon_true - half, -0.5, _min_admissible_epsilon(spec, kind))
        hi = min(epsilon_true + half, 0.5)
        bracket = (lo, hi)

    dist = build_distribution(spec, DeformationParams(kind, epsilon_true), tol)
    n_support = max(
        build_distribution(spec, DeformationParams(kind, bracket[0]), tol).n_max,
        build_distribution(spec, DeformationParams(kind, bracket[1]), tol).n_max,
    )
    rep_seeds = np.random.SeedSequence(seed).generate_state(replications, np.uint64)
    estimates = []
    failed = 0
    for i in range(replications):
        sample = sample_counts(dist, shots, int(rep_seeds[i]))
        try:
            result = mle_epsilon(sample, spec, kind, bracket, tol=tol,
                                 n_support=n_support)
        except (OutOfSupportError, RuntimeError):
            failed += 1
            continue
        if not result.converged:
            failed += 1
            continue
        estimates.append(result.epsilon_hat)
    if failed / replications >= 0.05:
        raise BenchmarkError(
            f"{failed}/{replications} replications failed; benchmark aborted"
        )
    hats = np.array(estimates)
    empirical_var = float(hats.var(ddof=1))
    bias = float(hats.mean() - epsilon_true)
    return CrbBenchmark(
        epsilon_true=epsilon_true,
        shots=shots,
        replications=replications,
        seed=seed,
        empirical_var=empirical_var,
        crb=crb,
        ratio=empirical_var / crb,
        bias=bias,
        estimable=True,
        failed=failed,
    )
