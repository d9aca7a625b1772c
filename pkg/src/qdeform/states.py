"""Photon-number distributions of deformed coherent, thermal and cat states.

Each family is assembled from unnormalized log-weights ln w_n:

  coherent:  ln w_n = n ln|alpha|^2 - ln Delta_n
  thermal:   ln w_n = -(beta/2) (gamma_{n+1} + gamma_n - 1)
  cat:       coherent weights restricted to even n (odd amplitudes cancel)

Weights are summed in the log domain after subtracting the running max.
Truncation is certified: once the boundary weight ratio r is below 1 (and
the ratio sequence is non-increasing, which holds for every normalizable
configuration of these families), the omitted mass is bounded by the
geometric majorant w_last r/(1-r).  Distributions are normalized against
the truncated sum plus that certified tail, so sum(probs) = 1 - tail_bound.

Non-normalizable corners raise DivergenceError instead of looping: the M
deformation with epsilon < 0 has a bounded spectrum (gamma_n saturates at
1/|epsilon|), which makes every thermal state divergent and coherent/cat
states divergent once |alpha|^2 |epsilon| >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .algebra import (
    DeformationKind,
    DeformationParams,
    gamma_values,
    log_delta_values,
)
from .errors import DivergenceError, DomainError

__all__ = [
    "CoherentSpec",
    "ThermalSpec",
    "CatSpec",
    "ProbeSpec",
    "PhotonDistribution",
    "AmplitudeVector",
    "coherent_distribution",
    "thermal_distribution",
    "cat_distribution",
    "build_distribution",
    "mean_photon",
    "mean_photon_expansion",
    "extend_truncation",
    "cat_normalization_crosscheck",
]

HARD_CAP = 1_000_000
DEFAULT_TOL = 1e-12

# Log-weights this far below the peak underflow any certified tolerance and
# are trimmed before ratio analysis (exp stays in the normal float range).
_UNDERFLOW_LOG = 700.0
_RATIO_SLACK = 1e-9


@dataclass(frozen=True)
class CoherentSpec:
    """Deformed coherent probe, parametrized by the intensity |alpha|^2."""

    alpha_sq: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha_sq) and self.alpha_sq > 0):
            raise DomainError(f"alpha_sq must be positive, got {self.alpha_sq}")


@dataclass(frozen=True)
class ThermalSpec:
    """Deformed thermal probe at inverse temperature beta (unit frequency)."""

    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be positive, got {self.beta}")

    @classmethod
    def from_mean_photon(cls, n_mean: float) -> "ThermalSpec":
        """Build from the undeformed mean photon number via beta = ln(1 + 1/n)."""
        if not (math.isfinite(n_mean) and n_mean > 0):
            raise DomainError(f"n_mean must be positive, got {n_mean}")
        return cls(beta=math.log1p(1.0 / n_mean))

    @property
    def n_mean(self) -> float:
        """Undeformed mean photon number 1/(e^beta - 1)."""
        return 1.0 / math.expm1(self.beta)


@dataclass(frozen=True)
class CatSpec:
    """Even superposition of +alpha and -alpha deformed coherent states."""

    alpha_sq: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha_sq) and self.alpha_sq > 0):
            raise DomainError(f"alpha_sq must be positive, got {self.alpha_sq}")


ProbeSpec = Union[CoherentSpec, ThermalSpec, CatSpec]


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """Truncated Fock-basis probability vector with a certified tail bound.

    probs[n] for n = 0..n_max sums to 1 - tail_bound; log_probs carries the
    same information without underflow in the far tail.
    """

    probs: np.ndarray
    log_probs: np.ndarray
    n_max: int
    tail_bound: float
    params: DeformationParams
    spec: ProbeSpec


@dataclass(frozen=True, eq=False)
class AmplitudeVector:
    """Real Fock amplitudes of a pure probe (alpha taken real nonnegative)."""

    amps: np.ndarray
    n_max: int
    tail_bound: float
    params: DeformationParams
    spec: ProbeSpec


def _coherent_logw(spec: CoherentSpec, params: DeformationParams) -> Callable[[int], np.ndarray]:
    lx = math.log(spec.alpha_sq)

    def logw(n_max: int) -> np.ndarray:
        n = np.arange(n_max + 1, dtype=float)
        return n * lx - log_delta_values(params, n_max)

    return logw


def _thermal_logw(spec: ThermalSpec, params: DeformationParams) -> Callable[[int], np.ndarray]:
    beta = spec.beta

    def logw(n_max: int) -> np.ndarray:
        g = gamma_values(params, n_max + 1)
        return -(beta / 2.0) * (g[1:] + g[:-1] - 1.0)

    return logw


def _cat_logw(spec: CatSpec, params: DeformationParams) -> Callable[[int], np.ndarray]:
    base = _coherent_logw(CoherentSpec(spec.alpha_sq), params)

    def logw(n_max: int) -> np.ndarray:
        lw = base(n_max)
        lw[1::2] = -np.inf
        return lw

    return logw


def _initial_n_max(n0: float) -> int:
    return int(max(16, math.ceil(8.0 * (n0 + math.sqrt(n0)))))


def _certify(lnw_sup: np.ndarray) -> Tuple[float, float]:
    """Certified log tail bound beyond the last retained support weight.

    Returns (ln_tail_upper_bound, boundary_log_ratio).  Requires the
    successive log-ratios to be non-increasing (up to slack) and the
    boundary ratio to be < 1; raises DivergenceError otherwise.
    """
    diffs = np.diff(lnw_sup)
    if diffs.size == 0:
        raise DivergenceError("support too small to certify truncation")
    if np.any(diffs[1:] > diffs[:-1] + _RATIO_SLACK):
        raise DivergenceError(
            "weight ratios are not non-increasing; geometric tail bound invalid"
        )
    r_log = float(diffs[-1]) + _RATIO_SLACK
    if r_log >= 0.0:
        raise DivergenceError("boundary weight ratio has not fallen below 1")
    # tail <= w_last * r / (1 - r)
    ln_tail = float(lnw_sup[-1]) + r_log - math.log1p(-math.exp(r_log))
    return ln_tail, r_log


def _build(
    logw_fn: Callable[[int], np.ndarray],
    params: DeformationParams,
    spec: ProbeSpec,
    tol: float,
    n0: float,
    step: int,
) -> PhotonDistribution:
    if not (0.0 < tol <= 1e-6):
        raise DomainError(f"tol must lie in (0, 1e-6], got {tol}")
    n_max = _initial_n_max(n0)
    while True:
        n_max = min(n_max + n_max % step, HARD_CAP)  # even support needs even n_max
        lnw = logw_fn(n_max)
        support = np.arange(0, n_max + 1, step)
        lnw_sup = lnw[support]
        peak = float(np.max(lnw_sup))
        # Trim underflowed tail entries before ratio analysis.
        keep = np.nonzero(lnw_sup > peak - _UNDERFLOW_LOG)[0]
        last = int(keep[-1])
        trimmed = lnw_sup[: last + 1]
        try:
            ln_tail, _ = _certify(trimmed)
        except DivergenceError:
            if n_max >= HARD_CAP:
                raise DivergenceError(
                    f"state sum not certifiably convergent within n_max = {HARD_CAP} "
                    f"({type(spec).__name__}, kind={params.kind.value}, "
                    f"epsilon={params.epsilon})"
                ) from None
            n_max = min(2 * n_max, HARD_CAP)
            continue
        ln_total = float(np.logaddexp(logsumexp(trimmed), ln_tail))
        if math.exp(ln_tail - ln_total) <= tol:
            return _finalize(lnw, support[: last + 1], trimmed, ln_tail, ln_total,
                             tol, params, spec)
        if n_max >= HARD_CAP:
            raise DivergenceError(
                f"tail tolerance {tol} not reached at hard cap n_max = {HARD_CAP} "
                f"({type(spec).__name__}, kind={params.kind.value}, epsilon={params.epsilon})"
            )
        n_max = min(2 * n_max, HARD_CAP)


def _finalize(
    lnw: np.ndarray,
    support: np.ndarray,
    lnw_sup: np.ndarray,
    ln_tail: float,
    ln_total: float,
    tol: float,
    params: DeformationParams,
    spec: ProbeSpec,
) -> PhotonDistribution:
    """Trim the certified support down to the smallest n_max meeting tol."""
    # suffix[i] = log sum of support weights strictly after position i, plus
    # the certified beyond-support tail.
    rev_acc = np.logaddexp.accumulate(np.append(ln_tail, lnw_sup[::-1]))[::-1]
    suffix = rev_acc[1:]  # position i -> mass after i (including ln_tail)
    ok = np.nonzero(np.exp(suffix - ln_total) <= tol)[0]
    cut = int(ok[0]) if ok.size else len(lnw_sup) - 1
    n_max = int(support[cut])
    ln_tail_cut = float(suffix[cut])
    tail_bound = float(math.exp(ln_tail_cut - ln_total))

    log_probs = lnw[: n_max + 1] - ln_total
    with np.errstate(under="ignore"):
        probs = np.exp(log_probs)
    probs[~np.isfinite(log_probs)] = 0.0
    return PhotonDistribution(
        probs=probs,
        log_probs=log_probs,
        n_max=n_max,
        tail_bound=tail_bound,
        params=params,
        spec=spec,
    )


def _check_normalizable(spec: ProbeSpec, params: DeformationParams) -> None:
    """Reject configurations whose state sum provably diverges.

    M deformation with epsilon < 0 bounds the q-numbers by 1/|epsilon|, so
    thermal weights approach a positive constant (divergent partition
    function) and coherent weights decay geometrically with limit ratio
    |alpha|^2 |epsilon| (divergent once that reaches 1).
    """
    eps = params.epsilon
    if params.kind is not DeformationKind.M or eps >= 0.0:
        return
    if isinstance(spec, ThermalSpec):
        raise DivergenceError(
            "M-deformed thermal state is non-normalizable for epsilon < 0: "
            "the level spectrum saturates at 1/|epsilon|"
        )
    if spec.alpha_sq * (-eps) >= 1.0 - 1e-12:
        raise DivergenceError(
            "M-deformed coherent weights diverge: |alpha|^2 |epsilon| >= 1"
        )


def coherent_distribution(
    spec: CoherentSpec,
    params: DeformationParams,
    tol: float = DEFAULT_TOL,
) -> Tuple[PhotonDistribution, AmplitudeVector]:
    """Photon distribution and real amplitudes of a deformed coherent state."""
    _check_normalizable(spec, params)
    dist = _build(_coherent_logw(spec, params), params, spec, tol, spec.alpha_sq, step=1)
    amps = AmplitudeVector(
        amps=np.sqrt(dist.probs),
        n_max=dist.n_max,
        tail_bound=dist.tail_bound,
        params=params,
        spec=spec,
    )
    return dist, amps


def thermal_distribution(
    spec: ThermalSpec,
    params: DeformationParams,
    tol: float = DEFAULT_TOL,
) -> PhotonDistribution:
    """Photon distribution of a deformed thermal state."""
    _check_normalizable(spec, params)
    return _build(_thermal_logw(spec, params), params, spec, tol, spec.n_mean, step=1)


def cat_distribution(
    spec: CatSpec,
    params: DeformationParams,
    tol: float = DEFAULT_TOL,
) -> Tuple[PhotonDistribution, AmplitudeVector]:
    """Photon distribution and amplitudes of an even deformed cat state.

    Odd Fock entries vanish identically; even amplitudes are
    2 psi_n / sqrt(W) with W the superposition normalization.
    """
    _check_normalizable(CoherentSpec(spec.alpha_sq), params)
    n0 = spec.alpha_sq * math.tanh(spec.alpha_sq)
    dist = _build(_cat_logw(spec, params), params, spec, tol, n0, step=2)
    _crosscheck_cat_norm(spec, params, dist)
    amps = AmplitudeVector(
        amps=np.sqrt(dist.probs),
        n_max=dist.n_max,
        tail_bound=dist.tail_bound,
        params=params,
        spec=spec,
    )
    return dist, amps


def cat_normalization_crosscheck(
    spec: CatSpec,
    params: DeformationParams,
    tol: float = DEFAULT_TOL,
) -> Tuple[float, float]:
    """The cat normalization W computed two ways (they must agree).

    Returns (from the alternating-sum formula 2[1 + C(-x)/C(x)],
    from direct even-term summation 4 S_even / C(x)).
    """
    lw = _coherent_logw(CoherentSpec(spec.alpha_sq), params)
    dist, _ = coherent_distribution(CoherentSpec(spec.alpha_sq), params, tol)
    lnw = lw(dist.n_max)
    m = float(np.max(lnw))
    w = np.exp(lnw - m)
    c_plus = float(np.sum(w))
    s_even = float(np.sum(w[0::2]))
    s_odd = float(np.sum(w[1::2]))
    c_minus = s_even - s_odd
    w_formula = 2.0 * (1.0 + c_minus / c_plus)
    w_direct = 4.0 * s_even / c_plus
    return w_formula, w_direct


def _crosscheck_cat_norm(spec: CatSpec, params: DeformationParams,
                         dist: PhotonDistribution) -> None:
    wf, wd = cat_normalization_crosscheck(spec, params)
    if abs(wf - wd) > 1e-10 * max(abs(wf), abs(wd)):
        raise DivergenceError(
            f"cat normalization cross-check failed: {wf} vs {wd}"
        )


def build_distribution(
    spec: ProbeSpec,
    params: DeformationParams,
    tol: float = DEFAULT_TOL,
) -> PhotonDistribution:
    """Family-dispatching constructor returning the photon distribution."""
    if isinstance(spec, CoherentSpec):
        return coherent_distribution(spec, params, tol)[0]
    if isinstance(spec, ThermalSpec):
        return thermal_distribution(spec, params, tol)
    if isinstance(spec, CatSpec):
        return cat_distribution(spec, params, tol)[0]
    raise DomainError(f"unknown probe spec {spec!r}")


def mean_photon(dist: PhotonDistribution) -> float:
    """Mean photon number sum_n n p_n of a truncated distribution.

    Truncation contributes an error of at most n_max * tail_bound.
    """
    n = np.arange(dist.n_max + 1, dtype=float)
    return float(n @ dist.probs)


def mean_photon_expansion(
    spec: ProbeSpec,
    params: DeformationParams,
    regime: str = "large",
) -> float:
    """Leading-order mean-photon prediction for comparison with the exact value.

    Coherent states have a single first-order formula; thermal and cat
    probes expose their large- and small-intensity asymptotic branches via
    `regime` ("large" or "small").
    """
    if regime not in ("large", "small"):
        raise DomainError(f"regime must be 'large' or 'small', got {regime!r}")
    eps = params.epsilon
    is_m = params.kind is DeformationKind.M
    if isinstance(spec, CoherentSpec):
        x = spec.alpha_sq
        if is_m:
            return x - 0.5 * eps * x * x
        return x - 0.5 * eps * eps * (x * x + x**3 / 3.0)
    if isinstance(spec, ThermalSpec):
        n_t = spec.n_mean
        if is_m:
            if regime == "large":
                return n_t - eps * (2.0 * n_t * n_t + 1.5 * n_t - 1.0 / 12.0)
            return n_t + 0.5 * eps * n_t * math.log(n_t)
        if regime == "large":
            return n_t - eps * eps * n_t * (3.0 * n_t * n_t + 4.5 * n_t + 1.5)
        return n_t + 0.5 * eps * eps * n_t * math.log(n_t)
    if isinstance(spec, CatSpec):
        n_c = spec.alpha_sq * math.tanh(spec.alpha_sq)
        order = eps if is_m else eps * eps
        if regime == "large":
            return n_c - 0.5 * order * n_c * n_c
        return n_c - 0.5 * order * n_c
    raise DomainError(f"unknown probe spec {spec!r}")


def extend_truncation(dist: PhotonDistribution, new_tol: float) -> PhotonDistribution:
    """Recompute a distribution at a tighter tail tolerance (larger n_max)."""
    if not (0.0 < new_tol < dist.tail_bound):
        raise DomainError(
            f"new_tol must lie in (0, tail_bound={dist.tail_bound}), got {new_tol}"
        )
    return build_distribution(dist.spec, dist.params, new_tol)


def fixed_support_log_probs(
    spec: ProbeSpec,
    params: DeformationParams,
    n_support: int,
) -> np.ndarray:
    """ln p_n for n = 0..n_support, normalized over exactly that support.

    Plumbing for likelihood evaluation and finite-difference stencils,
    where several nearby states must share one outcome support.  The
    caller is responsible for sizing n_support so the omitted mass is
    negligible (e.g. from an adaptive build at the slowest-decaying
    parameter point).
    """
    if n_support < 0:
        raise DomainError("n_support must be >= 0")
    _check_normalizable(
        CoherentSpec(spec.alpha_sq) if isinstance(spec, CatSpec) else spec, params
    )
    if isinstance(spec, CoherentSpec):
        lnw = _coherent_logw(spec, params)(n_support)
    elif isinstance(spec, ThermalSpec):
        lnw = _thermal_logw(spec, params)(n_support)
    elif isinstance(spec, CatSpec):
        lnw = _cat_logw(spec, params)(n_support)
    else:
        raise DomainError(f"unknown probe spec {spec!r}")
    finite = lnw[np.isfinite(lnw)]
    return lnw - float(logsumexp(finite))
