"""Fisher information, QFI and QSNR for deformation-strength estimation.

For every probe family the photon-counting statistics are an explicit
function of epsilon, so the classical Fisher information of the intensity
measurement is

    F(eps) = sum_n (d p_n / d eps)^2 / p_n = Var_p[score],

with the score d ln p_n / d eps assembled from analytic derivatives of the
log-weights; the normalization derivative enters through centering, which
makes sum_n dp_n = 0 an exact identity (checked at run time).  Because the
Fock basis is unaffected by the deformation, the QFI of these families
equals F: for pure real-amplitude probes H = 4 sum_n (d psi_n)^2, and for
Fock-diagonal mixtures H reduces to the same diagonal sum.

Two parametrizations of the epsilon-family are exposed via `hold`:

  "mean_photon" (default): the intensity parameter (|alpha|^2 or beta) is
      re-solved along the family so the state's mean photon number stays
      fixed.  This is the energy-calibrated scenario behind the
      leading-order QSNR table (Q ~ eps^2 N^2 / 8 etc.); the projection
      is Var[d - lambda t] with lambda = Cov[n,d]/Cov[n,t].
  "intensity": the raw parameter is held fixed.  This is the family a
      maximum-likelihood search over epsilon at known intensity actually
      explores, hence what the Cramer-Rao benchmark must use.

Finite differences (central, with a step-halving Richardson pair) are kept
as a validation path for the analytic derivatives.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .algebra import DeformationKind, DeformationParams, dgamma_values, dlog_delta_values, gamma_values
from .errors import DerivativeInstabilityError, DomainError
from .states import (
    CatSpec,
    CoherentSpec,
    PhotonDistribution,
    ProbeSpec,
    ThermalSpec,
    build_distribution,
    fixed_support_log_probs,
    mean_photon,
)

__all__ = [
    "DerivativeConfig",
    "EstimationReport",
    "classical_fisher",
    "qfi_pure",
    "qfi_diagonal",
    "qsnr",
    "measurements_needed",
    "leading_order_qsnr",
    "estimation_report",
    "calibrate_intensity",
]

PROB_FLOOR = 1e-30

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DerivativeConfig:
    """How epsilon-derivatives are evaluated.

    method "analytic" uses closed-form log-weight derivatives; "fd" uses
    central finite differences at `step` (default max(1e-7, 1e-3 |eps|)),
    returning the Richardson extrapolant of the step and half-step values
    and raising DerivativeInstabilityError when the pair disagrees by more
    than richardson_rtol in relative terms.
    """

    method: str = "analytic"
    step: Optional[float] = None
    richardson_rtol: float = 1e-4
    prob_floor: float = PROB_FLOOR

    def __post_init__(self) -> None:
        if self.method not in ("analytic", "fd"):
            raise DomainError(f"method must be 'analytic' or 'fd', got {self.method!r}")

    def step_for(self, epsilon: float) -> float:
        if self.step is not None:
            return self.step
        return max(1e-7, 1e-3 * abs(epsilon))


@dataclass(frozen=True)
class EstimationReport:
    """Information quantities of one (probe, kind, epsilon) configuration.

    m_delta_coeff is the coefficient of 1/delta^2 in the measurement
    budget: M_delta = m_delta_coeff / delta^2 (infinite when qsnr = 0).
    """

    spec: ProbeSpec
    kind: DeformationKind
    epsilon: float
    fisher: float
    qfi: float
    qsnr: float
    mean_photon: float
    m_delta_coeff: float


def _raw_scores(dist: PhotonDistribution) -> Tuple[np.ndarray, np.ndarray]:
    """(d ln w_n / d eps, d ln w_n / d theta) on the distribution support."""
    spec, params, n_max = dist.spec, dist.params, dist.n_max
    n = np.arange(n_max + 1, dtype=float)
    if isinstance(spec, (CoherentSpec, CatSpec)):
        d = -dlog_delta_values(params, n_max)
        t = n / spec.alpha_sq
        return d, t
    if isinstance(spec, ThermalSpec):
        g = gamma_values(params, n_max + 1)
        dg = dgamma_values(params, n_max + 1)
        with np.errstate(invalid="ignore"):
            d = -(spec.beta / 2.0) * (dg[1:] + dg[:-1])
            t = -(g[1:] + g[:-1] - 1.0) / 2.0
        return d, t
    raise DomainError(f"unknown probe spec {spec!r}")


def _masked(dist: PhotonDistribution, floor: float):
    p = dist.probs
    mask = p > floor
    pm = p[mask]
    pm = pm / pm.sum()
    n = np.arange(dist.n_max + 1, dtype=float)[mask]
    return mask, pm, n


def _score_variance(pm: np.ndarray, s: np.ndarray) -> float:
    sc = s - float(pm @ s)
    # dp_n = p_n * sc_n must sum to zero identically; guard the assembly.
    resid = abs(float(pm @ sc))
    scale = float(pm @ np.abs(sc))
    if resid > 1e-10 * max(1.0, scale):
        raise RuntimeError(f"normalization-derivative identity violated: {resid}")
    return float(pm @ (sc * sc))


def _report_dropped(dist: PhotonDistribution, d: np.ndarray, mask: np.ndarray,
                    floor: float) -> None:
    """Bound the Fisher contribution of sub-floor terms (debug report)."""
    dropped = (~mask) & (dist.probs > 0.0) & np.isfinite(d)
    if not (np.any(dropped) or dist.tail_bound > 0.0):
        return
    if logger.isEnabledFor(logging.DEBUG):
        center = float(dist.probs[mask] @ d[mask]) / float(dist.probs[mask].sum())
        bound = float(dist.probs[dropped] @ (d[dropped] - center) ** 2)
        logger.debug(
            "Fisher sum dropped %d terms below %.1e: bounded contribution "
            "%.3e, plus certified tail mass %.3e",
            int(dropped.sum()), floor, bound, dist.tail_bound,
        )


def _analytic_score(dist: PhotonDistribution, hold: str, floor: float):
    """Centered epsilon-score on the masked support, per the hold convention."""
    d, t = _raw_scores(dist)
    mask, pm, n = _masked(dist, floor)
    _report_dropped(dist, d, mask, floor)
    dm, tm = d[mask], t[mask]
    if hold == "intensity":
        return pm, dm
    if hold != "mean_photon":
        raise DomainError(f"hold must be 'mean_photon' or 'intensity', got {hold!r}")
    nc = n - float(pm @ n)
    dc = dm - float(pm @ dm)
    tc = tm - float(pm @ tm)
    cov_nd = float(pm @ (nc * dc))
    cov_nt = float(pm @ (nc * tc))
    if abs(cov_nt) < 1e-290:
        # Frozen family (e.g. near-vacuum): no intensity response to cancel.
        return pm, dm
    lam = cov_nd / cov_nt
    return pm, dm - lam * tm


def calibrate_intensity(
    spec: ProbeSpec,
    params: DeformationParams,
    mean_target: float,
    tol: float = 1e-12,
    rtol: float = 1e-12,
    max_iter: int = 60,
) -> ProbeSpec:
    """Re-solve the intensity parameter so the deformed mean photon number
    equals mean_target (Newton iteration on |alpha|^2 or beta)."""
    if not (math.isfinite(mean_target) and mean_target > 0):
        raise DomainError(f"mean_target must be positive, got {mean_target}")
    current = spec
    for _ in range(max_iter):
        dist = build_distribution(current, params, tol)
        mean = mean_photon(dist)
        if abs(mean - mean_target) <= rtol * max(1.0, mean_target):
            return current
        _, t = _raw_scores(dist)
        mask, pm, n = _masked(dist, PROB_FLOOR)
        tc = t[mask] - float(pm @ t[mask])
        dmean = float(pm @ ((n - float(pm @ n)) * tc))
        if dmean == 0.0:
            raise RuntimeError("intensity calibration stalled: flat mean response")
        if isinstance(current, (CoherentSpec, CatSpec)):
            new = current.alpha_sq - (mean - mean_target) / dmean
            if new <= 0:
                new = current.alpha_sq / 2.0
            current = replace(current, alpha_sq=new)
        else:
            new = current.beta - (mean - mean_target) / dmean
            if new <= 0:
                new = current.beta / 2.0
            current = replace(current, beta=new)
    raise RuntimeError(f"intensity calibration did not converge for target {mean_target}")


def _fd_probs(
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    h: float,
    tol: float,
    hold: str,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Probabilities at eps and the four-point stencil, on a common support."""
    center = build_distribution(spec, DeformationParams(kind, epsilon), tol)
    target = mean_photon(center)
    stencil = [epsilon - h, epsilon - h / 2, epsilon + h / 2, epsilon + h]
    specs = []
    n_support = center.n_max
    for e in stencil:
        pe = DeformationParams(kind, e)
        se = calibrate_intensity(spec, pe, target, tol) if hold == "mean_photon" else spec
        specs.append(se)
        n_support = max(n_support, build_distribution(se, pe, tol).n_max)
    cols = [np.exp(fixed_support_log_probs(spec, DeformationParams(kind, epsilon), n_support))]
    for e, se in zip(stencil, specs):
        cols.append(np.exp(fixed_support_log_probs(se, DeformationParams(kind, e), n_support)))
    pc, pm1, pm2, pp2, pp1 = cols
    return pc, pm1, pm2, pp2, pp1


def _fd_fisher(spec, kind, epsilon, cfg, tol, hold) -> float:
    h = cfg.step_for(epsilon)
    pc, pm1, pm2, pp2, pp1 = _fd_probs(spec, kind, epsilon, h, tol, hold)
    mask = pc > cfg.prob_floor
    def fi(plus, minus, step):
        dp = (plus[mask] - minus[mask]) / (2.0 * step)
        return float(np.sum(dp * dp / pc[mask]))
    f_h = fi(pp1, pm1, h)
    f_h2 = fi(pp2, pm2, h / 2)
    f_rich = (4.0 * f_h2 - f_h) / 3.0
    if abs(f_h - f_h2) > cfg.richardson_rtol * max(abs(f_rich), 1e-300):
        raise DerivativeInstabilityError(
            f"finite-difference Fisher estimates disagree: {f_h} vs {f_h2} at step {h}"
        )
    return f_rich


def _fd_qfi_pure(spec, kind, epsilon, cfg, tol, hold) -> float:
    h = cfg.step_for(epsilon)
    pc, pm1, pm2, pp2, pp1 = _fd_probs(spec, kind, epsilon, h, tol, hold)
    mask = pc > cfg.prob_floor
    def qfi_at(plus, minus, step):
        dpsi = (np.sqrt(plus[mask]) - np.sqrt(minus[mask])) / (2.0 * step)
        return 4.0 * float(np.sum(dpsi * dpsi))
    f_h = qfi_at(pp1, pm1, h)
    f_h2 = qfi_at(pp2, pm2, h / 2)
    f_rich = (4.0 * f_h2 - f_h) / 3.0
    if abs(f_h - f_h2) > cfg.richardson_rtol * max(abs(f_rich), 1e-300):
        raise DerivativeInstabilityError(
            f"finite-difference QFI estimates disagree: {f_h} vs {f_h2} at step {h}"
        )
    return f_rich


def classical_fisher(
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    deriv: Optional[DerivativeConfig] = None,
    tol: float = 1e-12,
    hold: str = "mean_photon",
) -> float:
    """Classical Fisher information of photon counting for estimating epsilon."""
    cfg = deriv or DerivativeConfig()
    if cfg.method == "fd":
        return _fd_fisher(spec, kind, epsilon, cfg, tol, hold)
    dist = build_distribution(spec, DeformationParams(kind, epsilon), tol)
    pm, s = _analytic_score(dist, hold, cfg.prob_floor)
    return _score_variance(pm, s)


def qfi_pure(
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    deriv: Optional[DerivativeConfig] = None,
    tol: float = 1e-12,
    hold: str = "mean_photon",
) -> float:
    """QFI of a pure real-amplitude probe (coherent or cat): 4 sum (d psi_n)^2."""
    if not isinstance(spec, (CoherentSpec, CatSpec)):
        raise DomainError("qfi_pure applies to pure probes (coherent, cat)")
    cfg = deriv or DerivativeConfig()
    if cfg.method == "fd":
        return _fd_qfi_pure(spec, kind, epsilon, cfg, tol, hold)
    dist = build_distribution(spec, DeformationParams(kind, epsilon), tol)
    pm, s = _analytic_score(dist, hold, cfg.prob_floor)
    sc = s - float(pm @ s)
    dpsi = 0.5 * np.sqrt(pm) * sc  # d psi = psi * (d ln p)/2 for real psi
    return 4.0 * float(np.sum(dpsi * dpsi))


def qfi_diagonal(
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    deriv: Optional[DerivativeConfig] = None,
    tol: float = 1e-12,
    hold: str = "mean_photon",
) -> float:
    """QFI of a Fock-diagonal probe (thermal): the off-diagonal sector drops
    because Fock states do not move with epsilon, leaving the classical sum."""
    if not isinstance(spec, ThermalSpec):
        raise DomainError("qfi_diagonal applies to Fock-diagonal probes (thermal)")
    return classical_fisher(spec, kind, epsilon, deriv, tol, hold)


def qsnr(epsilon: float, qfi: float) -> float:
    """Quantum signal-to-noise ratio eps^2 H(eps)."""
    if qfi < 0:
        raise DomainError(f"qfi must be >= 0, got {qfi}")
    return epsilon * epsilon * qfi


def measurements_needed(delta: float, qsnr_value: float) -> float:
    """Measurements for a 3-sigma confidence interval at relative error delta:
    9 / (delta^2 Q); infinite when the QSNR vanishes."""
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    if qsnr_value < 0:
        raise DomainError(f"qsnr must be >= 0, got {qsnr_value}")
    if qsnr_value == 0.0:
        return math.inf
    return 9.0 / (delta * delta * qsnr_value)


_LEADING = {
    (DeformationKind.M, "coherent"): (0.125, 2),
    (DeformationKind.M, "superposition"): (0.125, 2),
    (DeformationKind.M, "thermal"): (1.0, 2),
    (DeformationKind.P, "coherent"): (2.0 / 9.0, 4),
    (DeformationKind.P, "superposition"): (2.0 / 9.0, 4),
    (DeformationKind.P, "thermal"): (40.0, 4),
}


def leading_order_qsnr(
    family_class: str,
    kind: DeformationKind,
    epsilon: float,
    n_mean: float,
) -> float:
    """Pinned leading-order QSNR table: c (eps N)^2 for M, c (eps N)^4 for P."""
    try:
        const, power = _LEADING[(kind, family_class)]
    except KeyError:
        raise DomainError(
            f"family_class must be coherent/superposition/thermal, got {family_class!r}"
        ) from None
    return const * (epsilon * n_mean) ** power


def family_class_of(spec: ProbeSpec) -> str:
    if isinstance(spec, CoherentSpec):
        return "coherent"
    if isinstance(spec, CatSpec):
        return "superposition"
    return "thermal"


def estimation_report(
    spec: ProbeSpec,
    kind: DeformationKind,
    epsilon: float,
    deriv: Optional[DerivativeConfig] = None,
    tol: float = 1e-12,
    hold: str = "mean_photon",
) -> EstimationReport:
    """Assemble Fisher information, QFI, QSNR, mean photon and M_delta."""
    fisher = classical_fisher(spec, kind, epsilon, deriv, tol, hold)
    if isinstance(spec, ThermalSpec):
        qfi = qfi_diagonal(spec, kind, epsilon, deriv, tol, hold)
    else:
        qfi = qfi_pure(spec, kind, epsilon, deriv, tol, hold)
    if fisher > qfi * (1.0 + 1e-8) + 1e-300:
        raise RuntimeError(f"classical F = {fisher} exceeds QFI = {qfi}")
    q = qsnr(epsilon, qfi)
    dist = build_distribution(spec, DeformationParams(kind, epsilon), tol)
    return EstimationReport(
        spec=spec,
        kind=kind,
        epsilon=epsilon,
        fisher=fisher,
        qfi=qfi,
        qsnr=q,
        mean_photon=mean_photon(dist),
        m_delta_coeff=math.inf if q == 0.0 else 9.0 / q,
    )
