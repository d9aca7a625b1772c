"""q-number algebra for the M and P boson deformations.

Two deformations of the oscillator algebra are supported, both written in
terms of q = 1 + epsilon:

  M:  a a+ - q a+ a = 1        basic q-number      [n] = (q^n - 1)/(q - 1)
  P:  a a+ - q a+ a = q^-N     symmetric q-number  [n] = (q^n - q^-n)/(q - q^-1)

Everything downstream (coherent-state weights, thermal Boltzmann factors)
is built from the per-level factors [n], their running log-product
Delta_n = [1][2]...[n] (the deformed factorial), and the level coefficients
gamma_n, which for both deformations coincide with [n].

Numerical strategy: all products are carried in the log domain (Delta_n
grows super-factorially and overflows float64 near n ~ 170 even at
epsilon = 0), and every removable singularity at epsilon = 0 is evaluated
through expm1/log1p so no small-epsilon switchover is needed; epsilon = 0
itself is special-cased to the undeformed limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

__all__ = [
    "DeformationKind",
    "DeformationParams",
    "q_number",
    "log_delta",
    "g_product",
    "delta_series",
    "gamma_coefficient",
    "log_q_number_values",
    "log_delta_values",
    "dlog_q_number_values",
    "dlog_delta_values",
    "gamma_values",
    "dgamma_values",
]


class DeformationKind(Enum):
    """Which deformed commutation relation governs the coefficient formulas."""

    M = "M"
    P = "P"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class DeformationParams:
    """Deformation kind plus strength epsilon, with q = 1 + epsilon > 0."""

    kind: DeformationKind
    epsilon: float

    def __post_init__(self) -> None:
        if not isinstance(self.kind, DeformationKind):
            raise DomainError(f"kind must be a DeformationKind, got {self.kind!r}")
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps <= -1.0:
            raise DomainError(f"epsilon must be finite and > -1, got {self.epsilon}")
        object.__setattr__(self, "epsilon", eps)


def _log_expm1(x: np.ndarray) -> np.ndarray:
    """ln(e^x - 1) for x > 0, stable for both tiny and huge arguments."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x > 33.0
    out[big] = x[big] + np.log1p(-np.exp(-x[big]))
    with np.errstate(divide="ignore"):
        out[~big] = np.log(np.expm1(x[~big]))
    return out


def log_q_number_values(params: DeformationParams, n_max: int) -> np.ndarray:
    """ln [j] for j = 0..n_max (index 0 holds -inf since [0] = 0)."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    eps = params.epsilon
    j = np.arange(1, n_max + 1, dtype=float)
    out = np.full(n_max + 1, -np.inf)
    if n_max == 0:
        return out
    if eps == 0.0:
        out[1:] = np.log(j)
        return out
    L = math.log1p(eps)
    if params.kind is DeformationKind.M:
        u = j * L
        if eps > 0.0:
            out[1:] = _log_expm1(u) - math.log(eps)
        else:
            out[1:] = np.log(-np.expm1(u)) - math.log(-eps)
    else:
        v = 2.0 * j * L
        lead = (1.0 - j) * L
        den = eps * (2.0 + eps)
        if eps > 0.0:
            out[1:] = lead + _log_expm1(v) - math.log(den)
        else:
            out[1:] = lead + np.log(-np.expm1(v)) - math.log(-den)
    return out


def log_delta_values(params: DeformationParams, n_max: int) -> np.ndarray:
    """ln Delta_n = sum_{j<=n} ln [j] for n = 0..n_max (Delta_0 = 1)."""
    lq = log_q_number_values(params, n_max)
    out = np.zeros(n_max + 1)
    if n_max >= 1:
        out[1:] = np.cumsum(lq[1:])
    return out


def dlog_q_number_values(params: DeformationParams, n_max: int) -> np.ndarray:
    """d/d epsilon of ln [j] for j = 0..n_max (index 0 is unused, set to 0).

    Closed forms; at epsilon = 0 the removable-limit values are used:
    (j-1)/2 for M and 0 for P (the P expansion starts at second order).
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    eps = params.epsilon
    j = np.arange(1, n_max + 1, dtype=float)
    out = np.zeros(n_max + 1)
    if n_max == 0:
        return out
    if params.kind is DeformationKind.M:
        if eps == 0.0:
            out[1:] = (j - 1.0) / 2.0
        else:
            u = j * math.log1p(eps)
            out[1:] = j / ((1.0 + eps) * (-np.expm1(-u))) - 1.0 / eps
    else:
        if eps == 0.0:
            out[1:] = 0.0
        else:
            v = 2.0 * j * math.log1p(eps)
            out[1:] = (
                (1.0 - j) / (1.0 + eps)
                + 2.0 * j / ((1.0 + eps) * (-np.expm1(-v)))
                - 2.0 * (1.0 + eps) / (eps * (2.0 + eps))
            )
    return out


def dlog_delta_values(params: DeformationParams, n_max: int) -> np.ndarray:
    """d/d epsilon of ln Delta_n for n = 0..n_max."""
    dq = dlog_q_number_values(params, n_max)
    out = np.zeros(n_max + 1)
    if n_max >= 1:
        out[1:] = np.cumsum(dq[1:])
    return out


def gamma_values(params: DeformationParams, n_max: int) -> np.ndarray:
    """Level coefficients gamma_n = [n] for n = 0..n_max, linear domain.

    Entries overflow to +inf once [n] exceeds float range; callers that
    exponentiate -beta*gamma treat those levels as zero-weight.
    """
    with np.errstate(over="ignore"):
        g = np.exp(log_q_number_values(params, n_max))
    g[0] = 0.0
    return g


def dgamma_values(params: DeformationParams, n_max: int) -> np.ndarray:
    """d/d epsilon of gamma_n for n = 0..n_max (gamma_0 = 0 identically)."""
    with np.errstate(invalid="ignore"):
        dg = gamma_values(params, n_max) * dlog_q_number_values(params, n_max)
    dg[0] = 0.0
    return dg


def q_number(params: DeformationParams, n: int) -> float:
    """The q-number [n] for the given deformation; [0] = 0, [1] = 1.

    At epsilon = 0 the undeformed limit [n] = n is returned exactly.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 0.0
    eps = params.epsilon
    if eps == 0.0:
        return float(n)
    L = math.log1p(eps)
    if params.kind is DeformationKind.M:
        return math.expm1(n * L) / eps
    return math.exp((1.0 - n) * L) * math.expm1(2.0 * n * L) / (eps * (2.0 + eps))


def log_delta(params: DeformationParams, n: int) -> float:
    """ln Delta_n, the log of the deformed factorial; log_delta(., 0) = 0."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return float(log_delta_values(params, n)[n])


def g_product(a: float, b: float, n: int) -> float:
    """The finite product prod_{k=0}^{n-1} (1 - a b^k); empty product is 1.

    Kept as a cross-check oracle only: near epsilon = 0 this form loses
    digits to cancellation, so the production path never uses it.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    out = 1.0
    term = float(a)
    for _ in range(n):
        out *= 1.0 - term
        term *= b
    return out


def delta_series(params: DeformationParams, n: int) -> float:
    """First-nonvanishing-order expansion of Delta_n around epsilon = 0.

    M: n! (1 + eps n(n-1)/4);  P: n! (1 + eps^2 n(n-1)(2n+5)/36).
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    eps = params.epsilon
    fact = math.exp(math.lgamma(n + 1))
    if params.kind is DeformationKind.M:
        return fact * (1.0 + 0.25 * eps * n * (n - 1))
    return fact * (1.0 + eps * eps * n * (n - 1) * (2 * n + 5) / 36.0)


def gamma_coefficient(params: DeformationParams, n: int, series: bool = False) -> float:
    """Level coefficient gamma_n; equals the q-number [n] for both kinds.

    With series=True the leading small-epsilon truncation is returned
    instead: n + eps n(n-1)/2 for M, n + eps^2 n(n^2-1)/6 for P.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if series:
        eps = params.epsilon
        if params.kind is DeformationKind.M:
            return n + 0.5 * eps * n * (n - 1)
        return n + eps * eps * n * (n * n - 1) / 6.0
    return q_number(params, n)
