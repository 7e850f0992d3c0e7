"""Analytic coverage probability for non-coherent joint transmission.

The SIR tail is evaluated by combining a moment-matched Gamma approximation
of the interference with the exact Laplace transform of the useful signal
power.  Writing the Gamma shape as ``nu`` and scale as ``theta``, rounding
``nu`` down/up yields an upper/lower bound on coverage expressed through the
first ``ceil(nu) - 1`` derivatives of the signal's Laplace transform at
``u = 1 / (theta * beta)``; those derivatives come from a complete-Bell
recursion over the log-transform derivatives, which are available in closed
form up to a fading expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from . import fading as fading_mod
from .config import NetworkConfig, TierParams, expected_cluster_size
from .errors import OrderError
from .interference import fit_gamma
from .quadrature import adaptive_gauss_kronrod
from .special import (
    MAX_ORDER,
    BellAccumulator,
    falling_factorial_faa_di_bruno,
    upper_inc_gamma,
    BINOMIAL,
)

#: Relative distance below which the Gamma shape is treated as an integer,
#: collapsing the two bounds into one exact expression.
INTEGER_SNAP = 1e-9

#: Coverage level below which the spectral-efficiency integrand is truncated.
_RATE_TRUNCATION = 1e-6


@dataclass(frozen=True)
class CoverageQuery:
    """A coverage evaluation point: network plus linear SIR threshold."""

    network: NetworkConfig
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be a positive finite number, got {self.beta}")


@dataclass(frozen=True)
class CoverageBounds:
    """Sandwich bounds and their weighted interpolation for one query.

    ``gap == upper - lower`` equals the magnitude of the last retained series
    term; ``linear`` interpolates the bounds by the fractional part of the
    Gamma shape.
    """

    lower: float
    upper: float
    linear: float
    gap: float


@lru_cache(maxsize=256)
def _gamma_fit(network: NetworkConfig):
    return fit_gamma(network)


def _signal_bound(tier: TierParams, g: np.ndarray) -> np.ndarray:
    """Received-power floor for an active station: ``max(delta, T/g)``."""
    return np.maximum(tier.cluster_thresh, tier.activation_thresh / np.maximum(g, 1e-300))


def _signal_kinks(tier: TierParams) -> tuple[float, ...]:
    if tier.activation_thresh > 0:
        return (tier.activation_thresh / tier.cluster_thresh,)
    return ()


def log_laplace_signal(tier: TierParams, u: float) -> float:
    """Log-Laplace transform ``log E[exp(-u P_k)]`` of one tier's signal power.

    ``P_k`` sums ``g * power * r**-alpha`` over the tier's active cluster
    members.  Closed form up to a fading expectation; ``u = 0`` gives 0.
    """
    if not u >= 0:
        raise ValueError(f"u must be >= 0, got {u}")
    if u == 0:
        return 0.0
    c = 2.0 / tier.alpha

    def phi(g: np.ndarray) -> np.ndarray:
        bound = _signal_bound(tier, g)
        x = u * g * bound
        return bound ** (-c) * (1.0 - np.exp(-x)) + (u * g) ** c * upper_inc_gamma(
            1.0 - c, x
        )

    val = fading_mod.expect(tier.fading, phi, points=_signal_kinks(tier))[0]
    return -math.pi * tier.density * tier.power**c * val


def log_laplace_derivative(tier: TierParams, m: int, u: float) -> float:
    """Derivative magnitude ``(-1)^m d^m/du^m log E[exp(-u P_k)]``.

    All orders are nonnegative; order ``m >= 1`` and ``u > 0`` required.
    """
    if m < 1:
        raise ValueError(f"derivative order must be >= 1, got {m}")
    if m > MAX_ORDER:
        raise OrderError(m, MAX_ORDER, "log-Laplace derivative order too large")
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    c = 2.0 / tier.alpha

    def phi(g: np.ndarray) -> np.ndarray:
        x = u * g * _signal_bound(tier, g)
        return g**c * upper_inc_gamma(m - c, x)

    val = fading_mod.expect(tier.fading, phi, points=_signal_kinks(tier))[0]
    scale = 2.0 * math.pi / tier.alpha * tier.density * tier.power**c
    return scale * u ** (c - m) * val


def _tier_log_laplace_rows(
    tier: TierParams, u: float, m_max: int
) -> tuple[float, np.ndarray]:
    """One tier's log-Laplace value and graded derivatives ``u^m ell_m``.

    ``ell_m`` is the derivative magnitude of order ``m``; the ``u^m`` grading
    keeps downstream Bell-polynomial recursions in floating-point range (the
    raw magnitudes scale like ``u^{2/alpha - m}`` and overflow for small
    ``u``).  Shares a single adaptive fading expectation across all orders.
    """
    c = 2.0 / tier.alpha
    orders = np.arange(1, m_max + 1)
    a_col = np.concatenate(([1.0 - c], orders - c))[:, None]

    def phi(g: np.ndarray) -> np.ndarray:
        bound = _signal_bound(tier, g)
        x = u * g * bound
        gamma_rows = upper_inc_gamma(a_col, x[None, :])
        rows = np.empty((m_max + 1, g.size))
        rows[0] = bound ** (-c) * (1.0 - np.exp(-x)) + (u * g) ** c * gamma_rows[0]
        rows[1:] = g**c * gamma_rows[1:]
        return rows

    vals = fading_mod.expect(tier.fading, phi, points=_signal_kinks(tier))
    scale = tier.density * tier.power**c
    log_l = -math.pi * scale * vals[0]
    graded = (2.0 * math.pi / tier.alpha) * scale * u**c * vals[1:]
    return log_l, graded


def _log_m0_and_bell(network: NetworkConfig, u: float, m_max: int):
    """Total log-Laplace value plus graded Bell values ``u^m B_m``.

    Complete Bell polynomials are graded-homogeneous, so feeding the
    ``u^m``-scaled derivative sums yields ``u^m B_m`` of the raw sums.
    """
    log_l = 0.0
    graded = np.zeros(m_max)
    for tier in network.tiers:
        tier_log_l, tier_graded = _tier_log_laplace_rows(tier, u, m_max)
        log_l += tier_log_l
        graded += tier_graded
    acc = BellAccumulator()
    for value in graded:
        acc.extend(value)
    return log_l, acc.values


def weighted_signal_moments(
    network: NetworkConfig, u: float, m_max: int
) -> np.ndarray:
    """Weighted raw moments ``M_m = E[P^m exp(-u P)]`` for ``m = 0..m_max``.

    ``P`` is the total signal power across tiers.  ``M_0`` is the Laplace
    transform itself; higher orders follow from the complete-Bell recursion
    over the summed log-transform derivatives.  Requires ``u > 0`` when
    ``m_max >= 1`` (the unweighted higher moments diverge).
    """
    if m_max < 0:
        raise ValueError(f"m_max must be >= 0, got {m_max}")
    if m_max > MAX_ORDER:
        raise OrderError(m_max, MAX_ORDER, "weighted moment order too large")
    if u == 0 and m_max == 0:
        return np.array([1.0])
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    log_m0, graded_bell = _log_m0_and_bell(network, u, m_max)
    m = np.arange(m_max + 1)
    with np.errstate(divide="ignore"):
        return np.exp(log_m0 + np.log(graded_bell) - m * math.log(u))


def _series_terms(log_m0: float, graded_moments: np.ndarray) -> np.ndarray:
    """Series terms ``u^m M_m / m!`` computed in log space for stability.

    ``graded_moments`` holds nonnegative values of ``u^m M_m / M_0`` whose
    logs are combined with ``log_m0``; zero entries produce zero terms.
    """
    m = np.arange(graded_moments.size)
    with np.errstate(divide="ignore"):
        log_terms = log_m0 + np.log(graded_moments) - gammaln(m + 1)
    return np.exp(log_terms)


def _assemble_bounds(nu: float, terms: np.ndarray, snapped: bool) -> CoverageBounds:
    """Turn series terms into sandwich bounds and their interpolation."""
    if snapped:
        total = float(terms.sum())
        value = min(max(1.0 - total, 0.0), 1.0)
        return CoverageBounds(lower=value, upper=value, linear=value, gap=0.0)
    partial = float(terms[:-1].sum())
    gap = float(terms[-1])
    upper_raw = 1.0 - partial
    lower_raw = upper_raw - gap
    weight = nu - math.floor(nu)
    linear_raw = (1.0 - weight) * upper_raw + weight * lower_raw
    return CoverageBounds(
        lower=min(max(lower_raw, 0.0), 1.0),
        upper=min(max(upper_raw, 0.0), 1.0),
        linear=min(max(linear_raw, 0.0), 1.0),
        gap=gap,
    )


def _series_shape(network: NetworkConfig, beta: float):
    """Gamma shape, snap flag, series length, and transform argument ``u``."""
    approx = _gamma_fit(network)
    nu = approx.nu
    snapped = abs(nu - round(nu)) <= INTEGER_SNAP * max(1.0, abs(nu))
    n_terms = int(round(nu)) if snapped else math.ceil(nu)
    if n_terms > MAX_ORDER:
        raise OrderError(n_terms, MAX_ORDER, "Gamma shape too large for the series")
    return nu, snapped, n_terms, 1.0 / (approx.theta * beta)


def coverage_bounds(query: CoverageQuery) -> CoverageBounds:
    """Sandwich bounds on the coverage probability ``P(SIR >= beta)``.

    Rounding the Gamma shape up (down) truncates the underlying series one
    term later (earlier), bounding coverage from below (above); the reported
    ``linear`` value interpolates the two by the shape's fractional part.
    """
    nu, snapped, n_terms, u = _series_shape(query.network, query.beta)
    log_m0, graded_bell = _log_m0_and_bell(query.network, u, n_terms - 1)
    terms = _series_terms(log_m0, graded_bell)
    return _assemble_bounds(nu, terms, snapped)


def coverage_probability(network: NetworkConfig, beta: float) -> float:
    """Interpolated coverage probability at linear SIR threshold ``beta``."""
    return coverage_bounds(CoverageQuery(network, beta)).linear


# ---------------------------------------------------------------------------
# Conditioning on observed cluster sizes


def conditional_log_laplace(tier: TierParams, count: int, u: float) -> float:
    """Log-Laplace transform of one tier's signal given its cluster size.

    Conditioning on ``count`` cluster members replaces the exponential of the
    unconditional log-transform by a power of its per-member average:
    ``count * log(1 + log_laplace / E[C_k])``.
    """
    if count < 0:
        raise ValueError(f"cluster count must be >= 0, got {count}")
    if not u >= 0:
        raise ValueError(f"u must be >= 0, got {u}")
    inner = 1.0 + log_laplace_signal(tier, u) / expected_cluster_size(tier)
    if inner <= 0:
        raise ValueError(
            "conditional transform undefined: per-member Laplace factor "
            f"{inner:.3e} is not positive (u too large for this tier)"
        )
    return count * math.log(inner)


def _conditional_weighted_moments(
    network: NetworkConfig, counts: Sequence[int], u: float, m_max: int
) -> np.ndarray:
    """Graded moments ``u^m E[P^m exp(-uP) | C]`` under per-tier counts.

    Faa di Bruno's partial Bell polynomials share the grading property of the
    complete ones, so feeding ``u^m``-scaled derivatives yields the same
    scaling of every output order, and the binomial convolution across tiers
    preserves it.
    """
    if len(counts) != network.n_tiers:
        raise ValueError(
            f"expected {network.n_tiers} cluster counts, got {len(counts)}"
        )
    combined = None
    for tier, count in zip(network.tiers, counts):
        if count < 0:
            raise ValueError(f"cluster count must be >= 0, got {count}")
        log_l, graded_ell = _tier_log_laplace_rows(tier, u, m_max)
        mean_size = expected_cluster_size(tier)
        inner = 1.0 + log_l / mean_size
        if inner <= 0:
            raise ValueError(
                "conditional transform undefined: per-member Laplace factor "
                f"{inner:.3e} is not positive (u too large for this tier)"
            )
        # Signed derivatives of the per-member factor; the alternating signs
        # factor uniformly out of every Bell monomial, so no cancellation.
        signs = (-1.0) ** np.arange(1, m_max + 1)
        derivs = np.concatenate(([inner], signs * graded_ell / mean_size))
        tier_moments = np.array(
            [
                (-1.0) ** m * falling_factorial_faa_di_bruno(count, derivs, m)
                for m in range(m_max + 1)
            ]
        )
        if combined is None:
            combined = tier_moments
        else:
            # Leibniz rule in the sign-absorbed convention: the product's
            # m-th moment is the binomial convolution of the factors'.
            out = np.zeros(m_max + 1)
            for m in range(m_max + 1):
                out[m] = float(
                    np.dot(
                        BINOMIAL[m, : m + 1] * combined[: m + 1],
                        tier_moments[m::-1],
                    )
                )
            combined = out
    return combined


def conditional_coverage_bounds(
    network: NetworkConfig, beta: float, counts: Sequence[int]
) -> CoverageBounds:
    """Coverage bounds given observed per-tier cluster sizes ``counts``.

    Uses the same interference Gamma fit as the unconditional pipeline but
    replaces the signal transform by its cluster-size-conditioned form.
    """
    CoverageQuery(network, beta)  # validates beta
    nu, snapped, n_terms, u = _series_shape(network, beta)
    moments = _conditional_weighted_moments(network, counts, u, n_terms - 1)
    terms = _series_terms(0.0, moments)
    return _assemble_bounds(nu, terms, snapped)


# ---------------------------------------------------------------------------
# Spectral efficiency


def spectral_efficiency(network: NetworkConfig) -> float:
    """Mean achievable rate ``E[log2(1 + SIR)]`` in bit/s/Hz.

    Integrates the interpolated coverage of ``beta = 2^tau - 1`` over
    ``tau``, truncating where coverage falls below 1e-6.
    """

    def pc(tau: float) -> float:
        beta = max(math.pow(2.0, tau) - 1.0, 1e-12)
        return coverage_probability(network, beta)

    tau_hi = 1.0
    while pc(tau_hi) > _RATE_TRUNCATION:
        tau_hi *= 1.5
        if tau_hi > 500.0:
            break

    def rows(taus: np.ndarray) -> np.ndarray:
        return np.array([pc(t) for t in taus])

    value, _ = adaptive_gauss_kronrod(
        rows, 0.0, tau_hi, rel_tol=1e-7, abs_tol=1e-9, max_intervals=512
    )
    return float(value[0])
