"""Design metrics for cooperation thresholds: load, resource saving, rates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fading as fading_mod
from .config import MODE_CS, MODE_FR, NetworkConfig, TierParams
from .coverage import coverage_probability, spectral_efficiency
from .errors import ConfigError


@dataclass(frozen=True)
class LoadQuery:
    """A tier's current thresholds versus a baseline operating point.

    ``baseline_delta`` / ``baseline_t`` play the roles of the reference
    cluster and activation thresholds (mW) that the tier's current values
    are compared against.
    """

    tier: TierParams
    baseline_delta: float
    baseline_t: float

    def __post_init__(self):
        if not self.baseline_delta > 0:
            raise ConfigError(
                "baseline_delta", f"must be > 0, got {self.baseline_delta}"
            )
        if not self.baseline_t > 0:
            raise ConfigError("baseline_t", f"must be > 0, got {self.baseline_t}")


def _min_power_moment(
    tier: TierParams, delta: float, t_thresh: float
) -> float:
    """``E[min(delta, T/g) ** (-2/alpha)]`` with the kink split at ``T/delta``."""
    c = 2.0 / tier.alpha

    def phi(g: np.ndarray) -> np.ndarray:
        return np.minimum(delta, t_thresh / np.maximum(g, 1e-300)) ** (-c)

    kinks = (t_thresh / delta,) if t_thresh > 0 else ()
    return float(fading_mod.expect(tier.fading, phi, points=kinks)[0])


def load_increase(query: LoadQuery) -> float:
    """Relative increase of a tier's cooperation load over the baseline.

    Ratio of ``E[min(delta, T/g)**(-2/alpha)]`` at the current thresholds to
    the same expectation at the baseline thresholds, minus one.  Zero at the
    baseline point; grows as the cluster threshold is lowered.
    """
    tier = query.tier
    current = _min_power_moment(tier, tier.cluster_thresh, tier.activation_thresh)
    baseline = _min_power_moment(tier, query.baseline_delta, query.baseline_t)
    return current / baseline - 1.0


def resource_saving(tier: TierParams) -> float:
    """Average fraction of cluster members silenced by the activation rule.

    ``1 - E[min(1, (g * delta / T) ** (2/alpha))]``; lies in ``[0, 1)`` and
    depends only on the threshold ratio ``T/delta``, the path-loss exponent,
    and the fading law — not on density or power.  ``T = 0`` (always active)
    gives exactly 0.
    """
    t_thresh = tier.activation_thresh
    if t_thresh == 0:
        return 0.0
    c = 2.0 / tier.alpha
    ratio = tier.cluster_thresh / t_thresh

    def phi(g: np.ndarray) -> np.ndarray:
        return np.minimum(1.0, (g * ratio) ** c)

    kink = 1.0 / ratio
    return 1.0 - float(fading_mod.expect(tier.fading, phi, points=(kink,))[0])


def rate_cdf(network: NetworkConfig, taus) -> np.ndarray:
    """CDF of the achievable rate ``R = log2(1 + SIR)`` on a ``tau`` grid.

    ``P(R <= tau) = 1 - P(SIR >= 2**tau - 1)`` from the interpolated
    analytic coverage.
    """
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0):
        raise ValueError("rate grid values must be >= 0")
    out = np.empty(taus.shape, dtype=float)
    for i, tau in np.ndenumerate(taus):
        beta = max(math.pow(2.0, tau) - 1.0, 1e-12)
        out[i] = 1.0 - coverage_probability(network, beta)
    return out


def mean_rate_loss(network: NetworkConfig) -> tuple[float, float, float]:
    """Mean rates under coordinated silencing and frequency reuse.

    Returns ``(rate_cs, rate_fr, relative_loss)`` where the loss is
    ``(rate_cs - rate_fr) / rate_cs`` — the price of keeping silent cluster
    members transmitting on the user's resource.
    """
    rate_cs = spectral_efficiency(network.with_mode(MODE_CS))
    rate_fr = spectral_efficiency(network.with_mode(MODE_FR))
    return rate_cs, rate_fr, (rate_cs - rate_fr) / rate_cs
