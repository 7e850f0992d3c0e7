"""Small-scale fading distributions for the power gain.

Gains are normalized to unit mean: Nakagami-``m`` amplitude fading yields a
Gamma-distributed power gain with shape ``m`` and scale ``1/m``.  A
deterministic point mass is provided for closed-form sanity checks and for
switching fading off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import gammainccinv, gammaln

from .errors import ConfigError
from .quadrature import adaptive_gauss_kronrod

#: Gamma tail mass beyond the truncation point of expectation integrals.
_TAIL_MASS = 1e-13


@dataclass(frozen=True)
class NakagamiPower:
    """Power gain of Nakagami-``m`` amplitude fading: Gamma(m, 1/m), unit mean."""

    m: float

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m >= 0.5):
            raise ConfigError("fading.nakagami_m", f"must be >= 0.5, got {self.m}")


@dataclass(frozen=True)
class Deterministic:
    """Point mass: the gain always equals ``value`` (default 1, no fading)."""

    value: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value > 0):
            raise ConfigError("fading.deterministic", f"must be > 0, got {self.value}")


FadingDist = Union[NakagamiPower, Deterministic]


def sample(dist: FadingDist, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` i.i.d. power gains using ``rng``."""
    if isinstance(dist, NakagamiPower):
        return rng.standard_gamma(dist.m, size) / dist.m
    return np.full(size, dist.value)


def truncation_point(dist: FadingDist) -> float:
    """Upper integration limit leaving tail mass below 1e-12."""
    if isinstance(dist, NakagamiPower):
        return float(gammainccinv(dist.m, _TAIL_MASS)) / dist.m
    return dist.value


def pdf(dist: FadingDist, g: np.ndarray) -> np.ndarray:
    """Probability density of the power gain (Gamma(m, 1/m) for Nakagami)."""
    if isinstance(dist, Deterministic):
        raise ValueError("point-mass distribution has no density")
    m = dist.m
    g = np.asarray(g, dtype=float)
    out = np.zeros_like(g)
    pos = g > 0
    out[pos] = np.exp(
        m * np.log(m) - gammaln(m) + (m - 1.0) * np.log(g[pos]) - m * g[pos]
    )
    return out


def expect(
    dist: FadingDist,
    phi: Callable[[np.ndarray], np.ndarray],
    *,
    points: tuple[float, ...] = (),
    rel_tol: float = 1e-9,
) -> np.ndarray:
    """Expectation ``E[phi(g)]`` of a (possibly vector-valued) function.

    ``phi`` maps gains of shape ``(n,)`` to values of shape ``(n,)`` or
    ``(rows, n)``; the result has shape ``(rows,)`` (``(1,)`` for scalar
    integrands).  ``points`` lists gain values where ``phi`` has kinks so the
    quadrature can split there.  Raises :class:`QuadratureError` carrying the
    achieved estimate if the tolerance cannot be met.
    """
    if isinstance(dist, Deterministic):
        vals = np.atleast_2d(np.asarray(phi(np.array([dist.value])), dtype=float))
        return vals[:, 0].copy()

    g_max = truncation_point(dist)
    breakpoints = {p for p in points if 0.0 < p < g_max}
    # Resolve the density's own scale even when phi is smooth.
    breakpoints.update(p for p in (0.5, 1.0, 2.0) if p < g_max)

    def integrand(g: np.ndarray) -> np.ndarray:
        w = pdf(dist, g)
        return np.atleast_2d(np.asarray(phi(g), dtype=float)) * w

    values, _ = adaptive_gauss_kronrod(
        integrand,
        0.0,
        g_max,
        points=tuple(sorted(breakpoints)),
        rel_tol=rel_tol,
        abs_tol=0.0,
    )
    return values
