"""Built-in example scenarios used by the CLI and the test suite."""

from __future__ import annotations

import math

from .config import MODE_FR, NetworkConfig, TierParams
from .errors import ConfigError
from .fading import NakagamiPower


def table1() -> NetworkConfig:
    """Three-tier reference scenario (macro / micro / femto).

    Densities 4/16/40 per km2, powers 46/30/24 dBm, path-loss exponents
    4.3/3.8/3.5, Nakagami shapes 1.8/2.3/2.7, cluster thresholds
    -69.6/-63.1/-49.5 dBm; tier 1 activates every cluster member, tiers 2-3
    use activation thresholds 3 dB above their cluster thresholds.
    """
    return NetworkConfig(
        tiers=(
            TierParams.from_db(
                4, 46, 4.3, -69.6, t_rel_db=0.0, fading=NakagamiPower(1.8)
            ),
            TierParams.from_db(
                16, 30, 3.8, -63.1, t_rel_db=3.0, fading=NakagamiPower(2.3)
            ),
            TierParams.from_db(
                40, 24, 3.5, -49.5, t_rel_db=3.0, fading=NakagamiPower(2.7)
            ),
        ),
        modes=(MODE_FR, MODE_FR, MODE_FR),
    )


def twotier_fig3() -> NetworkConfig:
    """Two-tier scenario for the threshold design studies.

    Tier 1 copies the reference macro tier.  Tier 2 keeps the reference
    micro-tier density, power, path loss, and fading, but its cluster
    threshold is retuned so the mean cluster size is exactly 5; its
    activation threshold starts at the cluster threshold (baseline point).
    """
    density_per_km2 = 16.0
    power_mw = 10.0**3.0  # 30 dBm
    alpha = 3.8
    # Mean cluster size lambda * pi * r^2 = 5 fixes the cluster radius, and
    # the threshold is the long-term received power at that radius.
    radius = math.sqrt(5.0 / (density_per_km2 * 1e-6 * math.pi))
    delta = power_mw * radius**-alpha
    tier2 = TierParams(
        density=density_per_km2 * 1e-6,
        power=power_mw,
        alpha=alpha,
        cluster_thresh=delta,
        activation_thresh=delta,
        fading=NakagamiPower(2.3),
    )
    return NetworkConfig(
        tiers=(
            TierParams.from_db(
                4, 46, 4.3, -69.6, t_rel_db=0.0, fading=NakagamiPower(1.8)
            ),
            tier2,
        ),
        modes=(MODE_FR, MODE_FR),
    )


_PRESETS = {
    "table1": table1,
    "twotier-fig3": twotier_fig3,
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def get_preset(name: str) -> NetworkConfig:
    """Look up a preset scenario by name."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            "preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return factory()
