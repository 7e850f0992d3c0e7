"""Network model configuration: tiers, thresholds, scheduling modes.

Internal units are SI-adjacent and fixed throughout the package:

* densities in base stations per square meter,
* powers and thresholds in mW (received power referenced to 1 m),
* distances in meters.

The JSON scenario schema and the ``from_db`` constructor accept the
conventional per-km² / dBm figures and convert on entry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

from .errors import ConfigError
from .fading import Deterministic, FadingDist, NakagamiPower

#: Frequency-reuse scheduling: silent cluster members still interfere.
MODE_FR = "FR"
#: Coordinated-silencing scheduling: silent cluster members are muted.
MODE_CS = "CS"

_MODES = (MODE_FR, MODE_CS)


def db_to_ratio(x_db: float) -> float:
    """Convert a power ratio in dB to linear scale."""
    return 10.0 ** (x_db / 10.0)


def ratio_to_db(x: float) -> float:
    """Convert a linear power ratio to dB."""
    return 10.0 * math.log10(x)


def dbm_to_mw(x_dbm: float) -> float:
    """Convert dBm to mW."""
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(x_mw: float) -> float:
    """Convert mW to dBm."""
    return 10.0 * math.log10(x_mw)


@dataclass(frozen=True)
class TierParams:
    """One network tier: a stationary PPP of equal-power base stations.

    Fields
    ------
    density:
        Base-station density, per m².
    power:
        Per-station transmit power in mW; doubles as the received power at
        the 1 m reference distance.
    alpha:
        Path-loss exponent, must exceed 2 for finite interference.
    cluster_thresh:
        Long-term received-power threshold (mW) for cluster membership; a
        station at distance ``r`` joins the user's cluster iff
        ``power * r**-alpha >= cluster_thresh`` (boundary inclusive).
    activation_thresh:
        Instantaneous received-power threshold (mW) for a cluster member to
        transmit; 0 means every cluster member is always active.  Values
        below ``cluster_thresh`` are allowed.
    fading:
        Small-scale power-gain distribution.
    """

    density: float
    power: float
    alpha: float
    cluster_thresh: float
    activation_thresh: float
    fading: FadingDist

    def __post_init__(self):
        _require(self.density > 0, "density", f"must be > 0, got {self.density}")
        _require(self.power > 0, "power", f"must be > 0, got {self.power}")
        _require(self.alpha > 2, "alpha", f"must be > 2, got {self.alpha}")
        _require(
            self.cluster_thresh > 0,
            "cluster_thresh",
            f"must be > 0, got {self.cluster_thresh}",
        )
        _require(
            self.activation_thresh >= 0,
            "activation_thresh",
            f"must be >= 0, got {self.activation_thresh}",
        )
        if not isinstance(self.fading, (NakagamiPower, Deterministic)):
            raise ConfigError("fading", f"unsupported distribution {self.fading!r}")

    @classmethod
    def from_db(
        cls,
        density_per_km2: float,
        power_dbm: float,
        alpha: float,
        delta_dbm: float,
        *,
        t_dbm: float | None = None,
        t_rel_db: float | None = None,
        fading: FadingDist,
    ) -> "TierParams":
        """Build a tier from conventional engineering units.

        The activation threshold is given either absolutely (``t_dbm``, with
        ``-inf`` meaning always-active) or relative to the cluster threshold
        (``t_rel_db``); exactly one of the two must be supplied.
        """
        if (t_dbm is None) == (t_rel_db is None):
            raise ConfigError(
                "t_dbm/t_rel_db", "exactly one of t_dbm and t_rel_db is required"
            )
        if t_dbm is not None:
            activation = 0.0 if t_dbm == -math.inf else dbm_to_mw(t_dbm)
        else:
            activation = dbm_to_mw(delta_dbm + t_rel_db)
        return cls(
            density=density_per_km2 * 1e-6,
            power=dbm_to_mw(power_dbm),
            alpha=alpha,
            cluster_thresh=dbm_to_mw(delta_dbm),
            activation_thresh=activation,
            fading=fading,
        )


def cluster_radius(tier: TierParams) -> float:
    """Distance (m) at which the long-term received power equals the
    cluster threshold: ``(cluster_thresh / power) ** (-1/alpha)``."""
    return (tier.cluster_thresh / tier.power) ** (-1.0 / tier.alpha)


def expected_cluster_size(tier: TierParams) -> float:
    """Mean number of this tier's stations inside a user's cluster."""
    return tier.density * math.pi * cluster_radius(tier) ** 2


@dataclass(frozen=True)
class NetworkConfig:
    """A multi-tier network plus each tier's scheduling mode."""

    tiers: tuple[TierParams, ...]
    modes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        tiers = tuple(self.tiers)
        if not tiers:
            raise ConfigError("tiers", "at least one tier is required")
        modes = tuple(self.modes) or (MODE_FR,) * len(tiers)
        if len(modes) != len(tiers):
            raise ConfigError(
                "modes", f"expected {len(tiers)} entries, got {len(modes)}"
            )
        for i, mode in enumerate(modes):
            if mode not in _MODES:
                raise ConfigError(f"tiers[{i}].mode", f"must be one of {_MODES}")
        object.__setattr__(self, "tiers", tiers)
        object.__setattr__(self, "modes", modes)

    @property
    def n_tiers(self) -> int:
        return len(self.tiers)

    def with_mode(self, mode: str) -> "NetworkConfig":
        """Copy of this network with every tier set to ``mode``."""
        return NetworkConfig(self.tiers, (mode,) * self.n_tiers)

    def subset(self, indices: tuple[int, ...]) -> "NetworkConfig":
        """Copy of this network keeping only the given tier indices (0-based)."""
        for i in indices:
            if not 0 <= i < self.n_tiers:
                raise ConfigError("tiers", f"tier index {i} out of range")
        return NetworkConfig(
            tuple(self.tiers[i] for i in indices),
            tuple(self.modes[i] for i in indices),
        )


# ---------------------------------------------------------------------------
# JSON scenario schema


def _require(cond: bool, fieldname: str, message: str):
    if not cond:
        raise ConfigError(fieldname, message)


def _fading_from_dict(obj: Any, where: str) -> FadingDist:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError(
            where, 'expected {"nakagami_m": m} or {"deterministic": true}'
        )
    ((key, value),) = obj.items()
    try:
        if key == "nakagami_m":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError("nakagami_m", f"must be a number, got {value!r}")
            return NakagamiPower(float(value))
        if key == "deterministic":
            if value is True:
                return Deterministic(1.0)
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return Deterministic(float(value))
            raise ConfigError(
                "deterministic", f"must be true or a positive number, got {value!r}"
            )
    except ConfigError as exc:
        bare = exc.field.split(".")[-1]
        raise ConfigError(f"{where}.{bare}", exc.message) from None
    raise ConfigError(where, f"unknown fading kind {key!r}")


def _fading_to_dict(dist: FadingDist) -> dict:
    if isinstance(dist, NakagamiPower):
        return {"nakagami_m": dist.m}
    if dist.value == 1.0:
        return {"deterministic": True}
    return {"deterministic": dist.value}


def _tier_from_dict(obj: Any, index: int) -> tuple[TierParams, str]:
    where = f"tiers[{index}]"
    if not isinstance(obj, dict):
        raise ConfigError(where, "each tier must be a JSON object")
    required = {"density_per_km2", "power_dbm", "alpha", "delta_dbm", "t_dbm", "fading"}
    missing = sorted(required - obj.keys())
    if missing:
        raise ConfigError(f"{where}.{missing[0]}", "missing required field")
    unknown = obj.keys() - (required | {"mode"})
    if unknown:
        raise ConfigError(where, f"unknown fields: {sorted(unknown)}")

    def num(key: str) -> float:
        value = obj[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{where}.{key}", f"must be a number, got {value!r}")
        return float(value)

    t_dbm = obj["t_dbm"]
    if t_dbm is not None and (not isinstance(t_dbm, (int, float)) or isinstance(t_dbm, bool)):
        raise ConfigError(f"{where}.t_dbm", f"must be a number or null, got {t_dbm!r}")
    mode = obj.get("mode", MODE_FR)
    if mode not in _MODES:
        raise ConfigError(f"{where}.mode", f"must be one of {_MODES}, got {mode!r}")
    fading = _fading_from_dict(obj["fading"], f"{where}.fading")
    try:
        tier = TierParams.from_db(
            num("density_per_km2"),
            num("power_dbm"),
            num("alpha"),
            num("delta_dbm"),
            t_dbm=float(t_dbm) if t_dbm is not None else -math.inf,
            fading=fading,
        )
    except ConfigError as exc:
        if exc.field.startswith(where):
            raise
        json_field = _JSON_FIELD_NAMES.get(exc.field, exc.field)
        raise ConfigError(f"{where}.{json_field}", exc.message) from None
    return tier, mode


#: Internal TierParams field name -> JSON schema field name, for diagnostics.
_JSON_FIELD_NAMES = {
    "density": "density_per_km2",
    "power": "power_dbm",
    "cluster_thresh": "delta_dbm",
    "activation_thresh": "t_dbm",
}


def network_from_dict(obj: Any) -> NetworkConfig:
    """Parse the JSON scenario schema into a :class:`NetworkConfig`."""
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "scenario must be a JSON object")
    tiers_obj = obj.get("tiers")
    if not isinstance(tiers_obj, list) or not tiers_obj:
        raise ConfigError("tiers", "must be a non-empty array of tier objects")
    parsed = [_tier_from_dict(t, i) for i, t in enumerate(tiers_obj)]
    return NetworkConfig(
        tuple(tier for tier, _ in parsed),
        tuple(mode for _, mode in parsed),
    )


def network_to_dict(network: NetworkConfig) -> dict:
    """Serialize a :class:`NetworkConfig` to the JSON scenario schema."""
    tiers = []
    for tier, mode in zip(network.tiers, network.modes):
        tiers.append(
            {
                "density_per_km2": tier.density * 1e6,
                "power_dbm": mw_to_dbm(tier.power),
                "alpha": tier.alpha,
                "delta_dbm": mw_to_dbm(tier.cluster_thresh),
                "t_dbm": (
                    None
                    if tier.activation_thresh == 0
                    else mw_to_dbm(tier.activation_thresh)
                ),
                "fading": _fading_to_dict(tier.fading),
                "mode": mode,
            }
        )
    return {"tiers": tiers}


def load_network(path: Union[str, Path]) -> NetworkConfig:
    """Read a scenario JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return network_from_dict(obj)


def dump_network(network: NetworkConfig, path: Union[str, Path]) -> None:
    """Write a scenario JSON file."""
    Path(path).write_text(json.dumps(network_to_dict(network), indent=2) + "\n")
