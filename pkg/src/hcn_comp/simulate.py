"""Seeded Monte Carlo oracle: realize the network and sample SIR directly.

Each trial realizes every tier's Poisson process inside a finite disk of
radius ``window_radius`` around the user, applies the clustering and
activation rules to the sampled long-term and instantaneous received powers,
and records per-tier signal and interference sums.  Trials are driven by
independent substreams keyed on ``(master_seed, trial_index)``, so estimates
are byte-identical for any worker count or execution order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import fading as fading_mod
from .config import MODE_FR, NetworkConfig, cluster_radius
from .errors import ConfigError, InsufficientSamplesError
from .interference import interference_moments, truncated_tail_mean

#: Fraction of the mean interference that may arrive from beyond the window.
_TAIL_FRACTION = 1e-3

#: Minimum ratio of window radius to every tier's cluster radius.
_WINDOW_MARGIN = 2.0

#: Minimum ratio of the automatic window radius to the largest cluster radius.
_AUTO_FLOOR = 4.0

#: Conditioning trials required before a conditional estimate is reported.
_MIN_CONDITIONING_TRIALS = 500


def auto_window_radius(network: NetworkConfig) -> float:
    """Window radius keeping the truncated interference tail below 0.1%.

    Chooses the smallest radius at which the closed-form mean interference
    arriving from beyond the window falls under ``1e-3`` of the total mean,
    floored at four times the largest cluster radius.
    """
    floor = _AUTO_FLOOR * max(cluster_radius(t) for t in network.tiers)
    mean, _ = interference_moments(network)
    target = _TAIL_FRACTION * mean
    if truncated_tail_mean(network, floor) <= target:
        return floor
    hi = floor
    while truncated_tail_mean(network, hi) > target:
        hi *= 2.0
    return float(
        brentq(lambda r: truncated_tail_mean(network, r) - target, floor, hi)
    )


@dataclass(frozen=True)
class SimConfig:
    """Simulation plan: network, trial budget, seeding, window, thresholds.

    ``window_radius=None`` selects the automatic tail-based radius.
    ``beta_grid`` lists linear SIR thresholds for coverage estimation.
    """

    network: NetworkConfig
    trials: int
    master_seed: int
    window_radius: Optional[float] = None
    beta_grid: tuple[float, ...] = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(
                "master_seed", f"must be a 64-bit unsigned integer, got {self.master_seed}"
            )
        object.__setattr__(self, "beta_grid", tuple(self.beta_grid))
        for beta in self.beta_grid:
            if not beta > 0:
                raise ConfigError("beta_grid", f"thresholds must be > 0, got {beta}")
        if self.window_radius is not None:
            needed = _WINDOW_MARGIN * max(
                cluster_radius(t) for t in self.network.tiers
            )
            if self.window_radius < needed:
                raise ConfigError(
                    "window_radius",
                    f"must cover every cluster radius with margin {_WINDOW_MARGIN}x "
                    f"(>= {needed:.1f} m), got {self.window_radius}",
                )

    def resolved_window(self) -> float:
        """The explicit window radius, or the automatic one if unset."""
        if self.window_radius is not None:
            return float(self.window_radius)
        return auto_window_radius(self.network)


@dataclass(frozen=True)
class TrialResult:
    """One trial's totals: signal, interference split, per-tier counts."""

    signal_power: float
    intra_interf: float
    outer_interf: float
    cluster_counts: tuple[int, ...]
    active_counts: tuple[int, ...]
    signal_by_tier: tuple[float, ...]
    intra_by_tier: tuple[float, ...]
    outer_by_tier: tuple[float, ...]


@dataclass(frozen=True)
class TrialBatch:
    """Column-major results of a run: one row per trial, one column per tier.

    ``intra`` holds silent-cluster-member power (interference only under FR);
    ``outer`` holds out-of-cluster power (interference always).  When a probe
    radius was requested, ``probe_intra``/``probe_outer`` hold the same sums
    restricted to stations within that radius.
    """

    window_radius: float
    signal: np.ndarray
    intra: np.ndarray
    outer: np.ndarray
    cluster_counts: np.ndarray
    active_counts: np.ndarray
    gain_sum: np.ndarray
    gain_count: np.ndarray
    probe_radius: Optional[float] = None
    probe_intra: Optional[np.ndarray] = None
    probe_outer: Optional[np.ndarray] = None

    @property
    def n_trials(self) -> int:
        return self.signal.shape[0]


def _trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent substream for one trial, stable across execution order."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    )


def partition_tier(
    tier, omega: np.ndarray, received: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split one tier's stations into (active, silent, outside) masks.

    A station joins the cluster when its average received power reaches the
    clustering threshold (boundary inclusive) and transmits when its
    instantaneous received power additionally reaches the activation
    threshold (boundary inclusive); remaining cluster members are silent.
    """
    in_cluster = omega >= tier.cluster_thresh
    active = in_cluster & (received >= tier.activation_thresh)
    silent = in_cluster & ~active
    outside = ~in_cluster
    return active, silent, outside


def _simulate_trial(
    network: NetworkConfig,
    window: float,
    rng: np.random.Generator,
    probe_radius: Optional[float],
):
    """Realize one trial; returns per-tier sums, counts, and gain totals."""
    n_tiers = network.n_tiers
    signal = np.zeros(n_tiers)
    intra = np.zeros(n_tiers)
    outer = np.zeros(n_tiers)
    cluster_counts = np.zeros(n_tiers, dtype=np.int64)
    active_counts = np.zeros(n_tiers, dtype=np.int64)
    probe_intra = np.zeros(n_tiers) if probe_radius is not None else None
    probe_outer = np.zeros(n_tiers) if probe_radius is not None else None
    gain_sum = 0.0
    gain_count = 0
    window_sq = window * window
    for k, tier in enumerate(network.tiers):
        count = rng.poisson(tier.density * math.pi * window_sq)
        if count == 0:
            continue
        # Uniform positions in the disk enter only through the received
        # power: r^2 = window^2 * U gives omega = power * r^(-alpha).
        radius_sq = window_sq * rng.random(count)
        omega = tier.power * radius_sq ** (-0.5 * tier.alpha)
        gains = fading_mod.sample(tier.fading, rng, count)
        gain_sum += float(gains.sum())
        gain_count += count
        received = gains * omega
        active, silent, outside = partition_tier(tier, omega, received)
        in_cluster = active | silent
        signal[k] = received.sum(where=active)
        intra[k] = received.sum(where=silent)
        outer[k] = received.sum(where=outside)
        cluster_counts[k] = np.count_nonzero(in_cluster)
        active_counts[k] = np.count_nonzero(active)
        if probe_radius is not None:
            within = radius_sq <= probe_radius * probe_radius
            probe_intra[k] = received.sum(where=silent & within)
            probe_outer[k] = received.sum(where=outside & within)
    return (
        signal,
        intra,
        outer,
        cluster_counts,
        active_counts,
        gain_sum,
        gain_count,
        probe_intra,
        probe_outer,
    )


def _simulate_range(args) -> dict:
    network, window, master_seed, probe_radius, start, stop = args
    n = stop - start
    n_tiers = network.n_tiers
    out = {
        "signal": np.zeros((n, n_tiers)),
        "intra": np.zeros((n, n_tiers)),
        "outer": np.zeros((n, n_tiers)),
        "cluster_counts": np.zeros((n, n_tiers), dtype=np.int64),
        "active_counts": np.zeros((n, n_tiers), dtype=np.int64),
        "gain_sum": np.zeros(n),
        "gain_count": np.zeros(n, dtype=np.int64),
    }
    if probe_radius is not None:
        out["probe_intra"] = np.zeros((n, n_tiers))
        out["probe_outer"] = np.zeros((n, n_tiers))
    for i in range(n):
        rng = _trial_rng(master_seed, start + i)
        result = _simulate_trial(network, window, rng, probe_radius)
        out["signal"][i] = result[0]
        out["intra"][i] = result[1]
        out["outer"][i] = result[2]
        out["cluster_counts"][i] = result[3]
        out["active_counts"][i] = result[4]
        out["gain_sum"][i] = result[5]
        out["gain_count"][i] = result[6]
        if probe_radius is not None:
            out["probe_intra"][i] = result[7]
            out["probe_outer"][i] = result[8]
    return out


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count after applying the ``HCN_COMP_THREADS`` cap."""
    available = os.cpu_count() or 1
    cap_text = os.environ.get("HCN_COMP_THREADS")
    if cap_text is None:
        cap = available
    else:
        try:
            cap = int(cap_text)
        except ValueError:
            raise ConfigError(
                "HCN_COMP_THREADS", f"must be an integer, got {cap_text!r}"
            ) from None
        if cap < 1:
            raise ConfigError("HCN_COMP_THREADS", f"must be >= 1, got {cap}")
    return max(1, min(requested if requested is not None else available, cap))


def run_batch(
    sim: SimConfig,
    workers: int = 1,
    probe_radius: Optional[float] = None,
) -> TrialBatch:
    """Run all trials and assemble their results in trial order.

    The assembly is independent of ``workers``; estimates derived from the
    batch are therefore byte-identical for any worker count.
    """
    window = sim.resolved_window()
    if workers <= 1 or sim.trials < 2 * workers:
        parts = [
            _simulate_range(
                (sim.network, window, sim.master_seed, probe_radius, 0, sim.trials)
            )
        ]
    else:
        chunk = max(1, math.ceil(sim.trials / (workers * 4)))
        ranges = [
            (sim.network, window, sim.master_seed, probe_radius, start, min(start + chunk, sim.trials))
            for start in range(0, sim.trials, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_range, ranges))
    merged = {
        key: np.concatenate([p[key] for p in parts]) for key in parts[0].keys()
    }
    return TrialBatch(
        window_radius=window,
        signal=merged["signal"],
        intra=merged["intra"],
        outer=merged["outer"],
        cluster_counts=merged["cluster_counts"],
        active_counts=merged["active_counts"],
        gain_sum=merged["gain_sum"],
        gain_count=merged["gain_count"],
        probe_radius=probe_radius,
        probe_intra=merged.get("probe_intra"),
        probe_outer=merged.get("probe_outer"),
    )


def sample_trial(sim: SimConfig, trial_index: int) -> TrialResult:
    """Run the single trial ``trial_index`` of the plan and return its sums."""
    if not 0 <= trial_index < sim.trials:
        raise ConfigError(
            "trial_index", f"must be in [0, {sim.trials}), got {trial_index}"
        )
    window = sim.resolved_window()
    rng = _trial_rng(sim.master_seed, trial_index)
    signal, intra, outer, cluster_counts, active_counts, *_ = _simulate_trial(
        sim.network, window, rng, None
    )
    return TrialResult(
        signal_power=float(signal.sum()),
        intra_interf=float(intra.sum()),
        outer_interf=float(outer.sum()),
        cluster_counts=tuple(int(c) for c in cluster_counts),
        active_counts=tuple(int(c) for c in active_counts),
        signal_by_tier=tuple(float(x) for x in signal),
        intra_by_tier=tuple(float(x) for x in intra),
        outer_by_tier=tuple(float(x) for x in outer),
    )


# ---------------------------------------------------------------------------
# Estimators


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with its normal-theory uncertainty."""

    mean: float
    std_error: float
    ci95_low: float
    ci95_high: float
    n: int


def _from_mean_se(mean: float, se: float, n: int) -> Estimate:
    return Estimate(
        mean=mean,
        std_error=se,
        ci95_low=mean - 1.96 * se,
        ci95_high=mean + 1.96 * se,
        n=n,
    )


def _estimate_mean(values: np.ndarray) -> Estimate:
    n = values.size
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return _from_mean_se(mean, se, n)


def _estimate_proportion(hits: np.ndarray) -> Estimate:
    n = hits.size
    p = float(np.count_nonzero(hits)) / n
    se = math.sqrt(p * (1.0 - p) / n)
    return _from_mean_se(p, se, n)


def _estimate_variance(values: np.ndarray) -> Estimate:
    n = values.size
    var = float(values.var(ddof=1))
    centered = values - values.mean()
    fourth = float(np.mean(centered**4))
    se_sq = (fourth - (n - 3) / (n - 1) * var * var) / n
    se = math.sqrt(max(se_sq, 0.0))
    return _from_mean_se(var, se, n)


def batch_sir(batch: TrialBatch, network: NetworkConfig) -> np.ndarray:
    """Per-trial SIR under the network's scheduling modes.

    Silent cluster members count as interference only for FR tiers.  An
    empty active set yields SIR 0.
    """
    fr_mask = np.array([mode == MODE_FR for mode in network.modes])
    denom = batch.outer.sum(axis=1) + batch.intra[:, fr_mask].sum(axis=1)
    num = batch.signal.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sir = np.where(num > 0, num / denom, 0.0)
    return sir


def batch_interference(batch: TrialBatch, network: NetworkConfig) -> np.ndarray:
    """Per-trial aggregate interference under the network's modes."""
    fr_mask = np.array([mode == MODE_FR for mode in network.modes])
    return batch.outer.sum(axis=1) + batch.intra[:, fr_mask].sum(axis=1)


def _batch_or_run(sim: SimConfig, workers: int, batch: Optional[TrialBatch]):
    if batch is None:
        return run_batch(sim, workers=workers)
    if batch.n_trials != sim.trials:
        raise ConfigError(
            "batch", f"holds {batch.n_trials} trials, plan expects {sim.trials}"
        )
    return batch


def estimate_coverage(
    sim: SimConfig, workers: int = 1, *, batch: Optional[TrialBatch] = None
) -> list[Estimate]:
    """Empirical ``P(SIR >= beta)`` with binomial errors per grid threshold."""
    if not sim.beta_grid:
        raise ConfigError("beta_grid", "coverage estimation needs thresholds")
    batch = _batch_or_run(sim, workers, batch)
    sir = batch_sir(batch, sim.network)
    return [_estimate_proportion(sir >= beta) for beta in sim.beta_grid]


def estimate_interference_moments(
    sim: SimConfig, workers: int = 1, *, batch: Optional[TrialBatch] = None
) -> tuple[Estimate, Estimate]:
    """Sample mean and unbiased sample variance of the interference."""
    batch = _batch_or_run(sim, workers, batch)
    totals = batch_interference(batch, sim.network)
    return _estimate_mean(totals), _estimate_variance(totals)


def estimate_rate_cdf(
    sim: SimConfig,
    taus,
    workers: int = 1,
    *,
    batch: Optional[TrialBatch] = None,
) -> list[Estimate]:
    """Empirical CDF of the rate ``log2(1 + SIR)`` on a ``tau`` grid."""
    batch = _batch_or_run(sim, workers, batch)
    rate = np.log2(1.0 + batch_sir(batch, sim.network))
    return [_estimate_proportion(rate <= tau) for tau in np.asarray(taus, float)]


def estimate_signal_laplace(
    sim: SimConfig,
    tier_index: int,
    u: float,
    workers: int = 1,
    *,
    batch: Optional[TrialBatch] = None,
) -> Estimate:
    """Empirical Laplace transform ``E[exp(-u P_k)]`` of one tier's signal."""
    if not u >= 0:
        raise ValueError(f"u must be >= 0, got {u}")
    batch = _batch_or_run(sim, workers, batch)
    return _estimate_mean(np.exp(-u * batch.signal[:, tier_index]))


def estimate_conditional_laplace(
    sim: SimConfig,
    tier_index: int,
    cluster_count: int,
    u: float,
    workers: int = 1,
    *,
    batch: Optional[TrialBatch] = None,
) -> Estimate:
    """Laplace transform of one tier's signal among trials whose observed
    cluster size equals ``cluster_count``.

    Raises :class:`InsufficientSamplesError` (carrying the count found) when
    fewer than 500 trials match.
    """
    if not u >= 0:
        raise ValueError(f"u must be >= 0, got {u}")
    batch = _batch_or_run(sim, workers, batch)
    mask = batch.cluster_counts[:, tier_index] == cluster_count
    matched = int(np.count_nonzero(mask))
    if matched < _MIN_CONDITIONING_TRIALS:
        raise InsufficientSamplesError(matched, _MIN_CONDITIONING_TRIALS)
    return _estimate_mean(np.exp(-u * batch.signal[mask, tier_index]))
