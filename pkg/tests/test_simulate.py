"""Monte Carlo engine: realization rules, seeding, windows, estimators."""

import dataclasses
import math
import os

import numpy as np
import pytest

from hcn_comp.config import (
    MODE_CS,
    MODE_FR,
    NetworkConfig,
    TierParams,
    cluster_radius,
)
from hcn_comp.errors import ConfigError, InsufficientSamplesError
from hcn_comp.fading import NakagamiPower
from hcn_comp.interference import interference_moments, truncated_tail_mean
from hcn_comp.simulate import (
    SimConfig,
    TrialBatch,
    _trial_rng,
    auto_window_radius,
    batch_sir,
    estimate_conditional_laplace,
    estimate_coverage,
    estimate_interference_moments,
    estimate_rate_cdf,
    estimate_signal_laplace,
    partition_tier,
    resolve_workers,
    run_batch,
    sample_trial,
)

from conftest import MASTER_SEED


# ---------------------------------------------------------------------------
# Station partition rules


def test_partition_boundaries_are_inclusive():
    tier = TierParams(
        density=1e-6, power=1000.0, alpha=4.0,
        cluster_thresh=1e-5, activation_thresh=2e-5,
        fading=NakagamiPower(2.0),
    )
    omega = np.array([1e-5, 0.999e-5, 2e-5, 5e-5, 1e-5])
    received = np.array([2e-5, 9e-5, 1.999e-5, 2e-5, 1.999e-5])
    active, silent, outside = partition_tier(tier, omega, received)
    # omega exactly at the cluster threshold joins the cluster; received power
    # exactly at the activation threshold transmits.
    assert active.tolist() == [True, False, False, True, False]
    assert silent.tolist() == [False, False, True, False, True]
    assert outside.tolist() == [False, True, False, False, False]
    # The three masks partition every station.
    combined = active.astype(int) + silent.astype(int) + outside.astype(int)
    assert np.all(combined == 1)


# ---------------------------------------------------------------------------
# Plan validation


def test_sim_config_validation(table1_net):
    with pytest.raises(ConfigError) as exc:
        SimConfig(network=table1_net, trials=0, master_seed=1)
    assert exc.value.field == "trials"
    for bad_seed in (-1, 2**64):
        with pytest.raises(ConfigError) as exc:
            SimConfig(network=table1_net, trials=1, master_seed=bad_seed)
        assert exc.value.field == "master_seed"
    with pytest.raises(ConfigError) as exc:
        SimConfig(network=table1_net, trials=1, master_seed=1,
                  beta_grid=(1.0, 0.0))
    assert exc.value.field == "beta_grid"


def test_sim_config_window_must_cover_clusters(table1_net):
    needed = 2.0 * max(cluster_radius(t) for t in table1_net.tiers)
    with pytest.raises(ConfigError) as exc:
        SimConfig(network=table1_net, trials=1, master_seed=1,
                  window_radius=needed * 0.9)
    assert exc.value.field == "window_radius"
    assert f"{needed:.1f}" in str(exc.value)
    # Exactly at the margin is accepted.
    sim = SimConfig(network=table1_net, trials=1, master_seed=1,
                    window_radius=needed)
    assert sim.resolved_window() == needed


# ---------------------------------------------------------------------------
# Window selection


def test_auto_window_hits_tail_target(table1_net):
    auto = auto_window_radius(table1_net)
    assert 5_000.0 < auto < 50_000.0
    mean, _ = interference_moments(table1_net)
    tail = truncated_tail_mean(table1_net, auto)
    assert abs(tail - 1e-3 * mean) <= 1e-6 * mean
    # Well above the geometric floor for this scenario.
    assert auto > 4.0 * max(cluster_radius(t) for t in table1_net.tiers)


def test_auto_window_floor_binds_for_fast_decay():
    tier = TierParams(
        density=1e-5, power=100.0, alpha=8.0,
        cluster_thresh=1e-4, activation_thresh=1e-4,
        fading=NakagamiPower(2.0),
    )
    net = NetworkConfig(tiers=(tier,), modes=(MODE_FR,))
    floor = 4.0 * cluster_radius(tier)
    mean, _ = interference_moments(net)
    # Premise: with this steep path loss the tail at the floor radius is
    # already below the 0.1% target, so the floor itself is returned.
    assert truncated_tail_mean(net, floor) <= 1e-3 * mean
    assert auto_window_radius(net) == floor


# ---------------------------------------------------------------------------
# Seeding and determinism


def test_trial_rng_substreams_are_reproducible_and_distinct():
    a = _trial_rng(12345, 7).random(16)
    b = _trial_rng(12345, 7).random(16)
    c = _trial_rng(12345, 8).random(16)
    d = _trial_rng(12346, 7).random(16)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def _small_cluster_sim(net, trials=100):
    window = 2.0 * max(cluster_radius(t) for t in net.tiers)
    return SimConfig(network=net, trials=trials, master_seed=MASTER_SEED + 9,
                     window_radius=window, beta_grid=(0.5, 2.0))


def test_run_batch_identical_across_worker_counts(table1_net):
    sim = _small_cluster_sim(table1_net)
    one = run_batch(sim, workers=1)
    two = run_batch(sim, workers=2)
    for name in ("signal", "intra", "outer", "cluster_counts",
                 "active_counts", "gain_sum", "gain_count"):
        assert np.array_equal(getattr(one, name), getattr(two, name)), name
    assert one.window_radius == two.window_radius


def test_sample_trial_matches_batch_rows(table1_net):
    sim = _small_cluster_sim(table1_net, trials=16)
    batch = run_batch(sim, workers=1)
    for index in (0, 7, 15):
        trial = sample_trial(sim, index)
        assert trial.signal_by_tier == tuple(batch.signal[index])
        assert trial.intra_by_tier == tuple(batch.intra[index])
        assert trial.outer_by_tier == tuple(batch.outer[index])
        assert trial.cluster_counts == tuple(batch.cluster_counts[index])
        assert trial.active_counts == tuple(batch.active_counts[index])
        assert trial.signal_power == pytest.approx(
            batch.signal[index].sum(), rel=1e-15)
    with pytest.raises(ConfigError):
        sample_trial(sim, 16)
    with pytest.raises(ConfigError):
        sample_trial(sim, -1)


# ---------------------------------------------------------------------------
# SIR assembly


def test_batch_sir_crafted_cases():
    base = dict(
        window_radius=1000.0,
        cluster_counts=np.array([[1, 1]] * 4),
        active_counts=np.array([[1, 1]] * 4),
        gain_sum=np.ones(4),
        gain_count=np.ones(4, dtype=np.int64),
    )
    batch = TrialBatch(
        signal=np.array([[2.0, 1.0], [0.0, 0.0], [3.0, 0.0], [1.0, 1.0]]),
        intra=np.array([[0.5, 0.5], [0.5, 0.5], [0.0, 0.0], [1.0, 0.0]]),
        outer=np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 2.0]]),
        **base,
    )
    tiers = (
        TierParams(density=1e-6, power=1000.0, alpha=4.0, cluster_thresh=1e-5,
                   activation_thresh=1e-5, fading=NakagamiPower(2.0)),
    ) * 2
    net_fr = NetworkConfig(tiers=tiers, modes=(MODE_FR, MODE_FR))
    net_cs = NetworkConfig(tiers=tiers, modes=(MODE_CS, MODE_CS))
    net_mix = NetworkConfig(tiers=tiers, modes=(MODE_CS, MODE_FR))

    sir_fr = batch_sir(batch, net_fr)
    # Row 0: 3 / (1 + 1); row 1: no active station -> 0 even with interference;
    # row 2: signal with zero interference -> +inf; row 3: 2 / (2 + 1).
    assert sir_fr[0] == pytest.approx(1.5)
    assert sir_fr[1] == 0.0
    assert sir_fr[2] == math.inf
    assert sir_fr[3] == pytest.approx(2.0 / 3.0)

    sir_cs = batch_sir(batch, net_cs)
    assert sir_cs[0] == pytest.approx(3.0)  # silent members drop out
    assert sir_cs[1] == 0.0
    assert sir_cs[3] == pytest.approx(1.0)

    sir_mix = batch_sir(batch, net_mix)
    assert sir_mix[0] == pytest.approx(3.0 / 1.5)  # only tier-2 intra counts
    assert sir_mix[3] == pytest.approx(1.0)  # tier-2 intra is zero here

    assert np.all(sir_cs >= sir_fr)


def test_silencing_never_hurts_sir_trialwise(cluster_batch, table1_net):
    sir_fr = batch_sir(cluster_batch, table1_net)
    sir_cs = batch_sir(cluster_batch, table1_net.with_mode(MODE_CS))
    assert np.all(sir_cs >= sir_fr)
    # Strict gain whenever some cluster member is silenced and a server exists.
    has_silent = (cluster_batch.intra.sum(axis=1) > 0)
    has_signal = (cluster_batch.signal.sum(axis=1) > 0)
    both = has_silent & has_signal & np.isfinite(sir_fr)
    assert np.all(sir_cs[both] > sir_fr[both])
    assert np.count_nonzero(both) > 1000


# ---------------------------------------------------------------------------
# Estimators


def test_estimate_interval_identity(cluster_sim, cluster_batch):
    est = estimate_signal_laplace(cluster_sim, 1, 1e5, batch=cluster_batch)
    assert est.ci95_low == est.mean - 1.96 * est.std_error
    assert est.ci95_high == est.mean + 1.96 * est.std_error
    assert est.n == cluster_batch.n_trials
    assert 0.0 < est.mean < 1.0
    with pytest.raises(ValueError):
        estimate_signal_laplace(cluster_sim, 1, -1.0, batch=cluster_batch)


def test_estimate_coverage_needs_thresholds(table1_net):
    sim = SimConfig(network=table1_net, trials=4, master_seed=1,
                    window_radius=2000.0)
    with pytest.raises(ConfigError) as exc:
        estimate_coverage(sim)
    assert exc.value.field == "beta_grid"


def test_batch_plan_mismatch_rejected(cluster_sim, cluster_batch):
    wrong = dataclasses.replace(cluster_sim, trials=cluster_sim.trials + 1)
    with pytest.raises(ConfigError) as exc:
        estimate_interference_moments(wrong, batch=cluster_batch)
    assert exc.value.field == "batch"


def test_conditional_laplace_at_zero_is_exactly_one(cluster_sim, cluster_batch):
    est = estimate_conditional_laplace(cluster_sim, 1, 4, 0.0,
                                       batch=cluster_batch)
    assert est.mean == 1.0
    assert est.std_error == 0.0
    assert est.n >= 500


def test_conditional_laplace_insufficient_samples(cluster_sim, cluster_batch):
    # Mean tier-2 cluster size is 4; observing 40 members is essentially
    # impossible, so conditioning on it must fail loudly.
    with pytest.raises(InsufficientSamplesError) as exc:
        estimate_conditional_laplace(cluster_sim, 1, 40, 1e5,
                                     batch=cluster_batch)
    assert exc.value.count < 500
    assert exc.value.required == 500


def test_empty_network_realizations_are_all_zero(table1_net):
    barren = NetworkConfig(
        tiers=tuple(dataclasses.replace(t, density=1e-30)
                    for t in table1_net.tiers),
        modes=table1_net.modes,
    )
    sim = SimConfig(network=barren, trials=50, master_seed=3,
                    window_radius=2000.0, beta_grid=(1.0,))
    batch = run_batch(sim, workers=1)
    assert not np.any(batch.signal)
    assert not np.any(batch.intra)
    assert not np.any(batch.outer)
    assert not np.any(batch.cluster_counts)
    (cov,) = estimate_coverage(sim, batch=batch)
    assert cov.mean == 0.0 and cov.std_error == 0.0
    with pytest.raises(InsufficientSamplesError) as exc:
        estimate_conditional_laplace(sim, 0, 2, 1.0, batch=batch)
    assert exc.value.count == 0


def test_single_trial_rate_cdf_is_step(table1_net):
    window = 2.0 * max(cluster_radius(t) for t in table1_net.tiers)
    sim = SimConfig(network=table1_net, trials=1, master_seed=11,
                    window_radius=window)
    ests = estimate_rate_cdf(sim, [0.1, 1.0, 4.0, 16.0])
    vals = [e.mean for e in ests]
    assert all(v in (0.0, 1.0) for v in vals)
    assert all(e.std_error == 0.0 for e in ests)
    assert vals == sorted(vals)


def test_probe_recovers_full_window_interference(table1_net):
    auto = auto_window_radius(table1_net)
    sim = SimConfig(network=table1_net, trials=2000, master_seed=MASTER_SEED,
                    window_radius=2.0 * auto)
    batch = run_batch(sim, workers=1, probe_radius=auto)
    assert batch.probe_radius == auto
    full = batch.intra.sum(axis=1) + batch.outer.sum(axis=1)
    probe = batch.probe_intra.sum(axis=1) + batch.probe_outer.sum(axis=1)
    # Restricting to the probe disk can only remove power.
    assert np.all(probe <= full * (1.0 + 1e-12))
    # The doubled window adds at most the designed 0.1% tail (plus noise).
    rel_gap = (full.mean() - probe.mean()) / full.mean()
    assert 0.0 <= rel_gap < 0.005


# ---------------------------------------------------------------------------
# Worker resolution


def test_resolve_workers_env_cases(monkeypatch):
    monkeypatch.delenv("HCN_COMP_THREADS", raising=False)
    assert resolve_workers(None) == (os.cpu_count() or 1)
    assert resolve_workers(1) == 1

    monkeypatch.setenv("HCN_COMP_THREADS", "1")
    assert resolve_workers(8) == 1

    monkeypatch.setenv("HCN_COMP_THREADS", "64")
    assert resolve_workers(3) == 3

    monkeypatch.setenv("HCN_COMP_THREADS", "abc")
    with pytest.raises(ConfigError) as exc:
        resolve_workers(2)
    assert exc.value.field == "HCN_COMP_THREADS"

    monkeypatch.setenv("HCN_COMP_THREADS", "0")
    with pytest.raises(ConfigError):
        resolve_workers(2)
