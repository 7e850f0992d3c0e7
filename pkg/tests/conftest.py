"""Shared fixtures: reference scenarios and session-wide Monte Carlo batches.

The heavy batches are session-scoped so the expensive runs happen at most
once per test session, shared by every consumer including the acceptance
gate.  Seeds are fixed constants: estimates quoted in test tolerances were
sized for these exact batches.
"""

import numpy as np
import pytest

from hcn_comp.config import cluster_radius, db_to_ratio
from hcn_comp.presets import table1, twotier_fig3
from hcn_comp.simulate import SimConfig, run_batch

#: dB thresholds of the reference coverage grid (inclusive endpoints).
BETA_GRID_DB = tuple(float(b) for b in range(-10, 22, 2))

#: Trial budget for the anchor-grade batches.
BIG_TRIALS = 100_000

#: Master seed used by every session batch.
MASTER_SEED = 20230823


def beta_grid_linear() -> tuple[float, ...]:
    return tuple(db_to_ratio(b) for b in BETA_GRID_DB)


@pytest.fixture(scope="session")
def table1_net():
    return table1()


@pytest.fixture(scope="session")
def twotier_net():
    return twotier_fig3()


@pytest.fixture(scope="session")
def big_sim(table1_net):
    """Anchor-grade plan on the three-tier scenario: automatic window."""
    return SimConfig(
        table1_net,
        trials=BIG_TRIALS,
        master_seed=MASTER_SEED,
        beta_grid=beta_grid_linear(),
    )


@pytest.fixture(scope="session")
def big_batch(big_sim):
    return run_batch(big_sim)


@pytest.fixture(scope="session")
def cluster_sim(table1_net):
    """Small-window plan: cluster statistics only, so runs in seconds."""
    window = 2.0 * max(cluster_radius(t) for t in table1_net.tiers)
    return SimConfig(
        table1_net, trials=BIG_TRIALS, master_seed=MASTER_SEED, window_radius=window
    )


@pytest.fixture(scope="session")
def cluster_batch(cluster_sim):
    return run_batch(cluster_sim)


@pytest.fixture(scope="session")
def twotier_sim(twotier_net):
    return SimConfig(twotier_net, trials=30_000, master_seed=MASTER_SEED)


@pytest.fixture(scope="session")
def twotier_batch(twotier_sim):
    return run_batch(twotier_sim)


def assert_close(actual, expected, rel=0.0, abs_tol=0.0, label=""):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    tol = abs_tol + rel * np.abs(expected)
    err = np.abs(actual - expected)
    assert np.all(err <= tol), (
        f"{label or 'value'} mismatch: actual {actual!r}, expected {expected!r}, "
        f"|err| {err!r} > tol {tol!r}"
    )
