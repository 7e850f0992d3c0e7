"""Coverage and design metrics for non-coherent joint transmission in
multi-tier cellular networks.

The package pairs a semi-closed-form analytic pipeline (moment-matched Gamma
interference, exact signal Laplace transforms, complete-Bell series bounds)
with an independent seeded Monte Carlo simulator, plus a CSV-emitting CLI.
"""

from .config import (
    MODE_CS,
    MODE_FR,
    NetworkConfig,
    TierParams,
    cluster_radius,
    db_to_ratio,
    dbm_to_mw,
    dump_network,
    expected_cluster_size,
    load_network,
    mw_to_dbm,
    network_from_dict,
    network_to_dict,
    ratio_to_db,
)
from .coverage import (
    CoverageBounds,
    CoverageQuery,
    conditional_coverage_bounds,
    conditional_log_laplace,
    coverage_bounds,
    coverage_probability,
    log_laplace_derivative,
    log_laplace_signal,
    spectral_efficiency,
    weighted_signal_moments,
)
from .errors import (
    ConfigError,
    InsufficientSamplesError,
    NumericOverflowError,
    OrderError,
    QuadratureError,
)
from .fading import Deterministic, FadingDist, NakagamiPower, expect, sample
from .interference import (
    GammaApprox,
    fit_gamma,
    interference_moments,
    truncated_tail_mean,
)
from .metrics import (
    LoadQuery,
    load_increase,
    mean_rate_loss,
    rate_cdf,
    resource_saving,
)
from .presets import get_preset, preset_names, table1, twotier_fig3
from .simulate import (
    Estimate,
    SimConfig,
    TrialBatch,
    TrialResult,
    auto_window_radius,
    estimate_conditional_laplace,
    estimate_coverage,
    estimate_interference_moments,
    estimate_rate_cdf,
    estimate_signal_laplace,
    resolve_workers,
    run_batch,
    sample_trial,
)

__version__ = "0.1.0"
