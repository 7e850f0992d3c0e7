"""Scenario records: unit conversion, validation, geometry, JSON round trip."""

import json
import math

import pytest

from hcn_comp.config import (
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
from hcn_comp.errors import ConfigError
from hcn_comp.fading import Deterministic, NakagamiPower
from hcn_comp.presets import get_preset, preset_names, table1, twotier_fig3


def _tier(**overrides):
    base = dict(
        density=4e-6,
        power=10**4.6,
        alpha=4.3,
        cluster_thresh=10**-6.96,
        activation_thresh=10**-6.96,
        fading=NakagamiPower(1.8),
    )
    base.update(overrides)
    return TierParams(**base)


# ---------------------------------------------------------------------------
# Conversions


def test_db_conversions():
    assert dbm_to_mw(0.0) == 1.0
    assert abs(dbm_to_mw(46.0) - 10**4.6) < 1e-9 * 10**4.6
    assert db_to_ratio(10.0) == 10.0
    for value in [0.03, 1.0, 7.7, 4e3]:
        assert abs(db_to_ratio(ratio_to_db(value)) - value) <= 1e-12 * value
    for db in [-31.0, 0.0, 3.0, 46.0]:
        assert abs(mw_to_dbm(dbm_to_mw(db)) - db) <= 1e-12 * max(1.0, abs(db))


def test_from_db_reference_values():
    tier = TierParams.from_db(4.0, 46.0, 4.3, -69.6, t_rel_db=0.0,
                              fading=NakagamiPower(1.8))
    assert abs(tier.density - 4e-6) < 1e-18
    assert abs(tier.power - 10**4.6) < 1e-6
    assert abs(tier.cluster_thresh - 10**-6.96) < 1e-19
    tier2 = TierParams.from_db(16.0, 30.0, 3.8, -63.1, t_rel_db=3.0,
                               fading=NakagamiPower(2.3))
    assert abs(tier2.activation_thresh - 10 ** ((-63.1 + 3.0) / 10.0)) < 1e-19


def test_from_db_threshold_exclusivity():
    with pytest.raises(ConfigError):
        TierParams.from_db(4.0, 46.0, 4.3, -69.6, t_dbm=-69.6, t_rel_db=0.0,
                           fading=Deterministic())
    with pytest.raises(ConfigError):
        TierParams.from_db(4.0, 46.0, 4.3, -69.6, fading=Deterministic())


def test_from_db_minus_inf_t_means_always_active():
    tier = TierParams.from_db(4.0, 46.0, 4.3, -69.6, t_dbm=float("-inf"),
                              fading=Deterministic())
    assert tier.activation_thresh == 0.0


# ---------------------------------------------------------------------------
# Validation


@pytest.mark.parametrize(
    "field, overrides",
    [
        ("density", dict(density=0.0)),
        ("density", dict(density=-1.0)),
        ("power", dict(power=0.0)),
        ("power", dict(power=float("nan"))),
        ("alpha", dict(alpha=2.0)),
        ("alpha", dict(alpha=1.5)),
        ("cluster_thresh", dict(cluster_thresh=0.0)),
        ("activation_thresh", dict(activation_thresh=-0.1)),
    ],
)
def test_tier_validation_names_field(field, overrides):
    with pytest.raises(ConfigError) as exc_info:
        _tier(**overrides)
    assert exc_info.value.field == field


def test_network_mode_validation():
    tier = _tier()
    net = NetworkConfig(tiers=(tier,))
    assert net.modes == (MODE_FR,)
    cs = net.with_mode(MODE_CS)
    assert cs.modes == (MODE_CS,)
    assert cs.tiers == net.tiers
    with pytest.raises(ConfigError) as exc_info:
        NetworkConfig(tiers=(tier,), modes=("bogus",))
    assert "mode" in exc_info.value.field
    with pytest.raises(ConfigError):
        NetworkConfig(tiers=(tier,), modes=(MODE_FR, MODE_FR))
    with pytest.raises(ConfigError):
        NetworkConfig(tiers=())


def test_network_subset():
    net = table1()
    sub = net.subset((0, 2))
    assert sub.n_tiers == 2
    assert sub.tiers == (net.tiers[0], net.tiers[2])
    assert sub.modes == (net.modes[0], net.modes[2])
    with pytest.raises(ConfigError):
        net.subset((0, 3))
    with pytest.raises(ConfigError):
        net.subset(())


# ---------------------------------------------------------------------------
# Geometry


def test_cluster_radius_defining_property():
    tier = _tier()
    r = cluster_radius(tier)
    # At the cluster edge the average received power equals the threshold.
    assert abs(tier.power * r ** (-tier.alpha) - tier.cluster_thresh) \
        <= 1e-12 * tier.cluster_thresh
    assert abs(r - 487.9) < 1.0


def test_cluster_radius_unit_distance():
    tier = _tier(cluster_thresh=10**4.6)  # threshold equals transmit power
    assert cluster_radius(tier) == 1.0


def test_cluster_radius_monotone_in_threshold():
    radii = [cluster_radius(_tier(cluster_thresh=d))
             for d in [1e-8, 1e-7, 1e-6, 1e-5]]
    assert all(a > b for a, b in zip(radii, radii[1:]))


def test_expected_cluster_size_reference_and_scaling():
    net = table1()
    sizes = [expected_cluster_size(t) for t in net.tiers]
    for size, anchor in zip(sizes, (3.0, 4.0, 2.0)):
        assert abs(size - anchor) <= 0.02 * anchor
    tier = net.tiers[0]
    doubled = TierParams(
        density=2.0 * tier.density,
        power=tier.power,
        alpha=tier.alpha,
        cluster_thresh=tier.cluster_thresh,
        activation_thresh=tier.activation_thresh,
        fading=tier.fading,
    )
    assert abs(expected_cluster_size(doubled) - 2.0 * sizes[0]) \
        <= 1e-12 * sizes[0]


# ---------------------------------------------------------------------------
# JSON scenarios


def test_json_round_trip(tmp_path):
    net = table1()
    data = network_to_dict(net)
    back = network_from_dict(data)
    for t_in, t_out in zip(net.tiers, back.tiers):
        for field in ("density", "power", "alpha", "cluster_thresh",
                      "activation_thresh"):
            a, b = getattr(t_in, field), getattr(t_out, field)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a)), field
        assert type(t_in.fading) is type(t_out.fading)
    assert back.modes == net.modes

    path = tmp_path / "scenario.json"
    dump_network(net, path)
    loaded = load_network(path)
    assert network_to_dict(loaded) == network_to_dict(net)


def test_json_null_activation_threshold():
    data = network_to_dict(table1())
    data["tiers"][0]["t_dbm"] = None
    net = network_from_dict(data)
    assert net.tiers[0].activation_thresh == 0.0


def test_json_unknown_field_rejected():
    data = network_to_dict(table1())
    data["tiers"][1]["mystery"] = 1.0
    with pytest.raises(ConfigError) as exc_info:
        network_from_dict(data)
    assert "mystery" in str(exc_info.value)


def test_json_missing_field_names_location():
    data = network_to_dict(table1())
    del data["tiers"][2]["alpha"]
    with pytest.raises(ConfigError) as exc_info:
        network_from_dict(data)
    assert exc_info.value.field == "tiers[2].alpha"


def test_json_invalid_value_names_json_field():
    data = network_to_dict(table1())
    data["tiers"][1]["delta_dbm"] = "soup"
    with pytest.raises(ConfigError) as exc_info:
        network_from_dict(data)
    assert exc_info.value.field == "tiers[1].delta_dbm"

    data = network_to_dict(table1())
    data["tiers"][0]["density_per_km2"] = -4.0
    with pytest.raises(ConfigError) as exc_info:
        network_from_dict(data)
    assert exc_info.value.field == "tiers[0].density_per_km2"


def test_json_bad_fading_spec():
    data = network_to_dict(table1())
    data["tiers"][0]["fading"] = {"nakagami_m": 0.2}
    with pytest.raises(ConfigError) as exc_info:
        network_from_dict(data)
    assert exc_info.value.field == "tiers[0].fading.nakagami_m"
    data["tiers"][0]["fading"] = {"rician": 3.0}
    with pytest.raises(ConfigError):
        network_from_dict(data)


def test_load_network_error_paths(tmp_path):
    missing = tmp_path / "missing.json"
    with pytest.raises(ConfigError):
        load_network(missing)
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"tiers\": [\n")
    with pytest.raises(ConfigError) as exc_info:
        load_network(bad)
    assert "line" in str(exc_info.value)


# ---------------------------------------------------------------------------
# Presets


def test_presets_registry():
    assert list(preset_names()) == sorted(preset_names())
    assert set(preset_names()) == {"table1", "twotier-fig3"}
    assert network_to_dict(get_preset("table1")) == network_to_dict(table1())
    with pytest.raises(ConfigError) as exc_info:
        get_preset("nonesuch")
    assert "table1" in str(exc_info.value)


def test_twotier_preset_geometry():
    net = twotier_fig3()
    assert net.n_tiers == 2
    assert abs(expected_cluster_size(net.tiers[1]) - 5.0) < 1e-9
    assert net.modes == (MODE_FR, MODE_FR)
    # Equal clustering and activation thresholds on the swept tier.
    assert net.tiers[1].activation_thresh == net.tiers[1].cluster_thresh
