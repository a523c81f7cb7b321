import numpy as np
import pytest

from conftest import mk_instance, mk_mun, mk_site
from windplan.domain import PlanError
from windplan.metrics import (
    RADAR_AXES,
    gini_pairwise,
    gini_sorted,
    radar_values,
    regional_equity,
    regional_stats,
    south_quota,
)
from windplan.solver import Means, Selection, Totals


def _selection(site_ids, instance):
    by_id = {c.site_id: c for c in instance.candidates}
    sites = [by_id[s] for s in site_ids]
    cap = sum(s.capacity for s in sites)
    return Selection(site_ids=tuple(sorted(site_ids)), objective_value=0.0,
                     totals=Totals(cap, 0.0, 0.0, 0.0),
                     means=Means(0.0, 0.0, 0.0, 0.0), lower_bound=0.0, gap=0.0)


def test_gini_uniform_is_zero():
    assert gini_sorted(np.full(10, 3.7)) == 0.0


def test_gini_two_way_split():
    assert abs(gini_sorted(np.array([0.0, 5.0])) - 0.5) <= 1e-12


def test_gini_single_holder_of_four():
    assert abs(gini_sorted(np.array([0.0, 0.0, 0.0, 8.0])) - 0.75) <= 1e-12


def test_gini_sorted_matches_pairwise():
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = rng.uniform(0, 10, rng.integers(2, 60))
        assert abs(gini_sorted(x) - gini_pairwise(x)) <= 1e-12


def test_gini_empty_raises():
    with pytest.raises(PlanError):
        gini_sorted(np.array([]))


def _equity_instance():
    sites = [mk_site(1, mun=1, capacity=4.0), mk_site(2, mun=2, capacity=4.0)]
    muns = [mk_mun(1, population=100.0), mk_mun(2, population=100.0),
            mk_mun(3, population=0.0)]
    return mk_instance(sites, municipalities=muns)


def test_regional_equity_uniform_distribution():
    inst = _equity_instance()
    rep = regional_equity(_selection([1, 2], inst), inst)
    assert rep.regional_equity_pct == 100.0
    assert rep.excluded_zero_population == 1
    assert rep.n_municipalities == 2


def test_regional_equity_concentrated():
    inst = _equity_instance()
    rep = regional_equity(_selection([1], inst), inst)
    assert abs(rep.gini - 0.5) <= 1e-12
    assert abs(rep.regional_equity_pct - 50.0) <= 1e-12


def test_regional_equity_existing_toggle():
    sites = [mk_site(1, mun=1, capacity=2.0)]
    muns = [mk_mun(1, population=10.0, existing=2.0),
            mk_mun(2, population=10.0)]
    inst = mk_instance(sites, municipalities=muns)
    with_ex = regional_equity(_selection([], inst), inst, include_existing=True)
    without = regional_equity(_selection([], inst), inst, include_existing=False)
    assert with_ex.regional_equity_pct == 50.0
    assert without.all_zero
    assert without.regional_equity_pct == 100.0


def test_south_quota_counts_added_only():
    sites = [mk_site(1, mun=1, capacity=3.0), mk_site(2, mun=2, capacity=1.0)]
    muns = [mk_mun(1, region="South"), mk_mun(2)]
    inst = mk_instance(sites, municipalities=muns)
    assert south_quota(_selection([1, 2], inst), inst) == 75.0
    assert south_quota(_selection([], inst), inst) == 0.0


def test_regional_stats():
    sites = [mk_site(1, mun=1, capacity=3.0, scenicness=2.0),
             mk_site(2, mun=2, capacity=1.0, scenicness=6.0)]
    muns = [mk_mun(1, state=1, area=100.0), mk_mun(2, state=1, area=100.0),
            mk_mun(3, state=2, area=50.0)]
    inst = mk_instance(sites, municipalities=muns)
    stats = regional_stats(_selection([1, 2], inst), inst)
    s1, s2 = stats.per_state
    assert s1.state_id == 1
    assert s1.turbines_per_1000_km2 == 2 / 200.0 * 1000.0
    assert s1.capacity_share_pct == 100.0
    assert s1.mean_scenicness == 4.0
    assert s2.capacity_share_pct == 0.0
    assert s2.mean_scenicness is None


def test_radar_two_scenarios_hit_endpoints():
    results = {
        "a": {"mean_lcoe": 4.0, "mean_scenicness": 2.0,
              "mean_network_length_km": 1.0, "equity_pct": 10.0},
        "b": {"mean_lcoe": 6.0, "mean_scenicness": 1.0,
              "mean_network_length_km": 3.0, "equity_pct": 30.0},
    }
    radar = radar_values(results)
    for axis in RADAR_AXES:
        vals = sorted(radar.values[n][axis] for n in results)
        assert vals == [0.0, 1.0]
    assert radar.degenerate_axes == ()


def test_radar_degenerate_axis():
    results = {
        "a": {"mean_lcoe": 4.0, "mean_scenicness": 2.0,
              "mean_network_length_km": 1.0, "equity_pct": 10.0},
        "b": {"mean_lcoe": 4.0, "mean_scenicness": 5.0,
              "mean_network_length_km": 2.0, "equity_pct": 20.0},
    }
    radar = radar_values(results)
    assert radar.degenerate_axes == ("mean_lcoe",)
    assert all(radar.values[n]["mean_lcoe"] == 0.0 for n in results)


def test_radar_needs_two_scenarios():
    with pytest.raises(PlanError):
        radar_values({"a": {ax: 1.0 for ax in RADAR_AXES}}, norm_group=["a"])
