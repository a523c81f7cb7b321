import numpy as np
import pytest

from conftest import mk_instance, mk_mun, mk_site
from windplan.domain import InfeasibleError, Instance, PlanError
from windplan.geoprep import prep_instance
from windplan.objective import Weights
from windplan.solver import (
    BRUTE_FORCE_LIMIT,
    Constraints,
    brute_force,
    equity_floors,
    municipal_potentials,
    pareto_sweep,
    solve,
    verify_selection,
)
from windplan.synth import SynthSpec, generate

W_LCOE = Weights(1.0, 0.0, 0.0)


def rand_instance(seed, n_sites, n_muns=3):
    spec = SynthSpec(seed=seed, n_sites=n_sites, n_municipalities=n_muns,
                     n_states=2, n_transformers=3, n_existing=2,
                     rho_lcoe_scenicness=0.0)
    inst, _ = prep_instance(generate(spec))
    return inst


def test_three_site_example(abc_instance):
    sel = solve(abc_instance, W_LCOE, Constraints(cap_obj=4.0))
    assert sel.site_ids == (1, 2)
    assert sel.objective_value == 4.0
    assert sel.totals.capacity_mw == 4.0


def test_zero_target_empty_selection(abc_instance):
    sel = solve(abc_instance, W_LCOE, Constraints(cap_obj=0.0))
    assert sel.site_ids == ()
    assert sel.objective_value == 0.0


def test_target_above_potential_infeasible(abc_instance):
    with pytest.raises(InfeasibleError):
        solve(abc_instance, W_LCOE, Constraints(cap_obj=9.0))


def test_selection_invariants(abc_instance):
    sel = solve(abc_instance, W_LCOE, Constraints(cap_obj=5.0))
    by_id = {c.site_id: c for c in abc_instance.candidates}
    sites = [by_id[s] for s in sel.site_ids]
    assert sel.totals.capacity_mw == sum(s.capacity for s in sites)
    assert sel.totals.lcoe == sum(s.lcoe for s in sites)
    assert sel.objective_value >= sel.lower_bound
    assert sel.gap >= 0.0
    assert verify_selection(sel, abc_instance, Constraints(cap_obj=5.0))


def test_brute_force_refusal():
    inst = rand_instance(1, BRUTE_FORCE_LIMIT + 4)
    with pytest.raises(PlanError):
        brute_force(inst, W_LCOE, Constraints(cap_obj=1.0))


def test_brute_force_tie_break_lexicographic():
    # sites 1 and 2 are interchangeable; the optimum must use site 1
    sites = [mk_site(1, lcoe=2.0, capacity=3.0), mk_site(2, lcoe=2.0, capacity=3.0),
             mk_site(3, lcoe=9.0, capacity=3.0)]
    inst = mk_instance(sites)
    sel = brute_force(inst, W_LCOE, Constraints(cap_obj=3.0))
    assert sel.site_ids == (1,)
    sel = solve(inst, W_LCOE, Constraints(cap_obj=3.0))
    assert sel.site_ids == (1,)


def test_cap_below_achievable_names_criterion(abc_instance):
    con = Constraints(cap_obj=4.0, m_s=1.0)  # min scenicness total is 8.0
    with pytest.raises(InfeasibleError, match="scenicness"):
        solve(abc_instance, W_LCOE, con)


def test_cap_constrained_solution_respects_cap():
    inst = rand_instance(5, 14)
    base = solve(inst, W_LCOE, Constraints(cap_obj=10.0))
    cap = base.totals.scenicness * 1.1
    con = Constraints(cap_obj=10.0, m_s=cap)
    sel = solve(inst, W_LCOE, con)
    assert verify_selection(sel, inst, con)
    assert sel.totals.scenicness <= cap + 1e-9


def test_equity_floor_clamping_cases():
    muns = [mk_mun(1, population=75.0, existing=10.0),
            mk_mun(2, population=25.0, existing=0.0)]
    pots = {1: 1000.0, 2: 1000.0}
    floors = equity_floors(muns, 100.0, pots)
    assert floors == {1: 65.0, 2: 25.0}
    # existing above the share clamps to zero
    muns = [mk_mun(1, population=50.0, existing=80.0), mk_mun(2, population=50.0)]
    floors = equity_floors(muns, 100.0, {1: 1000.0, 2: 1000.0})
    assert floors[1] == 0.0
    # and the potential caps the floor
    muns = [mk_mun(1, population=40.0), mk_mun(2, population=60.0)]
    floors = equity_floors(muns, 100.0, {1: 12.0, 2: 1000.0})
    assert floors[1] == 12.0


def test_floors_are_satisfied():
    inst = rand_instance(9, 16, n_muns=3)
    pots = municipal_potentials(inst)
    total = 0.6 * sum(pots.values())
    floors = equity_floors(inst.municipalities, total, pots)
    existing = sum(m.existing_capacity for m in inst.municipalities)
    con = Constraints(cap_obj=max(total - existing, 0.0), equity_floors=floors)
    sel = solve(inst, W_LCOE, con)
    assert verify_selection(sel, inst, con)


def test_floor_in_municipality_without_candidates():
    inst = mk_instance([mk_site(1, mun=1)], municipalities=[mk_mun(1), mk_mun(2)])
    con = Constraints(cap_obj=1.0, equity_floors={2: 1.0})
    with pytest.raises(InfeasibleError):
        solve(inst, W_LCOE, con)


def test_scale_argmin_invariance():
    inst = rand_instance(13, 15)
    con = Constraints(cap_obj=12.0)
    sel = solve(inst, W_LCOE, con)
    from dataclasses import replace
    scaled = Instance(
        candidates=[replace(c, lcoe=c.lcoe * 7.0) for c in inst.candidates],
        municipalities=inst.municipalities, existing=inst.existing,
        transformers=inst.transformers)
    sel7 = solve(scaled, W_LCOE, con)
    assert sel7.site_ids == sel.site_ids
    assert abs(sel7.objective_value - 7.0 * sel.objective_value) < 1e-9


def test_determinism():
    inst = rand_instance(21, 17)
    con = Constraints(cap_obj=15.0)
    a = solve(inst, Weights(1.0, 1.0, 1.0), con)
    b = solve(inst, Weights(1.0, 1.0, 1.0), con)
    assert a.site_ids == b.site_ids
    assert a.objective_value == b.objective_value


def test_equity_floor_dominance():
    from windplan.metrics import regional_equity
    inst = rand_instance(33, 60, n_muns=8)
    pots = municipal_potentials(inst)
    total = 0.5 * sum(pots.values())
    existing = sum(m.existing_capacity for m in inst.municipalities)
    added = max(total - existing, 1.0)
    plain = solve(inst, W_LCOE, Constraints(cap_obj=added))
    floors = equity_floors(inst.municipalities, total, pots)
    floored = solve(inst, W_LCOE, Constraints(cap_obj=added, equity_floors=floors))
    eq_plain = regional_equity(plain, inst).regional_equity_pct
    eq_floored = regional_equity(floored, inst).regional_equity_pct
    assert eq_floored >= eq_plain


def test_heuristic_path_feasible_and_bounded():
    # above the enumeration limit: heuristic + LP bound path
    inst = rand_instance(41, 120, n_muns=10)
    con = Constraints(cap_obj=0.4 * sum(c.capacity for c in inst.candidates))
    sel = solve(inst, Weights(1.0, 1.0, 1.0), con)
    assert verify_selection(sel, inst, con)
    assert sel.objective_value >= sel.lower_bound
    assert np.isfinite(sel.gap)


def test_heuristic_lagrangian_cap_path():
    inst = rand_instance(43, 150, n_muns=10)
    cap_obj = 0.35 * sum(c.capacity for c in inst.candidates)
    base = solve(inst, W_LCOE, Constraints(cap_obj=cap_obj))
    cap = base.totals.network_length_km * 0.8
    con = Constraints(cap_obj=cap_obj, m_l=cap)
    sel = solve(inst, W_LCOE, con)
    assert verify_selection(sel, inst, con)
    assert sel.totals.network_length_km <= cap + 1e-9 * max(1.0, cap)
    assert sel.objective_value >= base.objective_value - 1e-9


def test_pareto_front_shape_and_feasibility():
    inst = rand_instance(55, 14)
    cap_obj = 0.4 * sum(c.capacity for c in inst.candidates)
    front = pareto_sweep(inst, "lcoe", "scenicness",
                         Constraints(cap_obj=cap_obj), steps=6)
    assert front.points[0].step == 0
    mins = [p.achieved_min for p in front.points]
    # tighter caps can only worsen the achieved minimum
    assert all(a <= b for a, b in zip(mins, mins[1:]))
    for p in front.points[1:]:
        assert p.selection.totals.scenicness <= p.cap + 1e-9 * max(1.0, p.cap)


def test_pareto_sweep_rejects_bad_args():
    inst = rand_instance(55, 8)
    con = Constraints(cap_obj=1.0)
    with pytest.raises(PlanError):
        pareto_sweep(inst, "lcoe", "lcoe", con, steps=3)
    with pytest.raises(PlanError):
        pareto_sweep(inst, "lcoe", "scenicness", con, steps=0)
    with pytest.raises(PlanError):
        pareto_sweep(inst, "lcoe", "color", con, steps=3)


def test_pareto_truncation_flag():
    inst = rand_instance(57, 10)
    cap_obj = 0.7 * sum(c.capacity for c in inst.candidates)
    front = pareto_sweep(inst, "lcoe", "scenicness",
                         Constraints(cap_obj=cap_obj), steps=40)
    # forty 10% cuts push the cap far below the feasibility limit
    assert front.truncated
    assert len(front.points) < 40
