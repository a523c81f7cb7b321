import pytest

from windplan.domain import InfeasibleError, PlanError
from windplan.geoprep import prep_instance
from windplan.scenarios import (
    BASE_TOTAL_MW,
    HIGH_TOTAL_MW,
    builtin_grid,
    grid_from_rows,
    run_grid,
)
from windplan.synth import SynthSpec, generate


def small_instance(seed=101, n_sites=300):
    spec = SynthSpec(seed=seed, n_sites=n_sites, n_municipalities=25,
                     n_states=4, n_transformers=8, n_existing=6)
    inst, _ = prep_instance(generate(spec))
    return inst


def test_builtin_grid_composition():
    grid = builtin_grid()
    assert len(grid) == 14
    names = {c.name for c in grid}
    expected = {f"Base_{k}{s}" for k in ("LCOE", "Scenic", "Network", "all")
                for s in ("", "_E")}
    expected |= {f"High_{k}{s}" for k in ("LCOE", "Scenic", "Network")
                 for s in ("", "_E")}
    assert names == expected
    base = [c for c in grid if c.name.startswith("Base")]
    assert all(c.total_capacity_2050 == BASE_TOTAL_MW for c in base)
    high = [c for c in grid if c.name.startswith("High")]
    assert all(c.total_capacity_2050 == HIGH_TOTAL_MW for c in high)
    assert sum(c.equity for c in grid) == 7


def test_grid_from_rows():
    rows = [{"name": "x", "w_c": 1, "w_s": 0, "w_l": 0, "equity": False,
             "total_capacity_mw": 50.0}]
    grid = grid_from_rows(rows)
    assert grid[0].name == "x"
    assert grid[0].weights.w_c == 1.0
    with pytest.raises(PlanError, match="duplicate"):
        grid_from_rows(rows + rows)


def test_run_grid_results_ordered_and_feasible():
    inst = small_instance()
    potential = sum(c.capacity for c in inst.candidates)
    existing = sum(m.existing_capacity for m in inst.municipalities)
    scale = (existing + 0.4 * potential) / BASE_TOTAL_MW
    results = run_grid(inst, builtin_grid(), scale=scale)
    assert [r.name for r in results] == sorted(r.name for r in results)
    assert len(results) == 14
    for r in results:
        assert r.error is None, r.error
        assert r.selection is not None
        assert r.selection.totals.capacity_mw >= r.added_target_mw - 1e-9
        assert r.gap >= 0.0


def test_run_grid_sequential_matches_threaded(monkeypatch):
    inst = small_instance(n_sites=150)
    existing = sum(m.existing_capacity for m in inst.municipalities)
    potential = sum(c.capacity for c in inst.candidates)
    scale = (existing + 0.3 * potential) / BASE_TOTAL_MW
    grid = [c for c in builtin_grid() if c.name.startswith("Base")]
    threaded = run_grid(inst, grid, scale=scale)
    monkeypatch.setenv("PLAN_THREADS", "1")
    sequential = run_grid(inst, grid, scale=scale)
    for a, b in zip(threaded, sequential):
        assert a.name == b.name
        assert a.selection.site_ids == b.selection.site_ids
        assert a.objective == b.objective


def test_run_grid_target_below_existing_errors():
    inst = small_instance(n_sites=120)
    with pytest.raises(PlanError, match="existing"):
        run_grid(inst, builtin_grid(), scale=1e-9)


def test_run_grid_target_above_potential_aborts():
    inst = small_instance(n_sites=120)
    with pytest.raises(InfeasibleError, match="potential"):
        run_grid(inst, builtin_grid(), scale=1.0)
