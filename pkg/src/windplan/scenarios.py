"""Declarative scenario grid and results-matrix runner.

The builtin grid holds the 14 standard scenarios: four minimization
variants (LCOE, scenicness, network length, all criteria) at the 105 GW
total target, each with and without equity floors, plus the three
single-criterion variants at the 200 GW target, again with and without
equity. Capacity targets scale down with a single factor for desk-scale
synthetic instances.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .domain import InfeasibleError, Instance, PlanError
from .metrics import regional_equity, south_quota
from .objective import Weights, scale_candidates
from .solver import Constraints, Selection, equity_floors, municipal_potentials, solve

BASE_TOTAL_MW = 105_000.0
HIGH_TOTAL_MW = 200_000.0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    weights: Weights
    equity: bool
    total_capacity_2050: float  # MW, national total (existing + added)


@dataclass
class ScenarioResult:
    name: str
    weights: Weights
    equity: bool
    total_capacity_mw: float
    added_target_mw: float
    n_sites: int
    mean_lcoe: float
    mean_scenicness: float
    mean_network_length_km: float
    equity_pct: float
    south_quota_pct: float
    objective: float
    lower_bound: float
    gap: float
    runtime_s: float
    selection: Selection | None
    error: str | None = None


_CRITERIA_WEIGHTS = {
    "LCOE": Weights(1.0, 0.0, 0.0),
    "Scenic": Weights(0.0, 1.0, 0.0),
    "Network": Weights(0.0, 0.0, 1.0),
    "all": Weights(1.0, 1.0, 1.0),
}


def builtin_grid() -> list[ScenarioConfig]:
    """The 14 standard scenarios (no all-criteria rows at the high target)."""
    grid = []
    for crit in ("LCOE", "Scenic", "Network", "all"):
        for equity in (False, True):
            name = f"Base_{crit}" + ("_E" if equity else "")
            grid.append(ScenarioConfig(name, _CRITERIA_WEIGHTS[crit], equity, BASE_TOTAL_MW))
    for crit in ("LCOE", "Scenic", "Network"):
        for equity in (False, True):
            name = f"High_{crit}" + ("_E" if equity else "")
            grid.append(ScenarioConfig(name, _CRITERIA_WEIGHTS[crit], equity, HIGH_TOTAL_MW))
    return grid


def grid_from_rows(rows: list[dict]) -> list[ScenarioConfig]:
    """Build a grid from JSON rows {name, w_c, w_s, w_l, equity, total_capacity_mw}."""
    grid = []
    names = set()
    for r in rows:
        cfg = ScenarioConfig(
            name=str(r["name"]),
            weights=Weights(float(r["w_c"]), float(r["w_s"]), float(r["w_l"])),
            equity=bool(r["equity"]),
            total_capacity_2050=float(r["total_capacity_mw"]),
        )
        if cfg.name in names:
            raise PlanError(f"duplicate scenario name {cfg.name!r}")
        names.add(cfg.name)
        grid.append(cfg)
    return grid


def run_grid(instance: Instance, grid: list[ScenarioConfig],
             scale: float = 1.0) -> list[ScenarioResult]:
    """Solve every scenario; results ordered by scenario name.

    A failing scenario is recorded in-row and the grid continues;
    instance-wide infeasibility (capacity target above total potential)
    aborts with the offending scenario named.
    """
    existing_total = sum(m.existing_capacity for m in instance.municipalities)
    potential_total = sum(c.capacity for c in instance.candidates)
    pots = municipal_potentials(instance)
    needs_scaling = any(len(cfg.weights.active()) > 1 for cfg in grid)
    scaled = scale_candidates(instance.candidates) if needs_scaling else None
    floors_cache: dict[float, dict[int, float]] = {}
    ordered = sorted(grid, key=lambda c: c.name)
    jobs = []
    for cfg in ordered:
        total = cfg.total_capacity_2050 * scale
        added = total - existing_total
        if added <= 0:
            raise PlanError(
                f"scenario {cfg.name}: scaled total target {total} MW does not exceed "
                f"existing capacity {existing_total} MW")
        if added > potential_total:
            raise InfeasibleError(
                f"scenario {cfg.name}: added target {added:.3f} MW exceeds total "
                f"potential {potential_total:.3f} MW")
        floors = None
        if cfg.equity:
            if total not in floors_cache:
                floors_cache[total] = equity_floors(instance.municipalities, total, pots)
            floors = floors_cache[total]
        jobs.append((cfg, total, added, Constraints(cap_obj=added, equity_floors=floors)))

    def run_one(job) -> ScenarioResult:
        cfg, total, added, constraints = job
        t_start = time.perf_counter()
        try:
            sel = solve(instance, cfg.weights, constraints, scaled)
            eq = regional_equity(sel, instance)
            return ScenarioResult(
                name=cfg.name, weights=cfg.weights, equity=cfg.equity,
                total_capacity_mw=total, added_target_mw=added,
                n_sites=sel.n_sites,
                mean_lcoe=sel.means.lcoe,
                mean_scenicness=sel.means.scenicness,
                mean_network_length_km=sel.means.network_length_km,
                equity_pct=eq.regional_equity_pct,
                south_quota_pct=south_quota(sel, instance),
                objective=sel.objective_value,
                lower_bound=sel.lower_bound,
                gap=sel.gap,
                runtime_s=time.perf_counter() - t_start,
                selection=sel,
            )
        except PlanError as e:
            return ScenarioResult(
                name=cfg.name, weights=cfg.weights, equity=cfg.equity,
                total_capacity_mw=total, added_target_mw=added,
                n_sites=0, mean_lcoe=0.0, mean_scenicness=0.0,
                mean_network_length_km=0.0, equity_pct=0.0, south_quota_pct=0.0,
                objective=0.0, lower_bound=0.0, gap=0.0,
                runtime_s=time.perf_counter() - t_start,
                selection=None, error=str(e))

    workers = max(1, int(os.environ.get("PLAN_THREADS", os.cpu_count() or 1)))
    if workers == 1 or len(jobs) == 1:
        return [run_one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, jobs))
