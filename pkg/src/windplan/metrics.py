"""Equity, south-quota and regional aggregation statistics.

Regional equity is 1 minus the Gini index of installed capacity per
inhabitant across municipalities, in percent. Every municipality in the
instance counts toward the index; zero-population municipalities are
excluded from the per-inhabitant vector (and disclosed), since capacity
per inhabitant is undefined there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Instance, PlanError
from .solver import Selection

RADAR_AXES = ("mean_lcoe", "mean_scenicness", "mean_network_length_km", "equity_pct")


@dataclass
class EquityReport:
    x: dict[int, float]  # municipality -> MW per inhabitant
    gini: float
    regional_equity_pct: float
    n_municipalities: int
    excluded_zero_population: int
    all_zero: bool = False


@dataclass
class StateStats:
    state_id: int
    turbines_per_1000_km2: float
    capacity_share_pct: float
    mean_scenicness: float | None  # None when the state has no installed sites


@dataclass
class RegionalStats:
    per_state: list[StateStats]
    south_quota_pct: float


def gini_sorted(x: np.ndarray) -> float:
    """Gini index via the sorted-form identity, O(M log M).

    Equals the pairwise double sum sum_jk |x_j - x_k| / (2 M^2 mean)
    exactly (verified against the quadratic form in the tests).
    """
    m = x.size
    if m == 0:
        raise PlanError("gini of empty vector")
    total = float(x.sum())
    if total == 0.0:
        return 0.0
    xs = np.sort(x)
    ranks = np.arange(m, dtype=float)
    abs_sum = 2.0 * float(np.sum((2.0 * ranks - m + 1.0) * xs))
    return min(max(abs_sum / (2.0 * m * m * (total / m)), 0.0), 1.0)


def gini_pairwise(x: np.ndarray) -> float:
    """Direct O(M^2) double-sum evaluation; reference implementation."""
    m = x.size
    mean = float(x.mean())
    if mean == 0.0:
        return 0.0
    return float(np.abs(x[:, None] - x[None, :]).sum()) / (2.0 * m * m * mean)


def _added_capacity(selection: Selection, instance: Instance) -> dict[int, float]:
    by_id = {c.site_id: c for c in instance.candidates}
    added: dict[int, float] = {}
    for sid in selection.site_ids:
        c = by_id[sid]
        added[c.municipality_id] = added.get(c.municipality_id, 0.0) + c.capacity
    return added


def regional_equity(selection: Selection | None, instance: Instance,
                    include_existing: bool = True) -> EquityReport:
    """Equity of the (existing +) added capacity distribution.

    Pass selection=None to score the existing stock alone.
    """
    added = _added_capacity(selection, instance) if selection is not None else {}
    x: dict[int, float] = {}
    excluded = 0
    for m in instance.municipalities:
        if m.population <= 0:
            excluded += 1
            continue
        cap = added.get(m.municipality_id, 0.0)
        if include_existing:
            cap += m.existing_capacity
        x[m.municipality_id] = cap / m.population
    if not x:
        raise PlanError("no municipality has positive population")
    arr = np.array([x[j] for j in sorted(x)], dtype=float)
    all_zero = bool(arr.sum() == 0.0)
    g = gini_sorted(arr)
    return EquityReport(x=x, gini=g, regional_equity_pct=(1.0 - g) * 100.0,
                        n_municipalities=arr.size,
                        excluded_zero_population=excluded, all_zero=all_zero)


def south_quota(selection: Selection, instance: Instance) -> float:
    """Percent of ADDED capacity placed in municipalities tagged South."""
    added = _added_capacity(selection, instance)
    if not added:
        return 0.0
    tags = {m.municipality_id: m.region_tag for m in instance.municipalities}
    total = sum(added.values())
    south = sum(cap for j, cap in added.items() if tags.get(j) == "South")
    return 100.0 * south / total


def regional_stats(selection: Selection, instance: Instance) -> RegionalStats:
    """Per-state turbine density, capacity share and mean scenicness."""
    by_id = {c.site_id: c for c in instance.candidates}
    mun_state = {m.municipality_id: m.state_id for m in instance.municipalities}
    state_area: dict[int, float] = {}
    for m in instance.municipalities:
        state_area[m.state_id] = state_area.get(m.state_id, 0.0) + m.area

    counts: dict[int, int] = {s: 0 for s in state_area}
    caps: dict[int, float] = {s: 0.0 for s in state_area}
    scenic: dict[int, list[float]] = {s: [] for s in state_area}
    for sid in selection.site_ids:
        c = by_id[sid]
        s = mun_state[c.municipality_id]
        counts[s] += 1
        caps[s] += c.capacity
        scenic[s].append(c.scenicness)

    total_cap = sum(caps.values())
    per_state = []
    for s in sorted(state_area):
        per_state.append(StateStats(
            state_id=s,
            turbines_per_1000_km2=counts[s] / state_area[s] * 1000.0,
            capacity_share_pct=100.0 * caps[s] / total_cap if total_cap else 0.0,
            mean_scenicness=float(np.mean(scenic[s])) if scenic[s] else None,
        ))
    return RegionalStats(per_state=per_state,
                         south_quota_pct=south_quota(selection, instance))


@dataclass
class RadarValues:
    values: dict[str, dict[str, float]]  # scenario -> axis -> [0, 1]
    degenerate_axes: tuple[str, ...] = ()


def radar_values(results: dict[str, dict[str, float]],
                 norm_group: list[str] | None = None) -> RadarValues:
    """Min-max normalize scenario criteria per axis for spider plots.

    `results` maps scenario name to its axis values; normalization
    bounds come from `norm_group` (default: all scenarios). Degenerate
    axes (all group values equal) map to 0 and are flagged.
    """
    if norm_group is None:
        norm_group = sorted(results)
    if len(norm_group) < 2:
        raise PlanError("radar normalization group needs at least 2 scenarios")
    out: dict[str, dict[str, float]] = {name: {} for name in sorted(results)}
    degenerate = []
    for axis in RADAR_AXES:
        vals = [results[n][axis] for n in norm_group]
        lo, hi = min(vals), max(vals)
        if hi == lo:
            degenerate.append(axis)
            for name in results:
                out[name][axis] = 0.0
        else:
            for name in results:
                out[name][axis] = (results[name][axis] - lo) / (hi - lo)
    return RadarValues(values=out, degenerate_axes=tuple(degenerate))
