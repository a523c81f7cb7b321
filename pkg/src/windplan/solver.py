"""Binary site-selection solver.

Minimizes the weighted site-cost sum subject to a national capacity
covering target, optional per-criterion epsilon caps and optional
per-municipality equity floors. Pools of up to BRUTE_FORCE_LIMIT sites
are solved exactly by enumeration; larger pools use a certified
heuristic:

  a) satisfy each equity floor by per-municipality greedy on the
     cost/capacity ratio (a single cheapest site is used when cheaper),
  b) cover the remaining national capacity by global ratio greedy,
  c) polish with single-swap local search to a local optimum,
  d) handle epsilon caps by Lagrangian penalty, bisecting the multiplier
     until the cap is met with minimal slack,
  e) certify with an LP-relaxation lower bound and report the gap.

Everything is deterministic; ties break on the lowest site id.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import CandidateSite, InfeasibleError, Instance, Municipality, PlanError
from .objective import ScaledCriteria, Weights, site_costs

FEAS_TOL = 1e-9
BRUTE_FORCE_LIMIT = 22
_BISECT_ITERS = 48

_CAP_FIELDS = {"lcoe": "m_c", "scenicness": "m_s", "network_length": "m_l"}


@dataclass(frozen=True)
class Constraints:
    cap_obj: float  # MW of added capacity to cover
    m_c: float | None = None  # cap on total LCOE over selected sites
    m_s: float | None = None  # cap on total scenicness
    m_l: float | None = None  # cap on total network length
    equity_floors: dict[int, float] | None = None  # municipality_id -> MW

    def __post_init__(self):
        if self.cap_obj < 0:
            raise PlanError(f"cap_obj {self.cap_obj} < 0")
        for name in ("m_c", "m_s", "m_l"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise PlanError(f"{name} {v} < 0")
        if self.equity_floors:
            bad = {j: f for j, f in self.equity_floors.items() if f < 0}
            if bad:
                raise PlanError(f"negative equity floors: {bad}")

    def active_caps(self) -> list[str]:
        return [crit for crit, fld in _CAP_FIELDS.items()
                if getattr(self, fld) is not None]


@dataclass(frozen=True)
class Totals:
    capacity_mw: float
    lcoe: float
    scenicness: float
    network_length_km: float


@dataclass(frozen=True)
class Means:
    lcoe: float
    scenicness: float
    network_length_km: float
    lcoe_capacity_weighted: float


@dataclass
class Selection:
    site_ids: tuple[int, ...]
    objective_value: float
    totals: Totals
    means: Means
    lower_bound: float
    gap: float

    @property
    def n_sites(self) -> int:
        return len(self.site_ids)

    def decision(self, site_id: int) -> int:
        return 1 if site_id in set(self.site_ids) else 0


@dataclass(frozen=True)
class ParetoPoint:
    step: int
    cap: float  # cap applied to the swept criterion (T0 for step 0)
    achieved_min: float  # total of the optimized criterion
    gap: float
    selection: Selection


@dataclass
class ParetoFront:
    optimize: str
    sweep: str
    step_factor: float
    points: list[ParetoPoint] = field(default_factory=list)
    truncated: bool = False  # sweep hit the swept criterion's feasibility limit


class _Problem:
    """Array view of the candidate pool, sorted by site_id."""

    def __init__(self, instance: Instance, cost: np.ndarray):
        cands = instance.candidates
        self.ids = np.array([c.site_id for c in cands], dtype=np.int64)
        self.caps = np.array([c.capacity for c in cands], dtype=float)
        self.cost = np.asarray(cost, dtype=float)
        lengths = [0.0 if c.network_length is None else c.network_length for c in cands]
        self.raw = {
            "lcoe": np.array([c.lcoe for c in cands], dtype=float),
            "scenicness": np.array([c.scenicness for c in cands], dtype=float),
            "network_length": np.array(lengths, dtype=float),
        }
        self.mun = np.array([c.municipality_id for c in cands], dtype=np.int64)
        self.mun_sites: dict[int, np.ndarray] = {}
        order = np.argsort(self.mun, kind="stable")
        for j, grp in itertools.groupby(order, key=lambda i: self.mun[i]):
            self.mun_sites[int(j)] = np.fromiter(grp, dtype=np.int64)
        self.n = len(cands)

    def ratio_order(self, cost: np.ndarray) -> np.ndarray:
        return np.lexsort((self.ids, cost / self.caps))


def _ge(a: float, b: float) -> bool:
    return a >= b - FEAS_TOL * max(1.0, abs(b))


def _le(a: float, b: float) -> bool:
    return a <= b + FEAS_TOL * max(1.0, abs(b))


class _State:
    """Incumbent selection with incrementally maintained totals."""

    def __init__(self, prob: _Problem, cost: np.ndarray, floors: dict[int, float],
                 cap_specs: list[tuple[np.ndarray, float]]):
        self.prob = prob
        self.cost = cost
        self.floors = floors
        self.cap_specs = cap_specs  # (per-site values, limit) per active cap
        self.sel: set[int] = set()
        self.cap_total = 0.0
        self.obj = 0.0
        self.mun_totals: dict[int, float] = {j: 0.0 for j in floors}
        self.v_totals = [0.0] * len(cap_specs)

    def add(self, i: int) -> None:
        self.sel.add(i)
        self.cap_total += self.prob.caps[i]
        self.obj += self.cost[i]
        j = int(self.prob.mun[i])
        if j in self.mun_totals:
            self.mun_totals[j] += self.prob.caps[i]
        for k, (v, _) in enumerate(self.cap_specs):
            self.v_totals[k] += v[i]

    def remove(self, i: int) -> None:
        self.sel.discard(i)
        self.cap_total -= self.prob.caps[i]
        self.obj -= self.cost[i]
        j = int(self.prob.mun[i])
        if j in self.mun_totals:
            self.mun_totals[j] -= self.prob.caps[i]
        for k, (v, _) in enumerate(self.cap_specs):
            self.v_totals[k] -= v[i]

    def removable(self, i: int, cap_obj: float) -> bool:
        if not _ge(self.cap_total - self.prob.caps[i], cap_obj):
            return False
        j = int(self.prob.mun[i])
        floor = self.floors.get(j, 0.0)
        if floor > 0 and not _ge(self.mun_totals[j] - self.prob.caps[i], floor):
            return False
        return True

    def swap_feasible(self, out: int, inn: int, cap_obj: float) -> bool:
        caps = self.prob.caps
        if not _ge(self.cap_total - caps[out] + caps[inn], cap_obj):
            return False
        jo, ji = int(self.prob.mun[out]), int(self.prob.mun[inn])
        fo = self.floors.get(jo, 0.0)
        if fo > 0:
            t = self.mun_totals[jo] - caps[out] + (caps[inn] if ji == jo else 0.0)
            if not _ge(t, fo):
                return False
        for k, (v, limit) in enumerate(self.cap_specs):
            if not _le(self.v_totals[k] - v[out] + v[inn], limit):
                return False
        return True

    def caps_ok(self) -> bool:
        return all(_le(t, limit) for t, (_, limit) in zip(self.v_totals, self.cap_specs))


def _greedy(prob: _Problem, cost: np.ndarray, cap_obj: float,
            floors: dict[int, float], cap_specs: list[tuple[np.ndarray, float]],
            preselect: tuple[int, ...] = ()) -> _State:
    """Floor-first then global ratio greedy, followed by a trim pass."""
    state = _State(prob, cost, floors, cap_specs)
    caps, ids = prob.caps, prob.ids
    for i in preselect:
        state.add(i)

    for j in sorted(floors):
        floor = floors[j]
        if floor <= 0:
            continue
        idxs = prob.mun_sites.get(j)
        if idxs is None:
            raise InfeasibleError(
                f"equity floor {floor} MW in municipality {j} with no candidates")
        start_cum = state.mun_totals.get(j, 0.0)
        if _ge(start_cum, floor):
            continue
        local = sorted(idxs, key=lambda i: (cost[i] / caps[i], ids[i]))
        chosen, cum, cost_a = [], start_cum, 0.0
        for i in local:
            if i in state.sel:
                continue
            chosen.append(i)
            cum += caps[i]
            cost_a += cost[i]
            if _ge(cum, floor):
                break
        if not _ge(cum, floor):
            raise InfeasibleError(
                f"equity floor {floor} MW exceeds potential {cum} MW in municipality {j}")
        if start_cum == 0.0:
            single = min(((cost[i], ids[i], i) for i in idxs
                          if i not in state.sel and _ge(caps[i], floor)),
                         default=None)
            if single is not None and single[0] < cost_a:
                chosen = [single[2]]
        for i in chosen:
            state.add(i)

    if not _ge(state.cap_total, cap_obj):
        for i in prob.ratio_order(cost):
            if i in state.sel:
                continue
            state.add(i)
            if _ge(state.cap_total, cap_obj):
                break
    if not _ge(state.cap_total, cap_obj):
        shortfall = cap_obj - state.cap_total
        raise InfeasibleError(
            f"total potential {state.cap_total + 0.0:.3f} MW cannot cover capacity "
            f"target: shortfall {shortfall:.3f} MW")

    for i in sorted(state.sel, key=lambda i: (-cost[i], ids[i])):
        if cost[i] > 0 and state.removable(i, cap_obj):
            state.remove(i)
    return state


def _polish(state: _State, cap_obj: float, max_rounds: int = 60,
            neighborhood: int | None = None) -> None:
    """Single-swap (and drop) local search; in-place, deterministic."""
    prob, cost, ids = state.prob, state.cost, state.prob.ids
    n = prob.n
    if neighborhood is None:
        neighborhood = n if n <= 400 else 120
    for _ in range(max_rounds):
        improved = False
        for i in sorted(state.sel, key=lambda i: (-cost[i], ids[i])):
            if cost[i] > 0 and state.removable(i, cap_obj):
                state.remove(i)
                improved = True
        outs = sorted(state.sel, key=lambda i: (-cost[i], ids[i]))[:neighborhood]
        unsel = [i for i in prob.ratio_order(cost) if i not in state.sel]
        ins = unsel[:neighborhood]
        for out in outs:
            if out not in state.sel:
                continue
            for inn in ins:
                if inn in state.sel:
                    continue
                if cost[inn] - cost[out] >= -1e-12:
                    continue
                if state.swap_feasible(out, inn, cap_obj):
                    state.remove(out)
                    state.add(inn)
                    improved = True
                    break
        if not improved:
            return


def _try_move(state: _State, cap_obj: float, outs: tuple[int, ...],
              ins: tuple[int, ...]) -> bool:
    """Apply an exchange if it strictly improves and stays feasible."""
    cost = state.cost
    delta = sum(cost[i] for i in ins) - sum(cost[i] for i in outs)
    if delta >= -1e-12:
        return False
    for i in outs:
        state.remove(i)
    for i in ins:
        state.add(i)
    if _feasible(state, cap_obj):
        return True
    for i in ins:
        state.remove(i)
    for i in outs:
        state.add(i)
    return False


def _deep_polish(state: _State, cap_obj: float) -> None:
    """Exchange moves up to 2-out / 2-in; only used on small pools."""
    prob = state.prob
    if prob.n > 64:
        return
    guard = 0
    changed = True
    while changed and guard < 80:
        changed = False
        guard += 1
        _polish(state, cap_obj, max_rounds=60)
        sel = sorted(state.sel)
        unsel = [i for i in range(prob.n) if i not in state.sel]
        sel_pairs = list(itertools.combinations(sel, 2))
        unsel_pairs = list(itertools.combinations(unsel, 2))
        for outs, ins in itertools.chain(
                ((p, (i,)) for p in sel_pairs for i in unsel),
                (((o,), p) for o in sel for p in unsel_pairs),
                ((po, pi) for po in sel_pairs for pi in unsel_pairs)):
            if _try_move(state, cap_obj, outs, ins):
                changed = True
                break


def _feasible(state: _State, cap_obj: float) -> bool:
    if not _ge(state.cap_total, cap_obj):
        return False
    for j, f in state.floors.items():
        if f > 0 and not _ge(state.mun_totals.get(j, 0.0), f):
            return False
    return state.caps_ok()


def _lp_nested(prob: _Problem, cost: np.ndarray, cap_obj: float,
               floors: dict[int, float]) -> float:
    """Exact optimum of the fractional relaxation (floors + covering).

    Floors are filled fractionally at the cheapest within-municipality
    ratios; the residual capacity takes the globally cheapest remaining
    fractional marginals. Marginal cost curves are convex, so this
    greedy is LP-optimal.
    """
    caps, ids = prob.caps, prob.ids
    used = np.zeros(prob.n)  # fraction of each site already committed
    total_cost = 0.0
    floor_cap = 0.0
    for j, floor in floors.items():
        if floor <= 0:
            continue
        idxs = prob.mun_sites.get(j)
        if idxs is None:
            return np.inf
        local = sorted(idxs, key=lambda i: (cost[i] / caps[i], ids[i]))
        need = floor
        for i in local:
            take = min(caps[i], need)
            frac = take / caps[i]
            used[i] += frac
            total_cost += frac * cost[i]
            need -= take
            if need <= 1e-15:
                break
        if need > 1e-9:
            return np.inf
        floor_cap += floor
    residual = cap_obj - floor_cap
    if residual > 1e-15:
        for i in prob.ratio_order(cost):
            avail = caps[i] * (1.0 - used[i])
            if avail <= 0:
                continue
            take = min(avail, residual)
            total_cost += take / caps[i] * cost[i]
            residual -= take
            if residual <= 1e-15:
                break
        if residual > 1e-9:
            return np.inf
    return total_cost


def _floor_int_bound(prob: _Problem, cost: np.ndarray, floors: dict[int, float]) -> float:
    """Lower bound keeping floor coverage integral per municipality.

    Exact when a floor fits a single site or the municipality is small
    enough to enumerate; otherwise the municipal fractional fill is
    used. Ignores the global constraint, which only relaxes further.
    """
    caps, ids = prob.caps, prob.ids
    total = 0.0
    for j, floor in floors.items():
        if floor <= 0:
            continue
        idxs = prob.mun_sites.get(j)
        if idxs is None:
            return np.inf
        min_cap = caps[idxs].min()
        if floor <= min_cap + 1e-15:
            total += cost[idxs].min()
        elif len(idxs) <= 12:
            m = len(idxs)
            masks = np.arange(1, 1 << m, dtype=np.uint32)
            bits = ((masks[:, None] >> np.arange(m, dtype=np.uint32)) & 1).astype(float)
            feas = bits @ caps[idxs] >= floor - FEAS_TOL * max(1.0, floor)
            if not feas.any():
                return np.inf
            total += float((bits @ cost[idxs])[feas].min())
        else:
            local = sorted(idxs, key=lambda i: (cost[i] / caps[i], ids[i]))
            need = floor
            for i in local:
                take = min(caps[i], need)
                total += take / caps[i] * cost[i]
                need -= take
                if need <= 1e-15:
                    break
            if need > 1e-9:
                return np.inf
    return total


def _lower_bound(prob: _Problem, cost: np.ndarray, cap_obj: float,
                 floors: dict[int, float],
                 cap_specs: list[tuple[np.ndarray, float]],
                 lambdas: list[float]) -> float:
    bound = max(_lp_nested(prob, cost, cap_obj, floors),
                _floor_int_bound(prob, cost, floors))
    if cap_specs and any(l > 0 for l in lambdas):
        pen = cost.copy()
        offset = 0.0
        for (v, limit), lam in zip(cap_specs, lambdas):
            pen = pen + lam * v
            offset += lam * limit
        lag = max(_lp_nested(prob, pen, cap_obj, floors),
                  _floor_int_bound(prob, pen, floors)) - offset
        bound = max(bound, lag)
    return bound if np.isfinite(bound) else 0.0


def _make_selection(prob: _Problem, state: _State, weights_cost: np.ndarray,
                    lower_bound: float) -> Selection:
    idx = np.array(sorted(state.sel, key=lambda i: prob.ids[i]), dtype=np.int64)
    ids = tuple(int(i) for i in prob.ids[idx])
    if idx.size:
        cap = float(np.sum(prob.caps[idx]))
        t_lcoe = float(np.sum(prob.raw["lcoe"][idx]))
        t_scen = float(np.sum(prob.raw["scenicness"][idx]))
        t_len = float(np.sum(prob.raw["network_length"][idx]))
        obj = float(np.sum(weights_cost[idx]))
        n = idx.size
        means = Means(
            lcoe=t_lcoe / n,
            scenicness=t_scen / n,
            network_length_km=t_len / n,
            lcoe_capacity_weighted=float(np.sum(prob.raw["lcoe"][idx] * prob.caps[idx])) / cap,
        )
        totals = Totals(cap, t_lcoe, t_scen, t_len)
    else:
        obj = 0.0
        totals = Totals(0.0, 0.0, 0.0, 0.0)
        means = Means(0.0, 0.0, 0.0, 0.0)
    if obj <= lower_bound:
        gap = 0.0
    elif lower_bound > 0:
        gap = (obj - lower_bound) / lower_bound
    else:
        gap = float("inf")
    return Selection(site_ids=ids, objective_value=obj, totals=totals, means=means,
                     lower_bound=lower_bound, gap=gap)


def _clamped_floors(prob: _Problem, constraints: Constraints) -> dict[int, float]:
    floors = {}
    if constraints.equity_floors:
        for j, f in constraints.equity_floors.items():
            if f > 0:
                floors[int(j)] = float(f)
    return floors


def _cap_specs(prob: _Problem, constraints: Constraints) -> list[tuple[str, np.ndarray, float]]:
    specs = []
    for crit, fld in _CAP_FIELDS.items():
        limit = getattr(constraints, fld)
        if limit is not None:
            specs.append((crit, prob.raw[crit], float(limit)))
    return specs


def _run_heuristic(prob: _Problem, cost: np.ndarray, cap_obj: float,
                   floors: dict[int, float],
                   cap_specs: list[tuple[np.ndarray, float]],
                   deep: bool) -> _State:
    state = _greedy(prob, cost, cap_obj, floors, cap_specs)
    _polish(state, cap_obj)
    if deep:
        # covering greedy is weakest around the last site added; forcing
        # each site into the start escapes that trap on small pools
        for i in range(prob.n):
            st = _greedy(prob, cost, cap_obj, floors, cap_specs, preselect=(i,))
            _polish(st, cap_obj)
            if st.obj < state.obj - 1e-12:
                state = st
        _deep_polish(state, cap_obj)
    return state


def _enumerate(prob: _Problem, cost: np.ndarray, cap_obj: float,
               floors: dict[int, float],
               cap_specs: list[tuple[np.ndarray, float]]) -> tuple[int, float] | None:
    """Exhaustive subset search; returns (best mask, objective) or None
    if no feasible subset exists. Ties go to the lexicographically
    smallest installed id-set."""
    n = prob.n
    best_obj = np.inf
    best_ids: tuple[int, ...] | None = None
    best_mask = 0
    shifts = np.arange(n, dtype=np.uint32)
    chunk = 1 << 20
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint32)
        bits = ((masks[:, None] >> shifts) & 1).astype(float)
        feas = bits @ prob.caps >= cap_obj - FEAS_TOL * max(1.0, cap_obj)
        for v, limit in cap_specs:
            feas &= bits @ v <= limit + FEAS_TOL * max(1.0, abs(limit))
        for j, floor in floors.items():
            idxs = prob.mun_sites.get(j)
            if idxs is None:
                feas &= False
                break
            feas &= bits[:, idxs] @ prob.caps[idxs] >= floor - FEAS_TOL * max(1.0, floor)
        if not feas.any():
            continue
        obj = bits @ cost
        obj[~feas] = np.inf
        cutoff = min(best_obj, float(obj.min())) + 1e-12
        for pos in np.nonzero(obj <= cutoff)[0]:
            mask = int(masks[pos])
            o = float(obj[pos])
            ids = tuple(int(prob.ids[i]) for i in range(n) if mask >> i & 1)
            if (o < best_obj - 1e-12
                    or (abs(o - best_obj) <= 1e-12 and (best_ids is None or ids < best_ids))):
                best_obj, best_ids, best_mask = o, ids, mask
    if best_ids is None:
        return None
    return best_mask, best_obj


def solve(instance: Instance, weights: Weights, constraints: Constraints,
          scaled: ScaledCriteria | None = None) -> Selection:
    """Exact (small pools) or certified-heuristic solve; see module docstring."""
    if not instance.candidates:
        raise InfeasibleError("instance has no candidate sites")
    cost = site_costs(instance.candidates, weights, scaled)
    cands = sorted(instance.candidates, key=lambda c: c.site_id)
    inst = instance if cands == instance.candidates else Instance(
        candidates=cands, municipalities=instance.municipalities,
        existing=instance.existing, transformers=instance.transformers,
        metadata=instance.metadata)
    if cands != instance.candidates:
        order = np.argsort([c.site_id for c in instance.candidates], kind="stable")
        cost = np.asarray(cost)[order]
    prob = _Problem(inst, cost)

    floors = _clamped_floors(prob, constraints)
    named_specs = _cap_specs(prob, constraints)
    cap_specs = [(v, limit) for _, v, limit in named_specs]
    cap_obj = float(constraints.cap_obj)

    total_potential = float(prob.caps.sum())
    if not _ge(total_potential, cap_obj):
        raise InfeasibleError(
            f"total potential {total_potential:.3f} MW below capacity target "
            f"{cap_obj:.3f} MW: shortfall {cap_obj - total_potential:.3f} MW")

    if prob.n <= BRUTE_FORCE_LIMIT:
        # small pools are enumerated exactly; local search alone cannot
        # certify the multi-exchange optima these covering instances need
        exact = _enumerate(prob, cost, cap_obj, floors, cap_specs)
        if exact is None:
            if floors and _enumerate(prob, cost, cap_obj, floors, []) is None:
                missing = sorted(j for j in floors if j not in prob.mun_sites)
                if missing:
                    raise InfeasibleError(
                        f"equity floors in municipalities without candidates: {missing}")
                raise InfeasibleError("equity floors unattainable with this pool")
            for name, v, limit in named_specs:
                vmin = _enumerate(prob, v.astype(float), cap_obj, floors, [])
                if vmin is not None and not _le(vmin[1], limit):
                    raise InfeasibleError(
                        f"cap on total {name} ({limit}) below the minimum "
                        f"achievable {vmin[1]:.6f}")
            raise InfeasibleError(
                f"caps {[name for name, _, _ in named_specs]} unattainable together")
        mask, _ = exact
        state = _State(prob, cost, floors, cap_specs)
        for i in range(prob.n):
            if mask >> i & 1:
                state.add(i)
        bound = _lower_bound(prob, cost, cap_obj, floors, cap_specs,
                             [0.0] * len(cap_specs))
        return _make_selection(prob, state, cost, min(bound, state.obj))

    deep = prob.n <= 24
    lambdas = [0.0] * len(cap_specs)
    state = _run_heuristic(prob, cost, cap_obj, floors, cap_specs, deep)

    if cap_specs and not state.caps_ok():
        best: _State | None = state if _feasible(state, cap_obj) else None
        for k, (name, v, limit) in enumerate(named_specs):
            if _le(state.v_totals[k], limit):
                continue
            # is the cap attainable at all? check the min-v solution
            vmin_state = _run_heuristic(prob, v.astype(float), cap_obj, floors,
                                        cap_specs, deep)
            if not _le(float(np.sum(v[sorted(vmin_state.sel)])), limit):
                raise InfeasibleError(
                    f"cap on total {name} ({limit}) below the minimum achievable "
                    f"{float(np.sum(v[sorted(vmin_state.sel)])):.6f}")

            def run(lam: float) -> _State:
                pen = cost + lam * v
                for kk, (vv, _) in enumerate(cap_specs):
                    if lambdas[kk] > 0 and kk != k:
                        pen = pen + lambdas[kk] * vv
                return _run_heuristic(prob, pen, cap_obj, floors, cap_specs, deep)

            lo, hi = 0.0, max(1.0, float(cost.max()) / max(float(v[v > 0].min()), 1e-12)
                              if np.any(v > 0) else 1.0)
            s_hi = run(hi)
            doublings = 0
            while not _le(s_hi.v_totals[k], limit) and doublings < 60:
                hi *= 2.0
                s_hi = run(hi)
                doublings += 1
            if _feasible(s_hi, cap_obj) and (best is None or s_hi.obj < best.obj):
                best = s_hi
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                s_mid = run(mid)
                if _le(s_mid.v_totals[k], limit):
                    hi = mid
                    if _feasible(s_mid, cap_obj) and (best is None or s_mid.obj < best.obj):
                        best = s_mid
                else:
                    lo = mid
            lambdas[k] = hi
            state = best if best is not None else s_hi

        if best is None:
            # repair: start from a selection minimizing each violated cap
            repair_cost = np.zeros(prob.n)
            for (v, limit) in cap_specs:
                repair_cost = repair_cost + v
            state = _run_heuristic(prob, repair_cost, cap_obj, floors, cap_specs, deep)
            if not _feasible(state, cap_obj):
                bad = [name for (name, v, limit), t in zip(named_specs, state.v_totals)
                       if not _le(t, limit)]
                raise InfeasibleError(f"caps {bad} unattainable together")
        else:
            state = best
        # constrained polish on the true objective
        final = _State(prob, cost, floors, cap_specs)
        for i in sorted(state.sel):
            final.add(i)
        _polish(final, cap_obj)
        if deep:
            _deep_polish(final, cap_obj)
        state = final

    bound = _lower_bound(prob, cost, cap_obj, floors, cap_specs, lambdas)
    return _make_selection(prob, state, cost, bound)


def brute_force(instance: Instance, weights: Weights, constraints: Constraints,
                scaled: ScaledCriteria | None = None) -> Selection:
    """Exact optimum by exhaustive subset enumeration (oracle, N <= 22)."""
    cands = sorted(instance.candidates, key=lambda c: c.site_id)
    n = len(cands)
    if n > BRUTE_FORCE_LIMIT:
        raise PlanError(f"brute_force refused: N={n} > {BRUTE_FORCE_LIMIT}")
    inst = Instance(candidates=cands, municipalities=instance.municipalities,
                    existing=instance.existing, transformers=instance.transformers,
                    metadata=instance.metadata)
    cost = np.asarray(site_costs(instance.candidates, weights, scaled), dtype=float)
    if cands != instance.candidates:
        order = np.argsort([c.site_id for c in instance.candidates], kind="stable")
        cost = cost[order]
    prob = _Problem(inst, cost)
    floors = _clamped_floors(prob, constraints)
    specs = _cap_specs(prob, constraints)
    cap_obj = float(constraints.cap_obj)

    exact = _enumerate(prob, cost, cap_obj, floors,
                       [(v, limit) for _, v, limit in specs])
    if exact is None:
        raise InfeasibleError("no feasible subset exists")
    best_mask, best_obj = exact

    state = _State(prob, cost, floors, [(v, limit) for _, v, limit in specs])
    for i in range(n):
        if best_mask >> i & 1:
            state.add(i)
    sel = _make_selection(prob, state, cost, lower_bound=best_obj)
    sel.gap = 0.0
    return sel


def equity_floors(municipalities: list[Municipality], total_target_2050: float,
                  municipal_potentials: dict[int, float]) -> dict[int, float]:
    """Population-share capacity floors, clamped to [0, potential].

    floor_j = clamp(pop_j / pop_total * total_target - existing_j,
                    0, potential_j).
    """
    pop_total = sum(m.population for m in municipalities)
    if pop_total <= 0:
        raise PlanError("total population must be positive for equity floors")
    floors = {}
    for m in municipalities:
        share = m.population / pop_total * total_target_2050
        raw = share - m.existing_capacity
        potential = municipal_potentials.get(m.municipality_id, 0.0)
        floors[m.municipality_id] = min(max(raw, 0.0), potential)
    return floors


def municipal_potentials(instance: Instance) -> dict[int, float]:
    pots = {m.municipality_id: 0.0 for m in instance.municipalities}
    for c in instance.candidates:
        pots[c.municipality_id] = pots.get(c.municipality_id, 0.0) + c.capacity
    return pots


def pareto_sweep(instance: Instance, optimize: str, sweep: str,
                 constraints: Constraints, steps: int,
                 step_factor: float = 0.9,
                 scaled: ScaledCriteria | None = None) -> ParetoFront:
    """Epsilon-constraint front: tighten the swept criterion by the step
    factor each optimization and minimize the other criterion.

    Point 0 is the unconstrained minimum of `optimize`; its total on the
    swept criterion anchors the caps T0 * factor^k. The sweep stops
    early (front flagged truncated) once a cap becomes infeasible. A
    backward pass propagates any strictly better tight-cap solution to
    looser-cap points, so achieved minima are monotone by construction.
    """
    if optimize == sweep:
        raise PlanError("optimize and sweep criteria must differ")
    for name in (optimize, sweep):
        if name not in _CAP_FIELDS:
            raise PlanError(f"unknown criterion {name!r}")
    if steps < 1:
        raise PlanError("steps must be >= 1")
    w = Weights(w_c=1.0 if optimize == "lcoe" else 0.0,
                w_s=1.0 if optimize == "scenicness" else 0.0,
                w_l=1.0 if optimize == "network_length" else 0.0)

    def total_of(sel: Selection, crit: str) -> float:
        return {"lcoe": sel.totals.lcoe, "scenicness": sel.totals.scenicness,
                "network_length": sel.totals.network_length_km}[crit]

    sel0 = solve(instance, w, constraints, scaled)
    t0 = total_of(sel0, sweep)
    front = ParetoFront(optimize=optimize, sweep=sweep, step_factor=step_factor)
    front.points.append(ParetoPoint(0, t0, total_of(sel0, optimize), sel0.gap, sel0))
    cap_field = _CAP_FIELDS[sweep]
    for k in range(1, steps):
        cap_val = t0 * step_factor ** k
        con = replace(constraints, **{cap_field: cap_val})
        try:
            sel = solve(instance, w, con, scaled)
        except InfeasibleError:
            front.truncated = True
            break
        front.points.append(ParetoPoint(k, cap_val, total_of(sel, optimize), sel.gap, sel))
    # tighter caps can only worsen the optimum; a better solution found at a
    # tighter cap is feasible (and adopted) at every looser cap
    for i in range(len(front.points) - 1, 0, -1):
        cur, prev = front.points[i], front.points[i - 1]
        if cur.achieved_min < prev.achieved_min:
            front.points[i - 1] = ParetoPoint(prev.step, prev.cap, cur.achieved_min,
                                              cur.gap, cur.selection)
    return front


def verify_selection(selection: Selection, instance: Instance,
                     constraints: Constraints) -> bool:
    """Recompute feasibility of a Selection from raw instance data."""
    by_id = {c.site_id: c for c in instance.candidates}
    sites = [by_id[s] for s in selection.site_ids]
    cap_total = sum(s.capacity for s in sites)
    if not _ge(cap_total, constraints.cap_obj):
        return False
    crit_totals = {
        "lcoe": sum(s.lcoe for s in sites),
        "scenicness": sum(s.scenicness for s in sites),
        "network_length": sum(s.network_length or 0.0 for s in sites),
    }
    for crit, fld in _CAP_FIELDS.items():
        limit = getattr(constraints, fld)
        if limit is not None and not _le(crit_totals[crit], limit):
            return False
    if constraints.equity_floors:
        mun_caps: dict[int, float] = {}
        for s in sites:
            mun_caps[s.municipality_id] = mun_caps.get(s.municipality_id, 0.0) + s.capacity
        for j, floor in constraints.equity_floors.items():
            if floor > 0 and not _ge(mun_caps.get(j, 0.0), floor):
                return False
    return True
