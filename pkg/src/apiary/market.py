"""The pollen/honey exchange market.

Pollen has no direct energy value, so the colony prices it: the exchange
rate tau makes one reference pollen quantum q0_tilde worth tau * q0
joules of honey.  A pollen patch then gets a quality affine in tau,

    Q~_f(tau) = tau * q~_f/q~0  -  xi * (d/d_max + (rho_crit/rho_f)**(1/n)),

and a per-bee efficiency eta~_f(tau) = q0 * Q~_f(tau) / cycle, an affine
function with positive slope.  Given a pollen-side demand of bees, the
cut envelope eta~_cut(tau) is the value of the marginal resource when
patches are consumed in decreasing value order until their capacities
absorb the demand; it is zero up to some t0, then continuous, piecewise
affine and strictly increasing, and affine beyond a final breakpoint t1.

The regime of the colony decides who is scarce:

  Deficit  (honey-poor): secure a minimal pollen income with the fewest
           bees (ranked by the tau-free costless slope), send everyone
           else to nectar; tau balances the nectar cut against the
           average pollen-fetching cost.
  Surplus  (pollen-poor): secure a minimal nectar power, send everyone
           else to pollen; tau solves eta~_cut(tau) = eta_cut, iterated
           because the pollen-fetching cost feeds back into the nectar
           need.  The iterates bracket the answer in nested intervals.
  Scarce   (Surplus with t0 = +inf: not enough pollen capacity to employ
           everyone): same loop with quality substituted for efficiency;
           leftover foragers stay in reserve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .demography import ColonyState, EnergyCoefficients
from .flora import FloralResource, ForagingParams, critical_density
from .foraging import AllocationPlan, foragers_required, trip_cycle
from .thermo import ThermalParams, cluster_heating_power

SECONDS_PER_DAY = 86400.0


class MarketError(RuntimeError):
    pass


class InfeasibleMarketError(MarketError):
    """The mandatory minimum (pollen income or nectar power) cannot be met."""


class ScarceMarketError(MarketError):
    """t0 is infinite: pollen capacity cannot absorb the demand; use the
    scarce solver."""


class Regime(str, Enum):
    DEFICIT = "deficit"
    SURPLUS = "surplus"
    BALANCED = "balanced"


@dataclass(frozen=True)
class AffineEfficiency:
    """Pollen efficiency as an affine function of tau, per bee.

    slope     q0 * (q~_f / q~0) / cycle, W per unit tau
    intercept -q0 * xi * (d/d_max + (rho_crit/rho_f)**(1/n)) / cycle, W
    capacity  optimal head-count phi_f, bees
    """

    resource_id: int
    slope: float
    intercept: float
    capacity: float

    def __post_init__(self):
        if self.slope <= 0.0:
            raise ValueError("slope must be positive")
        if self.capacity < 0.0:
            raise ValueError("capacity must be non-negative")

    def value(self, tau: float) -> float:
        return self.slope * tau + self.intercept


@dataclass(frozen=True)
class NectarOption:
    """A nectar patch as the solvers see it."""

    resource_id: int
    efficiency: float   # W per bee
    capacity: float     # bees
    quality: float      # dimensionless


@dataclass(frozen=True)
class PollenOption:
    """A pollen patch as the solvers see it.

    income_rate  reference-grams per second per bee (q~_f / cycle)
    cost_power   honey burned fetching, W per bee (= -affine.intercept)
    quality_slope, quality_cost: the Q~_f(tau) coefficients
    """

    resource_id: int
    affine: AffineEfficiency
    income_rate: float
    cost_power: float
    quality_slope: float
    quality_cost: float

    @property
    def capacity(self) -> float:
        return self.affine.capacity

    def quality(self, tau: float) -> float:
        return self.quality_slope * tau - self.quality_cost


@dataclass(frozen=True)
class RatioState:
    """Where the hive ledger sits against the winter target."""

    r_hive: float
    r_target: float
    regime: Regime


@dataclass
class CutFunction:
    """eta~_cut as an exact piecewise-affine function of tau.

    Segment i is value = slopes[i] * tau + intercepts[i] on
    [breakpoints[i], breakpoints[i+1]) (the last segment is unbounded).
    t0 is the largest tau with value 0 (inf when the function is
    identically zero, the scarcity signal); t1 the start of the final
    affine piece.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray
    t0: float
    t1: float

    def segment_index(self, tau: float) -> int:
        if tau < 0.0:
            raise ValueError("tau must be non-negative")
        return max(0, int(np.searchsorted(self.breakpoints, tau, side="right")) - 1)

    def value(self, tau: float) -> float:
        i = self.segment_index(tau)
        return float(self.slopes[i] * tau + self.intercepts[i])

    def inverse(self, v: float) -> float:
        """Smallest tau with value(tau) = v (v >= 0).  For v = 0 this is
        t0.  Raises when the cut is identically zero (scarcity)."""
        if v < 0.0:
            raise ValueError("the cut never takes negative values")
        if math.isinf(self.t0):
            raise ScarceMarketError("cut function is identically zero; no finite inverse")
        if v == 0.0:
            return self.t0
        for i in range(len(self.breakpoints)):
            if self.slopes[i] <= 0.0:
                continue
            lo = self.breakpoints[i]
            hi = self.breakpoints[i + 1] if i + 1 < len(self.breakpoints) else math.inf
            tau = (v - self.intercepts[i]) / self.slopes[i]
            if tau < lo - 1e-12 * max(1.0, abs(lo)):
                continue
            if tau < hi:
                return float(max(tau, lo))
        raise MarketError(f"cut value {v} unreachable")  # slopes > 0 make this unreachable


@dataclass
class ExchangeSolution:
    """Outcome of one exchange solve."""

    case: str
    tau: float | None
    eta_cut: float
    nectar: AllocationPlan
    pollen: AllocationPlan
    trace: list[float] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0
    regime: Regime | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def reserve(self) -> float:
        return self.nectar.reserve + self.pollen.reserve

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "regime": self.regime.value if self.regime is not None else None,
            "tau": self.tau,
            "eta_cut": self.eta_cut,
            "converged": self.converged,
            "iterations": self.iterations,
            "trace": list(self.trace),
            "warnings": list(self.warnings),
            "nectar": {"assignments": {str(k): v for k, v in sorted(self.nectar.assignments.items())},
                       "reserve": self.nectar.reserve},
            "pollen": {"assignments": {str(k): v for k, v in sorted(self.pollen.assignments.items())},
                       "reserve": self.pollen.reserve},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


# ---------------------------------------------------------------------------
# option constructors

def pollen_quality(res: FloralResource, d: float, tau: float, xi: float,
                   p: ForagingParams) -> float:
    """Q~_f(tau) = tau * q~_f/q~0 - xi * (d/d_max + (rho_crit/rho_f)**(1/n))."""
    if res.is_nectar:
        raise ValueError(f"resource {res.id} offers nectar; use the flora quality instead")
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    cost = d / p.d_max + (critical_density(res, p) / res.rho_f) ** (1.0 / res.n)
    return tau * res.q_f / p.q0_tilde - xi * cost


def pollen_affine(res: FloralResource, d: float, p: ForagingParams,
                  coeffs: EnergyCoefficients) -> AffineEfficiency:
    """Per-bee pollen efficiency eta~_f(tau) = q0 * Q~_f(tau) / cycle as an
    affine object, with the optimal head-count as capacity."""
    if res.is_nectar:
        raise ValueError(f"resource {res.id} offers nectar, not pollen")
    cycle = trip_cycle(res, d, p).total
    cost = p.xi * (d / p.d_max + (critical_density(res, p) / res.rho_f) ** (1.0 / res.n))
    return AffineEfficiency(resource_id=res.id,
                            slope=p.q0 * (res.q_f / p.q0_tilde) / cycle,
                            intercept=-p.q0 * cost / cycle,
                            capacity=foragers_required(res, d, p))


def pollen_option(res: FloralResource, d: float, p: ForagingParams,
                  coeffs: EnergyCoefficients) -> PollenOption:
    affine = pollen_affine(res, d, p, coeffs)
    cycle = trip_cycle(res, d, p).total
    cost = p.xi * (d / p.d_max + (critical_density(res, p) / res.rho_f) ** (1.0 / res.n))
    return PollenOption(resource_id=res.id, affine=affine,
                        income_rate=res.q_f / cycle,
                        cost_power=-affine.intercept,
                        quality_slope=res.q_f / p.q0_tilde,
                        quality_cost=cost)


# ---------------------------------------------------------------------------
# target ratio and regime

def target_ratio(per_bee_honey: float, per_bee_pollen: float, winter,
                 n_winter: float, p: ThermalParams) -> float:
    """Honey/pollen ratio (J/g) the colony should reach before winter:

        per_bee_honey/per_bee_pollen
          + sum_days kappa * N**(1/3) * gap * 86400 / (N * per_bee_pollen)

    ``winter`` is a daily outside-temperature series (or anything with a
    ``t_out`` attribute); days warmer than the target contribute nothing.
    Decreasing in the planned winter colony size N.
    """
    if n_winter <= 0:
        raise ValueError("winter colony size must be positive")
    if per_bee_honey <= 0.0 or per_bee_pollen <= 0.0:
        raise ValueError("per-bee quantities must be positive")
    temps = np.asarray(getattr(winter, "t_out", winter), dtype=float)
    heat = 0.0
    for t in temps:
        heat += cluster_heating_power(n_winter, float(t), p) * SECONDS_PER_DAY
    return per_bee_honey / per_bee_pollen + heat / (n_winter * per_bee_pollen)


def classify_regime(state: ColonyState, r_target: float,
                    hysteresis: float = 0.05,
                    coeffs: EnergyCoefficients | None = None) -> RatioState:
    """Compare the hive's honey-energy/pollen ratio with the target.

    Deficit below the (1 - hysteresis) band edge, Surplus above the
    (1 + hysteresis) edge, Balanced inside.  A hive with no pollen stock
    at all is Deficit by convention (the empty-larder start-up case).
    """
    if r_target <= 0.0:
        raise ValueError("target ratio must be positive")
    if not 0.0 <= hysteresis < 1.0:
        raise ValueError("hysteresis must lie in [0, 1)")
    mu = coeffs.mu if coeffs is not None else 1.0
    if state.pollen <= 0.0:
        r_hive = math.inf if state.honey > 0.0 else 0.0
        return RatioState(r_hive, r_target, Regime.DEFICIT)
    r_hive = mu * state.honey / state.pollen
    if r_hive < r_target * (1.0 - hysteresis):
        regime = Regime.DEFICIT
    elif r_hive > r_target * (1.0 + hysteresis):
        regime = Regime.SURPLUS
    else:
        regime = Regime.BALANCED
    return RatioState(r_hive, r_target, regime)


# ---------------------------------------------------------------------------
# cut envelope

def _marginal_at(affines, order, tau, demand):
    """Index (into ``affines``) of the marginal resource at tau, or None
    when total capacity cannot absorb the demand."""
    acc = 0.0
    for i in order:
        acc += affines[i].capacity
        if acc >= demand:
            return i
    return None


def build_eta_cut(pollen: list[AffineEfficiency], demand: float) -> CutFunction:
    """Exact piecewise-affine cut envelope.

    For each tau the envelope equals max(0, value of the marginal
    resource) when resources are consumed in decreasing value(tau) order
    (ties by id) until cumulative capacity reaches the demand.  Built by
    an event sweep over pairwise intersections and zero crossings, so
    each segment carries the affine coefficients of its marginal
    resource.  t0 = +inf flags scarcity: total capacity below demand.
    """
    if demand <= 0.0:
        raise ValueError("demand must be positive")
    if not pollen:
        raise ValueError("no pollen resources")
    affines = list(pollen)
    total_capacity = sum(a.capacity for a in affines)
    if total_capacity < demand:
        inf = math.inf
        return CutFunction(np.array([0.0]), np.array([0.0]), np.array([0.0]),
                           t0=inf, t1=inf)

    events = {0.0}
    for i, a in enumerate(affines):
        zero = -a.intercept / a.slope
        if zero > 0.0:
            events.add(zero)
        for b in affines[i + 1:]:
            if a.slope != b.slope:
                cross = (b.intercept - a.intercept) / (a.slope - b.slope)
                if cross > 0.0:
                    events.add(cross)
    starts = sorted(events)

    pieces = []  # (start, slope, intercept)
    for j, lo in enumerate(starts):
        hi = starts[j + 1] if j + 1 < len(starts) else math.inf
        mid = 0.5 * (lo + hi) if math.isfinite(hi) else lo + 1.0
        order = sorted(range(len(affines)),
                       key=lambda i: (-affines[i].value(mid), affines[i].resource_id))
        m = _marginal_at(affines, order, mid, demand)
        if affines[m].value(mid) <= 0.0:
            pieces.append((lo, 0.0, 0.0))
        else:
            pieces.append((lo, affines[m].slope, affines[m].intercept))

    merged = [pieces[0]]
    for start, slope, intercept in pieces[1:]:
        if slope == merged[-1][1] and intercept == merged[-1][2]:
            continue
        merged.append((start, slope, intercept))

    breakpoints = np.array([p[0] for p in merged])
    slopes = np.array([p[1] for p in merged])
    intercepts = np.array([p[2] for p in merged])
    rising = np.nonzero(slopes > 0.0)[0]
    t0 = float(breakpoints[rising[0]]) if rising.size else math.inf
    t1 = float(breakpoints[-1]) if math.isfinite(t0) else math.inf
    return CutFunction(breakpoints, slopes, intercepts, t0=t0, t1=t1)


# ---------------------------------------------------------------------------
# greedy allocators shared by the solvers

def _fill_by_rate(entries, target, budget):
    """Greedy fill: entries are (id, rate, capacity) already ranked.
    Assign bees until the summed rate * bees reaches ``target`` or the
    budget runs out.  Returns (assignments, last id visited, shortfall)."""
    assign = {}
    remaining = target
    left = budget
    last = None
    for rid, rate, cap in entries:
        if remaining <= 0.0 or left <= 0.0:
            break
        if rate <= 0.0:
            break
        need_bees = remaining / rate
        take = min(cap, need_bees, left)
        if take <= 0.0:
            continue
        assign[rid] = take
        last = rid
        left -= take
        # see _allocate_nectar_power: exact zero on a need-limited take
        if take == need_bees:
            remaining = 0.0
        else:
            remaining = max(0.0, remaining - take * rate)
    return assign, last, remaining


def _fill_by_capacity(entries, demand):
    """Greedy fill to a bee-count demand: entries are (id, capacity)
    ranked; the marginal entry is split.  Returns (assignments, last id,
    unmet demand)."""
    assign = {}
    remaining = demand
    last = None
    for rid, cap in entries:
        if remaining <= 0.0:
            break
        take = min(cap, remaining)
        if take <= 0.0:
            continue
        assign[rid] = take
        last = rid
        remaining -= take
    return assign, last, max(0.0, remaining)


# ---------------------------------------------------------------------------
# Exchange cases

def solve_case_A(nectar_ranked: list[NectarOption], pollen_ranked: list[PollenOption],
                 min_pollen_income: float, p: ForagingParams,
                 coeffs: EnergyCoefficients, forager_budget: float) -> ExchangeSolution:
    """Deficit: mandatory pollen income first, everyone else on nectar.

    Pollen patches are consumed in decreasing costless-slope order (the
    tau-free ranking); nectar patches in decreasing efficiency order,
    the last one visited defining eta_cut.  tau then satisfies

        slope_cut * tau = eta_cut + sum(phi_f * cost_f) / sum(phi_f)

    over the useful pollen set, weighted by assigned head-counts.
    """
    if forager_budget <= 0.0:
        raise InfeasibleMarketError("no foragers available")
    warnings = []

    pollen_sorted = sorted(pollen_ranked, key=lambda o: (-o.affine.slope, o.resource_id))
    entries = [(o.resource_id, o.income_rate, o.capacity) for o in pollen_sorted]
    pollen_assign, cut_id, income_short = _fill_by_rate(entries, min_pollen_income,
                                                        forager_budget)
    if income_short > 1e-12 * max(1.0, min_pollen_income):
        raise InfeasibleMarketError(
            f"pollen resources cannot supply the minimal income "
            f"({min_pollen_income:g} g/s, short {income_short:g} g/s)")
    pollen_bees = sum(pollen_assign.values())
    remaining_budget = forager_budget - pollen_bees
    if remaining_budget <= 0.0:
        raise InfeasibleMarketError("minimal pollen income exhausts the forager budget")

    nectar_positive = [o for o in nectar_ranked if o.quality > 0.0]
    if not nectar_positive:
        raise InfeasibleMarketError("no nectar resource with positive quality")
    nectar_sorted = sorted(nectar_positive, key=lambda o: (-o.efficiency, o.resource_id))
    nectar_assign, nectar_last, unplaced = _fill_by_capacity(
        [(o.resource_id, o.capacity) for o in nectar_sorted], remaining_budget)
    eta_by_id = {o.resource_id: o.efficiency for o in nectar_sorted}
    eta_cut = eta_by_id[nectar_last]
    if unplaced > 0.0:
        warnings.append("nectar capacity saturated; surplus foragers kept in reserve")

    useful = [o for o in pollen_sorted if pollen_assign.get(o.resource_id, 0.0) > 0.0]
    if useful:
        cut_slope = next(o.affine.slope for o in useful if o.resource_id == cut_id)
        weight = sum(o.capacity for o in useful)
        avg_cost = sum(o.capacity * o.cost_power for o in useful) / weight
        tau = (eta_cut + avg_cost) / cut_slope
        trace = [tau]
    else:
        tau = None
        trace = []
        warnings.append("no pollen income demanded; exchange rate undefined")

    return ExchangeSolution(
        case="A", tau=tau, eta_cut=eta_cut,
        nectar=AllocationPlan(nectar_assign, reserve=unplaced),
        pollen=AllocationPlan(pollen_assign),
        trace=trace, converged=True, iterations=1,
        regime=Regime.DEFICIT, warnings=warnings)


def _allocate_nectar_power(options: list[NectarOption], need: float, budget: float):
    """Fill nectar patches in decreasing efficiency order until their
    power output meets ``need`` (or budget/capacity runs out).  Returns
    (assignments, eta_cut, bees used, leftover need)."""
    usable = sorted((o for o in options if o.quality > 0.0 and o.efficiency > 0.0),
                    key=lambda o: (-o.efficiency, o.resource_id))
    assign = {}
    remaining = need
    left = budget
    eta_cut = 0.0
    for o in usable:
        if remaining <= 0.0 or left <= 0.0:
            break
        need_bees = remaining / o.efficiency
        take = min(o.capacity, need_bees, left)
        if take <= 0.0:
            continue
        assign[o.resource_id] = take
        eta_cut = o.efficiency
        left -= take
        # a need-limited take meets the need by construction; zeroing here
        # keeps one-ulp division residue from spilling a phantom sliver of
        # bees onto the next patch and mispricing the marginal efficiency
        if take == need_bees:
            remaining = 0.0
        else:
            remaining = max(0.0, remaining - take * o.efficiency)
    return assign, eta_cut, budget - left, remaining


def _allocate_pollen_value(options: list[PollenOption], tau: float, demand: float):
    """Fill pollen patches in decreasing value(tau) order up to demand."""
    ranked = sorted(options, key=lambda o: (-o.affine.value(tau), o.resource_id))
    return _fill_by_capacity([(o.resource_id, o.capacity) for o in ranked], demand)


def solve_case_B(nectar_ranked: list[NectarOption], pollen_options: list[PollenOption],
                 forager_budget: float, base_nectar_need: float,
                 tolerance: float = 1e-6, max_iter: int = 100) -> ExchangeSolution:
    """Surplus with finite t0: iterate the pollen-cost feedback.

    Each pass allocates nectar bees to cover the current nectar power
    need (defining eta_cut), inverts the cut envelope of the remaining
    demand at eta_cut to get tau_k, prices the pollen-fetching cost at
    tau_k and folds it back into the need.  Stops when consecutive
    iterates differ by less than ``tolerance`` (absolute); returns the
    midpoint of the final bracket.  Raises ScarceMarketError when the
    demand exceeds total pollen capacity (t0 infinite, case for the
    scarce solver).
    """
    if forager_budget <= 0.0:
        raise InfeasibleMarketError("no foragers available")
    if not pollen_options:
        raise ScarceMarketError("no pollen resources at all")
    affines = [o.affine for o in pollen_options]
    cost_by_id = {o.resource_id: o.cost_power for o in pollen_options}

    warnings = []
    trace: list[float] = []
    need = base_nectar_need
    nectar_assign: dict[int, float] = {}
    pollen_assign: dict[int, float] = {}
    eta_cut = 0.0
    converged = False
    prev_tau = None
    iterations = 0

    for iterations in range(1, max_iter + 1):
        nectar_assign, eta_cut, nectar_bees, short = _allocate_nectar_power(
            nectar_ranked, need, forager_budget)
        if short > 0.0:
            warnings.append("nectar capacity short of the required power")
        demand = forager_budget - nectar_bees
        if demand <= 0.0:
            warnings.append("nectar need exhausts the forager budget; no pollen bees")
            return ExchangeSolution(
                case="B.i", tau=None, eta_cut=eta_cut,
                nectar=AllocationPlan(nectar_assign),
                pollen=AllocationPlan({}),
                trace=trace, converged=False, iterations=iterations,
                regime=Regime.SURPLUS, warnings=warnings)
        cut = build_eta_cut(affines, demand)
        if math.isinf(cut.t0):
            raise ScarceMarketError(
                f"pollen capacity {sum(a.capacity for a in affines):g} bees cannot "
                f"absorb the demand {demand:g}")
        tau_k = cut.inverse(eta_cut)
        trace.append(tau_k)
        pollen_assign, _, _ = _allocate_pollen_value(pollen_options, tau_k, demand)
        cost_power = sum(x * cost_by_id[rid] for rid, x in sorted(pollen_assign.items()))
        if prev_tau is not None and abs(tau_k - prev_tau) < tolerance:
            converged = True
            break
        prev_tau = tau_k
        need = base_nectar_need + cost_power

    if not converged:
        warnings.append(f"no convergence within {max_iter} iterations; "
                        "returning the final bracket midpoint")
    tau = trace[-1] if len(trace) == 1 else 0.5 * (trace[-2] + trace[-1])

    return ExchangeSolution(
        case="B.i", tau=tau, eta_cut=eta_cut,
        nectar=AllocationPlan(nectar_assign),
        pollen=AllocationPlan(pollen_assign),
        trace=trace, converged=converged, iterations=iterations,
        regime=Regime.SURPLUS, warnings=warnings)


# --- scarce variant: quality replaces efficiency --------------------------

def _quality_cut_segments(options: list[PollenOption], demand: float, tau_max: float):
    """Piecewise-affine description of the scarce quality cut on
    [0, tau_max]: the quality of the last patch taken when patches are
    consumed in decreasing positive quality order up to ``demand``.

    Unlike the abundant envelope this is a sawtooth: each zero crossing
    adds a new worst patch and the cut drops.  Returns a list of
    (lo, hi, slope, intercept) with slope 0 marking "no positive patch".
    """
    events = {0.0, tau_max}
    for i, a in enumerate(options):
        zero = a.quality_cost / a.quality_slope
        if 0.0 < zero < tau_max:
            events.add(zero)
        for b in options[i + 1:]:
            if a.quality_slope != b.quality_slope:
                cross = (a.quality_cost - b.quality_cost) / (a.quality_slope - b.quality_slope)
                if 0.0 < cross < tau_max:
                    events.add(cross)
    starts = sorted(events)
    segments = []
    for j in range(len(starts)):
        lo = starts[j]
        hi = starts[j + 1] if j + 1 < len(starts) else math.inf
        if lo >= tau_max:
            break
        mid = 0.5 * (lo + min(hi, tau_max)) if math.isfinite(hi) else lo + 1.0
        ranked = sorted(options, key=lambda o: (-o.quality(mid), o.resource_id))
        acc = 0.0
        last = None
        for o in ranked:
            if o.quality(mid) <= 0.0:
                break
            acc += o.capacity
            last = o
            if acc >= demand:
                break
        if last is None:
            segments.append((lo, hi, 0.0, 0.0))
        else:
            segments.append((lo, hi, last.quality_slope, -last.quality_cost))
    return segments


def _invert_quality_cut(options, demand, target, tau_max):
    """Smallest tau <= tau_max where the scarce quality cut equals
    ``target``; None when never reached (or no positive patch exists)."""
    for lo, hi, slope, intercept in _quality_cut_segments(options, demand, tau_max):
        if slope <= 0.0:
            continue
        tau = (target - intercept) / slope
        if tau < lo - 1e-12 * max(1.0, abs(lo)):
            continue
        if tau < min(hi, tau_max) or (tau <= tau_max and math.isinf(hi)):
            return float(max(tau, lo))
    return None


def _allocate_pollen_quality(options: list[PollenOption], tau: float, demand: float):
    """Fill positive-quality pollen patches in decreasing quality order
    up to demand; the rest of the demand stays unassigned (reserve)."""
    ranked = sorted(options, key=lambda o: (-o.quality(tau), o.resource_id))
    usable = [(o.resource_id, o.capacity) for o in ranked if o.quality(tau) > 0.0]
    return _fill_by_capacity(usable, demand)


def _allocate_nectar_quality(options: list[NectarOption], need: float, budget: float):
    """Nectar fill ranked by quality instead of efficiency (scarce path);
    bees still convert power at their efficiency."""
    usable = sorted((o for o in options if o.quality > 0.0 and o.efficiency > 0.0),
                    key=lambda o: (-o.quality, o.resource_id))
    assign = {}
    remaining = need
    left = budget
    q_cut = 0.0
    for o in usable:
        if remaining <= 0.0 or left <= 0.0:
            break
        need_bees = remaining / o.efficiency
        take = min(o.capacity, need_bees, left)
        if take <= 0.0:
            continue
        assign[o.resource_id] = take
        q_cut = o.quality
        left -= take
        # see _allocate_nectar_power: exact zero on a need-limited take
        if take == need_bees:
            remaining = 0.0
        else:
            remaining = max(0.0, remaining - take * o.efficiency)
    return assign, q_cut, budget - left, remaining


def solve_case_B_scarce(nectar_ranked: list[NectarOption],
                        pollen_options: list[PollenOption],
                        forager_budget: float, base_nectar_need: float,
                        p: ForagingParams, tolerance: float = 1e-6,
                        max_iter: int = 100, tau_max: float = 1e6) -> ExchangeSolution:
    """Surplus with t0 = +inf: rankings and cuts use quality instead of
    efficiency, every positive-quality pollen patch is worth filling and
    leftover foragers stay in reserve.

    The quality cut is a sawtooth (each newly-positive patch becomes the
    worst one taken), so the inversion takes the smallest tau at which
    the cut meets the nectar quality cut.  When no tau <= tau_max
    produces a positive-quality pollen patch the exchange rate is
    undefined and the whole demand is reserved (flagged).
    """
    if forager_budget <= 0.0:
        raise InfeasibleMarketError("no foragers available")
    warnings = []
    trace: list[float] = []
    need = base_nectar_need
    nectar_assign: dict[int, float] = {}
    pollen_assign: dict[int, float] = {}
    q_cut = 0.0
    converged = False
    prev_tau = None
    iterations = 0
    demand = 0.0

    for iterations in range(1, max_iter + 1):
        nectar_assign, q_cut, nectar_bees, short = _allocate_nectar_quality(
            nectar_ranked, need, forager_budget)
        if short > 0.0:
            warnings.append("nectar capacity short of the required power")
        demand = forager_budget - nectar_bees
        if demand <= 0.0:
            warnings.append("nectar need exhausts the forager budget; no pollen bees")
            return ExchangeSolution(
                case="B.ii", tau=None, eta_cut=q_cut,
                nectar=AllocationPlan(nectar_assign),
                pollen=AllocationPlan({}),
                trace=trace, converged=False, iterations=iterations,
                regime=Regime.SURPLUS, warnings=warnings)
        tau_k = _invert_quality_cut(pollen_options, demand, q_cut, tau_max)
        if tau_k is None:
            if any(o.quality(tau_max) > 0.0 for o in pollen_options):
                tau_k = tau_max
                warnings.append("quality cut never reaches the nectar cut; tau capped at tau_max")
            else:
                warnings.append("no positive-quality pollen at any tau <= tau_max; "
                                "exchange rate undefined")
                return ExchangeSolution(
                    case="B.ii", tau=None, eta_cut=q_cut,
                    nectar=AllocationPlan(nectar_assign),
                    pollen=AllocationPlan({}, reserve=demand),
                    trace=trace, converged=False, iterations=iterations,
                    regime=Regime.SURPLUS, warnings=warnings)
        trace.append(tau_k)
        pollen_assign, _, _ = _allocate_pollen_quality(pollen_options, tau_k, demand)
        cost_power = sum(x * next(o.cost_power for o in pollen_options if o.resource_id == rid)
                         for rid, x in sorted(pollen_assign.items()))
        if prev_tau is not None and abs(tau_k - prev_tau) < tolerance:
            converged = True
            break
        prev_tau = tau_k
        need = base_nectar_need + cost_power

    if not converged and iterations >= max_iter:
        warnings.append(f"no convergence within {max_iter} iterations; "
                        "returning the final bracket midpoint")
    tau = trace[-1] if len(trace) == 1 else 0.5 * (trace[-2] + trace[-1])
    final_pollen = AllocationPlan(pollen_assign,
                                  reserve=max(0.0, demand - sum(pollen_assign.values())))

    return ExchangeSolution(
        case="B.ii", tau=tau, eta_cut=q_cut,
        nectar=AllocationPlan(nectar_assign),
        pollen=final_pollen,
        trace=trace, converged=converged, iterations=iterations,
        regime=Regime.SURPLUS, warnings=warnings)
