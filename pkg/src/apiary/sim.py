"""Daily time-step colony simulator.

Each day couples the modules in a fixed order: classify the ledger
regime, solve the matching exchange-market case, accrue foraging income
over the day's foraging hours, apply predation to the assigned foragers,
price heating (active brood nest, or winter cluster when broodless),
debit upkeep and larval provisioning, then age the population.

The energy ledger is closed exactly: every report carries the signed
joule fluxes of the day and the running colony energy is accumulated
from them in one fixed-order sum, so E(t) can be reconstructed
bit-identically from the report stream.  Honey and pollen stocks update
from the gram forms of the same numbers.  A stock that would go negative
halts the run with a starvation report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import market as market_mod
from .demography import (DEVELOPMENT_DAYS, AgeStructure, ColonyState,
                         EnergyCoefficients, SurvivalCurve, TaskSchedule,
                         advance_day, cohort_count, daily_mortality, total_energy)
from .flora import ForagingParams, Landscape, quality_at_distance
from .foraging import (AllocationPlan, PredationParams, predation_flight_rate,
                       predation_foraging_rate, trip_cycle)
from .market import (ExchangeSolution, InfeasibleMarketError, NectarOption,
                     Regime, ScarceMarketError, classify_regime, pollen_option,
                     solve_case_A, solve_case_B, solve_case_B_scarce, target_ratio)
from .thermo import ThermalParams, active_heating_power, cluster_heating_power

SECONDS_PER_DAY = 86400.0

# Fixed column order of reports.csv; documented in the README and relied
# on by the ledger-reconstruction tests.
REPORT_COLUMNS = [
    "day", "t_out", "foraging_hours", "winter", "regime", "case", "tau",
    "eta_cut", "converged", "honey_g", "pollen_g", "comb_g", "energy_j",
    "females", "males", "larvae", "nurses", "foragers", "eggs_laid",
    "emerged", "deaths_natural", "deaths_predation", "reserve_bees",
    "flux_foraging_j", "flux_pollen_cost_j", "flux_upkeep_j",
    "flux_heating_j", "flux_mortality_j", "flux_brood_j",
    "flux_emergence_j", "pollen_income_g", "pollen_brood_g",
]


class StarvationError(RuntimeError):
    """A stock would have gone negative; the run halts on this day."""

    def __init__(self, day: int, stock: str, shortfall: float):
        self.day = day
        self.stock = stock
        self.shortfall = shortfall
        super().__init__(f"day {day}: {stock} stock exhausted "
                         f"(shortfall {shortfall:.3f} g)")


@dataclass(frozen=True)
class WeatherSeries:
    """Per-day driving weather."""

    t_out: np.ndarray
    foraging_hours: np.ndarray
    winter: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_out, dtype=float)
        h = np.asarray(self.foraging_hours, dtype=float)
        w = np.asarray(self.winter, dtype=bool)
        object.__setattr__(self, "t_out", t)
        object.__setattr__(self, "foraging_hours", h)
        object.__setattr__(self, "winter", w)
        if not (t.size == h.size == w.size):
            raise ValueError("weather arrays must share one length")
        if np.any(h < 0.0) or np.any(h > 24.0):
            raise ValueError("foraging hours must lie in [0, 24]")

    def __len__(self) -> int:
        return self.t_out.size


@dataclass(frozen=True)
class WinterPlan:
    """Planning input for the winter target ratio: the expected winter
    colony size and the anticipated daily outside temperatures."""

    n_winter: float
    t_out: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t_out", np.asarray(self.t_out, dtype=float))
        if self.n_winter <= 0.0:
            raise ValueError("winter colony size must be positive")


@dataclass(frozen=True)
class MarketConfig:
    """Per-scenario knobs of the exchange solvers."""

    min_pollen_income: float = 0.0       # g/s during foraging, case A floor
    hysteresis: float = 0.05
    tolerance: float = 1e-6
    max_iter: int = 100
    tau_max: float = 1e6
    base_nectar_need: float | None = None  # W; None = pi*N + heating

    def __post_init__(self):
        if self.min_pollen_income < 0.0:
            raise ValueError("min_pollen_income must be non-negative")
        if self.tolerance <= 0.0 or self.max_iter < 1 or self.tau_max <= 0.0:
            raise ValueError("invalid solver settings")


@dataclass(frozen=True)
class Scenario:
    """Everything one run needs."""

    colony: ColonyState
    survival: SurvivalCurve
    schedule: TaskSchedule
    coeffs: EnergyCoefficients
    thermal: ThermalParams
    foraging: ForagingParams
    weather: WeatherSeries
    winter_plan: WinterPlan
    horizon: int
    market: MarketConfig = field(default_factory=MarketConfig)
    landscape: Landscape | None = None
    predation: PredationParams | None = None
    queen_rate: float = 1200.0
    nurse_factor: float = 3.0
    seed: int = 0  # reserved; the model is deterministic

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1 day")
        if len(self.weather) < self.horizon:
            raise ValueError("weather series shorter than the horizon")
        if self.queen_rate < 0.0 or self.nurse_factor < 0.0:
            raise ValueError("laying parameters must be non-negative")
        # The driver needs these two cohorts by name.
        self.schedule.index_of("nurse")
        self.schedule.index_of("forager")


@dataclass
class DailyReport:
    day: int
    t_out: float
    foraging_hours: float
    winter: bool
    regime: str
    case: str
    tau: float | None
    eta_cut: float
    converged: bool
    honey_g: float
    pollen_g: float
    comb_g: float
    energy_j: float
    females: float
    males: float
    larvae: float
    nurses: float
    foragers: float
    eggs_laid: float
    emerged: float
    deaths_natural: float
    deaths_predation: float
    reserve_bees: float
    flux_foraging_j: float
    flux_pollen_cost_j: float
    flux_upkeep_j: float
    flux_heating_j: float
    flux_mortality_j: float
    flux_brood_j: float
    flux_emergence_j: float
    pollen_income_g: float
    pollen_brood_g: float

    def to_row(self) -> list[str]:
        out = []
        for name in REPORT_COLUMNS:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, bool) or isinstance(v, np.bool_):
                out.append("1" if v else "0")
            elif isinstance(v, str):
                out.append(v)
            elif isinstance(v, (int, np.integer)):
                out.append(str(int(v)))
            else:
                out.append(repr(float(v)))
        return out


@dataclass
class RunResult:
    reports: list[DailyReport]
    summary: dict
    halted: bool = False


def _resource_static(landscape: Landscape, p: ForagingParams,
                     coeffs: EnergyCoefficients):
    """Per-resource constants of a run: options for the solvers plus the
    cycle split needed by the predation model."""
    nectar, pollen, cycles = [], [], {}
    for res in sorted(landscape.resources, key=lambda r: r.id):
        d = landscape.hive_distance(res)
        cyc = trip_cycle(res, d, p)
        cycles[res.id] = (res, cyc)
        if res.is_nectar:
            q = quality_at_distance(res, d, p)
            eta = p.q0 * q / cyc.total
            cap = res.area_s * res.rho_f * (res.lambda_f / res.q_f) * cyc.total
            nectar.append(NectarOption(res.id, eta, cap, q))
        else:
            pollen.append(pollen_option(res, d, p, coeffs))
    return nectar, pollen, cycles


class Simulation:
    """Sequential driver; carries the accumulated energy, the previous
    allocation (for the Balanced freeze) and the static resource tables."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.state = scenario.colony.copy()
        self.energy = total_energy(self.state, scenario.coeffs)
        self.prev_solution: ExchangeSolution | None = None
        self.thermal_active = replace(scenario.thermal,
                                      t_target=scenario.thermal.t_brood)
        self.thermal_cluster = replace(scenario.thermal,
                                       t_target=scenario.thermal.t_center_min)
        self.r_target = target_ratio(scenario.coeffs.alpha,
                                     scenario.coeffs.alpha_tilde,
                                     scenario.winter_plan.t_out,
                                     scenario.winter_plan.n_winter,
                                     self.thermal_cluster)
        if scenario.landscape is not None and scenario.landscape.resources:
            self.nectar_options, self.pollen_options, self.cycles = _resource_static(
                scenario.landscape, scenario.foraging, scenario.coeffs)
        else:
            self.nectar_options, self.pollen_options, self.cycles = [], [], {}

    # -- market ------------------------------------------------------------

    def _frozen_solution(self, forager_count: float) -> ExchangeSolution:
        """Balanced regime: freeze the previous day's allocation, scaled
        down if the forager cohort shrank."""
        prev = self.prev_solution
        if prev is None:
            return ExchangeSolution(case="balanced", tau=None, eta_cut=0.0,
                                    nectar=AllocationPlan({}), pollen=AllocationPlan({}),
                                    regime=Regime.BALANCED,
                                    warnings=["no previous allocation to freeze"])
        assigned = prev.nectar.total + prev.pollen.total
        scale = min(1.0, forager_count / assigned) if assigned > 0.0 else 0.0
        nectar = {k: v * scale for k, v in prev.nectar.assignments.items()}
        pollen = {k: v * scale for k, v in prev.pollen.assignments.items()}
        return ExchangeSolution(case="balanced", tau=prev.tau, eta_cut=prev.eta_cut,
                                nectar=AllocationPlan(nectar),
                                pollen=AllocationPlan(pollen),
                                regime=Regime.BALANCED)

    def _solve_market(self, regime: Regime, forager_count: float,
                      heating_w: float) -> ExchangeSolution:
        sc = self.scenario
        cfg = sc.market
        if regime is Regime.BALANCED:
            return self._frozen_solution(forager_count)
        if regime is Regime.DEFICIT:
            try:
                return solve_case_A(self.nectar_options, self.pollen_options,
                                    cfg.min_pollen_income, sc.foraging, sc.coeffs,
                                    forager_count)
            except InfeasibleMarketError as err:
                # The colony still does what it can: all pollen capacity,
                # the rest to nectar, no defined exchange rate.
                pollen = {o.resource_id: min(o.capacity, forager_count)
                          for o in self.pollen_options}
                used = sum(pollen.values())
                nectar, _, unplaced = market_mod._fill_by_capacity(
                    [(o.resource_id, o.capacity)
                     for o in sorted(self.nectar_options,
                                     key=lambda o: (-o.efficiency, o.resource_id))
                     if o.quality > 0.0],
                    max(0.0, forager_count - used))
                return ExchangeSolution(
                    case="A", tau=None, eta_cut=0.0,
                    nectar=AllocationPlan(nectar, reserve=unplaced),
                    pollen=AllocationPlan(pollen),
                    converged=False, regime=Regime.DEFICIT,
                    warnings=[f"deficit market infeasible: {err}"])
        base_need = cfg.base_nectar_need
        if base_need is None:
            base_need = sc.coeffs.pi * self.state.population.total + heating_w
        try:
            return solve_case_B(self.nectar_options, self.pollen_options,
                                forager_count, base_need,
                                tolerance=cfg.tolerance, max_iter=cfg.max_iter)
        except ScarceMarketError:
            return solve_case_B_scarce(self.nectar_options, self.pollen_options,
                                       forager_count, base_need, sc.foraging,
                                       tolerance=cfg.tolerance,
                                       max_iter=cfg.max_iter, tau_max=cfg.tau_max)

    # -- predation ----------------------------------------------------------

    def _predation_deaths(self, solution: ExchangeSolution, seconds: float) -> float:
        sc = self.scenario
        pred = sc.predation
        if pred is None or seconds <= 0.0:
            return 0.0
        tau = solution.tau if solution.tau is not None else 0.0
        flight = predation_flight_rate(tau, sc.coeffs, sc.foraging, pred)
        deaths = 0.0
        for plan in (solution.nectar, solution.pollen):
            for rid, bees in sorted(plan.assignments.items()):
                if bees <= 0.0:
                    continue
                res, cyc = self.cycles[rid]
                site = predation_foraging_rate(res, tau, sc.coeffs, sc.foraging, pred)
                rate = (flight * cyc.t_flight + max(0.0, site) * cyc.t_foraging) / cyc.total
                deaths += bees * min(1.0, rate * seconds)
        return deaths

    # -- one day -------------------------------------------------------------

    def step_day(self, day_index: int):
        sc = self.scenario
        state = self.state
        coeffs = sc.coeffs
        t_out = float(sc.weather.t_out[day_index])
        hours = float(sc.weather.foraging_hours[day_index])
        is_winter = bool(sc.weather.winter[day_index])
        seconds = hours * 3600.0

        nurse_i = sc.schedule.index_of("nurse")
        forager_i = sc.schedule.index_of("forager")
        nurses = cohort_count(state.population, sc.schedule, nurse_i)
        foragers = cohort_count(state.population, sc.schedule, forager_i)

        # Heating regime: an occupied brood nest forces the active model;
        # a broodless winter colony clusters; otherwise no heating bill.
        brood_present = state.larvae > 0.0
        if brood_present:
            heating_w = active_heating_power(nurses, t_out, self.thermal_active)
        elif is_winter:
            heating_w = cluster_heating_power(state.population.total, t_out,
                                              self.thermal_cluster)
        else:
            heating_w = 0.0

        # Market solve (skipped when nobody can fly).
        ratio = classify_regime(state, self.r_target, sc.market.hysteresis, coeffs)
        can_forage = (seconds > 0.0 and foragers > 0.0
                      and (self.nectar_options or self.pollen_options))
        if can_forage:
            solution = self._solve_market(ratio.regime, foragers, heating_w)
        else:
            solution = ExchangeSolution(case="none", tau=None, eta_cut=0.0,
                                        nectar=AllocationPlan({}),
                                        pollen=AllocationPlan({}),
                                        regime=ratio.regime)

        # Income accrual over the foraging window.
        eta_by_id = {o.resource_id: o.efficiency for o in self.nectar_options}
        flux_foraging = 0.0
        for rid, bees in sorted(solution.nectar.assignments.items()):
            flux_foraging += bees * eta_by_id[rid] * seconds
        pollen_income_g = 0.0
        pollen_cost_w = 0.0
        by_id = {o.resource_id: o for o in self.pollen_options}
        for rid, bees in sorted(solution.pollen.assignments.items()):
            pollen_income_g += bees * by_id[rid].income_rate * seconds
            pollen_cost_w += bees * by_id[rid].cost_power
        flux_pollen_cost = -pollen_cost_w * seconds

        # Predation thins the forager cohort before natural aging.
        deaths_pred = min(self._predation_deaths(solution, seconds), foragers)
        pop = state.population.copy()
        if deaths_pred > 0.0 and foragers > 0.0:
            lo, hi = sc.schedule.window(forager_i, pop.max_age)
            pop.counts[lo:hi + 1] *= 1.0 - deaths_pred / foragers

        deaths_nat = daily_mortality(pop, sc.survival)

        flux_upkeep = -coeffs.pi * pop.total * SECONDS_PER_DAY
        flux_heating = -heating_w * SECONDS_PER_DAY
        flux_mortality = -coeffs.alpha * (deaths_nat + deaths_pred)

        # Brood pipeline: emergence, then laying, then provisioning of
        # every larva present tonight (winter pauses the queen).
        emerged = float(state.brood[-1])
        eggs = 0.0
        if not is_winter:
            eggs = min(sc.queen_rate, sc.nurse_factor * nurses)
        new_brood = np.empty_like(state.brood)
        new_brood[1:] = state.brood[:-1]
        new_brood[0] = eggs
        larvae_now = float(np.sum(new_brood))
        brood_honey_g = larvae_now * (coeffs.alpha / (DEVELOPMENT_DAYS * coeffs.mu))
        brood_pollen_g = larvae_now * (coeffs.alpha_tilde / DEVELOPMENT_DAYS)
        flux_brood = -coeffs.mu * brood_honey_g
        flux_emergence = coeffs.alpha * emerged

        # Stock updates, fixed order; underflow halts the day.
        gain_g = flux_foraging / coeffs.mu
        pollen_cost_g = -flux_pollen_cost / coeffs.mu
        upkeep_g = -flux_upkeep / coeffs.mu
        heating_g = -flux_heating / coeffs.mu
        honey_new = (state.honey + gain_g - pollen_cost_g - upkeep_g
                     - heating_g - brood_honey_g)
        if honey_new < 0.0:
            raise StarvationError(day_index, "honey", -honey_new)
        pollen_new = state.pollen + pollen_income_g - brood_pollen_g
        if pollen_new < 0.0:
            raise StarvationError(day_index, "pollen", -pollen_new)

        new_pop = advance_day(pop, sc.survival, emerged)

        # Accumulated energy: one fixed-order sum per day (ledger closure).
        self.energy = self.energy + (flux_foraging + flux_pollen_cost
                                     + flux_upkeep + flux_heating
                                     + flux_mortality + flux_brood
                                     + flux_emergence)

        self.state = ColonyState(honey_new, pollen_new, state.comb,
                                 new_pop, new_brood)
        self.prev_solution = solution

        report = DailyReport(
            day=day_index, t_out=t_out, foraging_hours=hours, winter=is_winter,
            regime=ratio.regime.value, case=solution.case, tau=solution.tau,
            eta_cut=solution.eta_cut, converged=solution.converged,
            honey_g=honey_new, pollen_g=pollen_new, comb_g=state.comb,
            energy_j=self.energy, females=new_pop.total_females,
            males=new_pop.males, larvae=larvae_now, nurses=nurses,
            foragers=foragers, eggs_laid=eggs, emerged=emerged,
            deaths_natural=deaths_nat, deaths_predation=deaths_pred,
            reserve_bees=solution.reserve,
            flux_foraging_j=flux_foraging, flux_pollen_cost_j=flux_pollen_cost,
            flux_upkeep_j=flux_upkeep, flux_heating_j=flux_heating,
            flux_mortality_j=flux_mortality, flux_brood_j=flux_brood,
            flux_emergence_j=flux_emergence, pollen_income_g=pollen_income_g,
            pollen_brood_g=brood_pollen_g)
        return report


def step_day(state: ColonyState, scenario: Scenario, day_index: int,
             prev_solution: ExchangeSolution | None = None):
    """One-shot single day: build a driver around ``state`` and advance it.
    Returns (new state, report)."""
    sim = Simulation(replace(scenario, colony=state))
    sim.prev_solution = prev_solution
    report = sim.step_day(day_index)
    return sim.state, report


def run(scenario: Scenario) -> RunResult:
    """Run the horizon; a starvation halt keeps the completed days."""
    sim = Simulation(scenario)
    reports: list[DailyReport] = []
    halted = False
    halt_info = None
    for day in range(scenario.horizon):
        try:
            reports.append(sim.step_day(day))
        except StarvationError as err:
            halted = True
            halt_info = {"day": err.day, "stock": err.stock,
                         "shortfall_g": err.shortfall}
            break
    summary = _summarize(sim, scenario, reports, halted, halt_info)
    return RunResult(reports, summary, halted)


def _summarize(sim: Simulation, scenario: Scenario, reports, halted, halt_info):
    state = sim.state
    ok, margin = winter_survival_check(state, _plan_weather(scenario.winter_plan),
                                       scenario.coeffs, scenario.thermal)
    summary = {
        "days_run": len(reports),
        "horizon": scenario.horizon,
        "halted": halted,
        "halt": halt_info,
        "final": {
            "honey_g": state.honey,
            "pollen_g": state.pollen,
            "comb_g": state.comb,
            "females": state.population.total_females,
            "males": state.population.males,
            "larvae": state.larvae,
            "energy_j": sim.energy,
        },
        "r_target": sim.r_target,
        "winter_ready": bool(ok),
        "winter_margin_days": margin if math.isfinite(margin) else None,
    }
    if reports:
        summary["totals"] = {
            "foraging_j": sum(r.flux_foraging_j for r in reports),
            "heating_j": sum(-r.flux_heating_j for r in reports),
            "upkeep_j": sum(-r.flux_upkeep_j for r in reports),
            "deaths_natural": sum(r.deaths_natural for r in reports),
            "deaths_predation": sum(r.deaths_predation for r in reports),
            "eggs_laid": sum(r.eggs_laid for r in reports),
        }
    return summary


def _plan_weather(plan: WinterPlan) -> WeatherSeries:
    n = plan.t_out.size
    return WeatherSeries(plan.t_out, np.zeros(n), np.ones(n, dtype=bool))


def winter_survival_check(state: ColonyState, winter: WeatherSeries,
                          coeffs: EnergyCoefficients, p: ThermalParams):
    """Can the colony pay the winter bill from its stocks?

    True iff honey energy covers cluster heating plus upkeep over the
    series and the hive ratio has reached the target computed from the
    same series.  The margin is the surplus expressed in days of average
    winter spend (negative when short; infinite for an empty winter).
    """
    days = len(winter)
    if days == 0:
        return True, math.inf
    cluster = replace(p, t_target=p.t_center_min)
    n = state.population.total
    need = 0.0
    for t in winter.t_out:
        need += (cluster_heating_power(n, float(t), cluster)
                 + coeffs.pi * n) * SECONDS_PER_DAY
    stock = coeffs.mu * state.honey
    if need <= 0.0:
        return True, math.inf
    margin = (stock - need) / (need / days)
    r_target = target_ratio(coeffs.alpha, coeffs.alpha_tilde, winter.t_out,
                            max(n, 1.0), cluster)
    r_hive = (coeffs.mu * state.honey / state.pollen if state.pollen > 0.0
              else math.inf)
    ok = stock >= need and r_hive >= r_target
    return ok, margin


def write_reports_csv(reports: list[DailyReport], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for r in reports:
            fh.write(",".join(r.to_row()) + "\n")


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
