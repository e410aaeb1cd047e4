"""End-to-end acceptance gate.

Ten numbered checks, each printing one ``[PASS]``/``[FAIL]`` verdict line.
Every expected value is produced by an independent in-test oracle (brute
force, scipy quadrature, greedy grid search, closed forms) — never by the
code under test.
"""

import io
import math
import time
from contextlib import redirect_stdout

import numpy as np
from scipy import integrate

from apiary import cli
from apiary.config import build_scenario, default_config
from apiary.demography import AgeStructure, EnergyCoefficients, total_energy
from apiary.flora import (NECTAR, FloralResource, Landscape, critical_density,
                          intrinsic_quality, quality_field)
from apiary.foraging import (PredationParams, efficiency, foragers_required,
                             predation_flight_rate, predation_foraging_rate,
                             resource_power_gain)
from apiary.market import (AffineEfficiency, NectarOption, PollenOption,
                           ScarceMarketError, build_eta_cut, solve_case_B)
from apiary.sim import run, write_reports_csv
from apiary.thermo import (ThermalParams, cluster_heating_power,
                           cluster_source_density)
from conftest import (base_foraging, dyadic_survival, flat_survival,
                      nectar_resource)

COEFFS = EnergyCoefficients(mu=12700.0, alpha=6000.0, alpha_tilde=0.13,
                            gamma=2000.0, pi=5e-4)


def _verdict(num: int, label: str, ok: bool):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {label}")
    assert ok, f"criterion {num}: {label}"


# -- 1: defaults surface the headline constants ---------------------------


def test_criterion_01_check_reports_headline_constants():
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["check"])
    out = buf.getvalue()
    ok = code == 0 and "35.5" in out and "10000" in out
    _verdict(1, "default check output states 35.5 and 10000", ok)


# -- 2: quality field against brute force ----------------------------------


def _random_quality_case(rng):
    shape = (64, 64)
    raster = np.zeros(shape, dtype=int)
    rr, cc = np.indices(shape)
    for rid in range(1, int(rng.integers(1, 6)) + 1):
        r0, c0 = int(rng.integers(0, 64)), int(rng.integers(0, 64))
        rad = int(rng.integers(2, 9))
        raster[(rr - r0) ** 2 + (cc - c0) ** 2 <= rad * rad] = rid
    ids = [int(i) for i in np.unique(raster) if i != 0]
    resources = tuple(
        nectar_resource(rid=i, q_f=float(rng.uniform(80.0, 200.0)),
                        rho_f=float(rng.uniform(2.0, 12.0)),
                        m_f=float(rng.uniform(4.0, 16.0)),
                        beta_f=float(rng.uniform(0.5, 6.0)))
        for i in ids)
    cell = float(rng.uniform(20.0, 60.0))
    return Landscape.from_raster(raster, resources, cell)


def _brute_quality(landscape, p):
    rr, cc = np.indices(landscape.shape)
    best = np.full(landscape.shape, -np.inf)
    for res in landscape.nectar_resources():
        src = np.argwhere(landscape.raster == res.id)
        d2 = ((rr[..., None] - src[:, 0]) ** 2
              + (cc[..., None] - src[:, 1]) ** 2).min(axis=-1)
        d = np.sqrt(d2.astype(float)) * landscape.cell_size
        best = np.maximum(best, intrinsic_quality(res, p) - d / p.d_max)
    return best


def test_criterion_02_quality_field_matches_brute_force():
    rng = np.random.default_rng(2)
    p = base_foraging()
    worst = 0.0
    start = time.perf_counter()
    for _ in range(20):
        land = _random_quality_case(rng)
        field = quality_field(land, p)
        worst = max(worst, float(np.abs(field.grid - _brute_quality(land, p)).max()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 5.0
    _verdict(2, f"20 brute-force fields agree (max err {worst:.2e}, "
                f"{elapsed:.2f}s)", ok)


# -- 3: open-terrain slope of the field -------------------------------------


def test_criterion_03_open_terrain_gradient():
    raster = np.zeros((256, 256), dtype=int)
    rr, cc = np.indices(raster.shape)
    raster[(rr - 128) ** 2 + (cc - 128) ** 2 <= 9] = 1
    p = base_foraging()
    land = Landscape.from_raster(raster, (nectar_resource(rid=1),), 50.0)
    field = quality_field(land, p)
    gy, gx = np.gradient(field.grid, land.cell_size)
    mag = np.hypot(gy, gx)[field.vacuum]
    target = 1.0 / p.d_max
    frac = float(np.mean(np.abs(mag - target) <= 0.05 * target))
    ok = frac >= 0.95
    _verdict(3, f"{frac:.4f} of vacuum cells slope within 5% of 1/d_max", ok)


# -- 4: cluster scaling law and source normalization ------------------------


def test_criterion_04_cluster_scaling_and_quadrature():
    doubling = True
    for nu in (1, 2, 3):
        p = ThermalParams(theta=1e-4, kappa=0.02, nu=nu, t_target=35.0)
        for n in (1.0, 64.0, 15000.0, 2.0e6):
            doubling &= (cluster_heating_power(8.0 * n, 0.0, p)
                         == 2.0 * cluster_heating_power(n, 0.0, p))
    p = ThermalParams(theta=1e-4, kappa=0.02, nu=2, t_target=35.0)
    vals = []
    for radius in (0.05, 0.1, 0.2):
        for dt in (5.0, 12.0, 25.0):
            total, _ = integrate.quad(
                lambda r: cluster_source_density(r, radius, p.t_target - dt, p)
                * 4.0 * np.pi * r * r, 0.0, radius)
            vals.append(total / (radius * dt))
    vals = np.asarray(vals)
    spread = float((vals.max() - vals.min()) / vals.mean())
    ok = doubling and spread < 1e-6
    _verdict(4, f"8x bees double the power exactly; source integral / "
                f"(R*dT) spread {spread:.2e}", ok)


# -- 5: per-bee efficiency times head-count equals patch power ---------------


def test_criterion_05_gain_factorization():
    rng = np.random.default_rng(5)
    p = base_foraging()
    worst = 0.0
    for i in range(100):
        res = nectar_resource(rid=i + 1,
                              q_f=float(rng.uniform(50.0, 200.0)),
                              rho_f=float(rng.uniform(1.0, 12.0)),
                              lambda_f=float(rng.uniform(1e-5, 2e-3)),
                              m_f=float(rng.uniform(4.0, 16.0)),
                              beta_f=float(rng.uniform(0.5, 8.0)),
                              n=int(rng.integers(2, 4)),
                              area_s=float(rng.uniform(1e3, 1e5)))
        d = float(rng.uniform(10.0, 9000.0))
        q = float(rng.uniform(0.01, 1.0))
        product = efficiency(res, d, q, p) * foragers_required(res, d, p)
        gain = resource_power_gain(res, q, p)
        worst = max(worst, abs(product - gain) / abs(gain))
    ok = worst < 1e-12
    _verdict(5, f"efficiency x head-count = patch power "
                f"(worst rel err {worst:.2e})", ok)


# -- 6: marginal-value envelope against greedy grid search ------------------


def _greedy_marginal(affines, demand, tau):
    opts = sorted(affines, key=lambda a: (-a.value(tau), a.resource_id))
    left = demand
    for a in opts:
        v = a.value(tau)
        if v <= 0.0:
            return 0.0
        if a.capacity >= left:
            return v
        left -= a.capacity
    return 0.0


def test_criterion_06_cut_envelope_matches_greedy():
    rng = np.random.default_rng(6)
    worst = 0.0
    structure_ok = True
    for _ in range(50):
        affines = [AffineEfficiency(i, float(rng.uniform(0.1, 3.0)),
                                    float(-rng.uniform(0.05, 2.0)),
                                    float(rng.uniform(0.2, 4.0)))
                   for i in range(int(rng.integers(2, 8)))]
        total_cap = sum(a.capacity for a in affines)
        demand = float(rng.uniform(0.3, 0.95)) * total_cap
        cut = build_eta_cut(affines, demand)
        taus = np.linspace(0.0, cut.t1 * 1.5 + 2.0, 1000)
        for t in taus:
            worst = max(worst, abs(cut.value(float(t))
                                   - _greedy_marginal(affines, demand, float(t))))
        # zero on [0, t0] (the kink itself may carry float dust)
        structure_ok &= all(cut.value(float(t)) == 0.0
                            for t in np.linspace(0.0, cut.t0, 40,
                                                 endpoint=False))
        structure_ok &= abs(cut.value(cut.t0)) <= 1e-12
        # nondecreasing on the sampled grid
        vals = [cut.value(float(t)) for t in taus]
        structure_ok &= all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        # continuous at every breakpoint
        for b in cut.breakpoints:
            left_tau = max(0.0, float(b) - 1e-9)
            structure_ok &= abs(cut.value(float(b)) - cut.value(left_tau)) <= 1e-6
        # a single affine piece beyond t1
        probe = [cut.value(cut.t1 + s) for s in (1.0, 2.0, 3.0, 4.0)]
        second = [(c - b) - (b - a) for a, b, c in zip(probe, probe[1:], probe[2:])]
        structure_ok &= all(abs(s) <= 1e-9 for s in second)
    ok = worst < 1e-9 and structure_ok
    _verdict(6, f"50 envelopes match greedy search at 1000 rates each "
                f"(worst gap {worst:.2e})", ok)


# -- 7: surplus fixed point brackets and reproduces itself ------------------


def _random_surplus_instance(rng):
    nectar = [NectarOption(i, float(rng.uniform(0.05, 0.4)),
                           float(rng.uniform(400.0, 2000.0)),
                           float(rng.uniform(0.3, 1.0)))
              for i in range(int(rng.integers(1, 4)))]
    pollen = []
    for j in range(int(rng.integers(2, 6))):
        slope = float(rng.uniform(0.1, 0.6))
        cost = float(rng.uniform(0.002, 0.02))
        cap = float(rng.uniform(300.0, 900.0))
        pollen.append(PollenOption(100 + j,
                                   AffineEfficiency(100 + j, slope, -cost, cap),
                                   income_rate=slope * 1.0e-4, cost_power=cost,
                                   quality_slope=slope, quality_cost=cost))
    budget = float(rng.uniform(0.4, 0.7)) * sum(o.capacity for o in pollen)
    base_need = float(rng.uniform(5.0, 30.0))
    return nectar, pollen, budget, base_need


def _one_feedback_pass(nectar, pollen, budget, base_need, solution):
    fetch = sum(solution.pollen.get(o.resource_id) * o.cost_power
                for o in pollen)
    need = base_need + fetch
    ranked = sorted(nectar, key=lambda o: (-o.efficiency, o.resource_id))
    left = budget
    eta_cut = 0.0
    for o in ranked:
        if need <= 0.0 or left <= 0.0:
            break
        if o.quality <= 0.0 or o.efficiency <= 0.0:
            continue
        bees = need / o.efficiency
        take = min(o.capacity, bees, left)
        eta_cut = o.efficiency
        # a need-limited take satisfies the need exactly
        need = 0.0 if take == bees else max(0.0, need - take * o.efficiency)
        left -= take
    cut = build_eta_cut([o.affine for o in pollen], left)
    return cut.inverse(eta_cut)


def test_criterion_07_surplus_iteration_brackets_and_converges():
    rng = np.random.default_rng(7)
    solved = 0
    attempts = 0
    brackets_ok = tol_ok = fixed_ok = True
    while solved < 50 and attempts < 400:
        attempts += 1
        nectar, pollen, budget, base_need = _random_surplus_instance(rng)
        try:
            sol = solve_case_B(nectar, pollen, budget, base_need)
        except ScarceMarketError:
            continue
        if sol.tau is None:
            continue
        solved += 1
        deltas = [abs(b - a) for a, b in zip(sol.trace, sol.trace[1:])]
        brackets_ok &= all(d2 <= d1 + 1e-12
                           for d1, d2 in zip(deltas, deltas[1:]))
        tol_ok &= sol.converged and sol.iterations <= 100
        tol_ok &= (not deltas) or deltas[-1] < 1e-6
        again = _one_feedback_pass(nectar, pollen, budget, base_need, sol)
        fixed_ok &= abs(again - sol.tau) < 2e-6
    ok = solved == 50 and brackets_ok and tol_ok and fixed_ok
    _verdict(7, f"{solved} surplus instances: shrinking brackets, "
                f"|dtau| < 1e-6, self-consistent rate", ok)


# -- 8: year-long ledger reconstructs exactly and reruns byte-identically ---


def test_criterion_08_energy_ledger_and_determinism(tmp_path):
    sc = build_scenario(default_config())
    result = run(sc)
    energy = total_energy(sc.colony, sc.coeffs)
    exact = not result.halted and len(result.reports) == 365
    for rep in result.reports:
        energy = energy + (rep.flux_foraging_j + rep.flux_pollen_cost_j
                           + rep.flux_upkeep_j + rep.flux_heating_j
                           + rep.flux_mortality_j + rep.flux_brood_j
                           + rep.flux_emergence_j)
        exact &= energy == rep.energy_j
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_reports_csv(result.reports, first)
    write_reports_csv(run(build_scenario(default_config())).reports, second)
    identical = first.read_bytes() == second.read_bytes()
    ok = exact and identical
    _verdict(8, "365 daily reports re-sum to the energy column bit-for-bit; "
                "rerun is byte-identical", ok)


# -- 9: demography fixed point and exact conservation -----------------------


def test_criterion_09_demography_fixed_point_and_conservation():
    from apiary.demography import advance_day, daily_mortality
    lifespan, lay = 30, 12.0
    survival = flat_survival(lifespan)
    counts = np.zeros(lifespan + 1)
    counts[0] = lay
    pop = AgeStructure(counts)
    for _ in range(lifespan):
        pop = advance_day(pop, survival, emerging=lay)
    fixed = bool(np.all(pop.counts == lay))
    again = advance_day(pop, survival, emerging=lay)
    fixed &= bool(np.all(again.counts == lay))

    rng = np.random.default_rng(9)
    conserved = True
    for _ in range(100):
        curve = dyadic_survival(rng)
        raw = rng.integers(0, 2 ** 20, size=curve.lifespan + 1)
        pop = AgeStructure(raw.astype(float))
        deaths = daily_mortality(pop, curve)
        after = advance_day(pop, curve)
        conserved &= after.total_females == pop.total_females - deaths
    ok = fixed and conserved
    _verdict(9, "steady laying hits the flat fixed point exactly; "
                "100 dyadic states conserve heads exactly", ok)


# -- 10: predation hazards vanish at parity and fall with the rate ----------


def test_criterion_10_predation_boundaries_and_monotonicity():
    p = base_foraging(q0=100.0, q0_tilde=0.01, d_max=10000.0)
    at_range = PredationParams(d_max_local=p.d_max, rho_crit_local=4.0,
                               l_forager=10.0, l_average=20.0)
    zero_flight = all(predation_flight_rate(t, COEFFS, p, at_range) == 0.0
                      for t in (0.0, 1.0, 5.0))
    res = nectar_resource(rho_f=4.0, m_f=10.0, beta_f=1.0, n=2)
    at_parity = PredationParams(d_max_local=5000.0,
                                rho_crit_local=critical_density(res, p),
                                l_forager=10.0, l_average=20.0)
    zero_forage = all(
        predation_foraging_rate(res, t, COEFFS, p, at_parity) == 0.0
        for t in (0.0, 1.0, 5.0))
    hunting = PredationParams(d_max_local=2000.0, rho_crit_local=4.0,
                              l_forager=10.0, l_average=20.0)
    taus = np.linspace(0.0, 8.0, 17)
    flights = [predation_flight_rate(float(t), COEFFS, p, hunting)
               for t in taus]
    forages = [predation_foraging_rate(res, float(t), COEFFS, p, hunting)
               for t in taus]
    decreasing = (all(b < a for a, b in zip(flights, flights[1:]))
                  and all(b < a for a, b in zip(forages, forages[1:])))
    ok = zero_flight and zero_forage and decreasing
    _verdict(10, "hazards are exactly zero at parity and strictly fall "
                 "with the exchange rate", ok)
