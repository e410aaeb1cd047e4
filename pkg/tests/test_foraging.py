import numpy as np
import pytest

from apiary.flora import critical_density
from apiary.foraging import (AllocationPlan, PredationParams, efficiency,
                             foragers_required, predation_cost_per_death,
                             predation_flight_rate, predation_foraging_rate,
                             resource_power_gain, trip_cycle)
from apiary.demography import EnergyCoefficients
from conftest import base_foraging, nectar_resource


COEFFS = EnergyCoefficients(mu=12700.0, alpha=50.0, alpha_tilde=0.1,
                            gamma=2000.0, pi=5e-4)


def test_trip_cycle_hand_value():
    p = base_foraging(t_hive=300.0, v_cruise=6.5, v_hop=0.5)
    res = nectar_resource(rho_f=4.0, m_f=10.0, beta_f=4.0, n=2)
    cyc = trip_cycle(res, 650.0, p)
    assert cyc.t_hive == 300.0
    assert cyc.t_flight == pytest.approx(2 * 650.0 / 6.5)
    # per flower: handling 4 s plus a 0.5 m hop at 0.5 m/s
    assert cyc.t_foraging == pytest.approx(10.0 * (4.0 + 1.0))
    assert cyc.total == pytest.approx(300.0 + 200.0 + 50.0)


def test_foragers_required_hand_value():
    p = base_foraging()
    res = nectar_resource(q_f=100.0, rho_f=4.0, lambda_f=2e-4, area_s=5000.0)
    cyc = trip_cycle(res, 650.0, p).total
    # patch production rate / per-trip haul, times the trip time
    expect = 5000.0 * 4.0 * (2e-4 / 100.0) * cyc
    assert foragers_required(res, 650.0, p) == pytest.approx(expect, rel=1e-12)


def test_foragers_required_needs_area():
    res = nectar_resource()
    with pytest.raises(ValueError):
        foragers_required(res, 650.0, base_foraging())


def test_gain_equals_efficiency_times_crew(rng):
    p = base_foraging()
    for _ in range(40):
        res = nectar_resource(q_f=float(rng.uniform(30, 100)),
                              rho_f=float(rng.uniform(1, 12)),
                              lambda_f=float(rng.uniform(1e-5, 1e-3)),
                              m_f=float(rng.uniform(4, 16)),
                              beta_f=float(rng.uniform(1, 8)),
                              area_s=float(rng.uniform(1e3, 1e5)))
        d = float(rng.uniform(50, 4000))
        q = float(rng.uniform(0.05, 1.0))
        # the trip time cancels, so the identity holds for any distance
        gain = resource_power_gain(res, q, p)
        expect = efficiency(res, d, q, p) * foragers_required(res, d, p)
        assert gain == pytest.approx(expect, rel=1e-12)


def test_gain_zero_for_worthless_patch():
    res = nectar_resource(area_s=1e4)
    assert resource_power_gain(res, -0.2, base_foraging()) == 0.0


def test_predation_cost_per_death():
    p = base_foraging(q0=100.0, q0_tilde=0.01)
    pred = PredationParams(d_max_local=5000.0, rho_crit_local=1.0,
                           l_forager=10.0, l_average=20.0)
    # tau = 0: only the embodied bee is lost
    assert predation_cost_per_death(0.0, COEFFS, p, pred) == \
        pytest.approx(COEFFS.alpha)
    # pollen-priced component: tau * (alpha_tilde * q0 / q0_tilde) * Lf/(2 Lavg)
    got = predation_cost_per_death(2.0, COEFFS, p, pred)
    expect = 50.0 + 2.0 * (0.1 * 100.0 / 0.01) * 10.0 / 40.0
    assert got == pytest.approx(expect, rel=1e-12)


def test_flight_rate_zero_at_range_limit():
    p = base_foraging(d_max=10000.0)
    pred = PredationParams(d_max_local=10000.0, rho_crit_local=1.0,
                           l_forager=10.0, l_average=20.0)
    assert predation_flight_rate(0.0, COEFFS, p, pred) == 0.0
    closer = PredationParams(d_max_local=4000.0, rho_crit_local=1.0,
                             l_forager=10.0, l_average=20.0)
    assert predation_flight_rate(0.0, COEFFS, p, closer) > 0.0
    too_far = PredationParams(d_max_local=20000.0, rho_crit_local=1.0,
                              l_forager=10.0, l_average=20.0)
    with pytest.raises(ValueError):
        predation_flight_rate(0.0, COEFFS, p, too_far)


def test_foraging_rate_zero_at_critical_density():
    p = base_foraging()
    res = nectar_resource(rho_f=4.0)
    crit = critical_density(res, p)
    pred = PredationParams(d_max_local=5000.0, rho_crit_local=crit,
                           l_forager=10.0, l_average=20.0)
    assert predation_foraging_rate(res, 0.0, COEFFS, p, pred) == 0.0


def test_foraging_rate_frozen_oracle():
    # hand-frozen composite: k2=1, m=10, v_hop=1, v_cruise=1, d_max=10
    # make the local critical density exactly 1, patch density 4,
    # beta*rho^(1/2) = 2 so the leading factor is 1/3; with q0=100,
    # alpha=50 and no pollen pricing the rate is exactly 2/3
    p = base_foraging(q0=100.0, q0_tilde=0.01, d_max=10.0, v_cruise=1.0,
                      v_hop=1.0, k2=1.0)
    res = nectar_resource(rho_f=4.0, m_f=10.0, beta_f=1.0, n=2)
    coeffs = EnergyCoefficients(mu=12700.0, alpha=50.0, alpha_tilde=0.1,
                                gamma=2000.0, pi=5e-4)
    pred = PredationParams(d_max_local=10.0, rho_crit_local=4.0,
                           l_forager=10.0, l_average=20.0)
    assert critical_density(res, p) == pytest.approx(1.0, rel=1e-12)
    got = predation_foraging_rate(res, 0.0, coeffs, p, pred)
    assert got == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_rates_strictly_decreasing_in_tau():
    p = base_foraging()
    res = nectar_resource(rho_f=4.0)
    pred = PredationParams(d_max_local=5000.0, rho_crit_local=1e-6,
                           l_forager=10.0, l_average=20.0)
    taus = np.linspace(0.0, 5.0, 21)
    flight = [predation_flight_rate(t, COEFFS, p, pred) for t in taus]
    site = [predation_foraging_rate(res, t, COEFFS, p, pred) for t in taus]
    assert all(a > b for a, b in zip(flight, flight[1:]))
    assert all(a > b for a, b in zip(site, site[1:]))


def test_allocation_plan_totals():
    plan = AllocationPlan({1: 10.0, 3: 2.5}, reserve=4.0)
    assert plan.total == pytest.approx(12.5)
    assert plan.get(3) == 2.5
    assert plan.get(99) == 0.0
    with pytest.raises(ValueError):
        AllocationPlan({1: -5.0})
