import numpy as np
import pytest
from scipy import integrate

from apiary.thermo import (ThermalParams, active_heating_power, cluster_radius,
                           cluster_source_density, cluster_temperature,
                           cluster_heating_power, local_source_from_gradient)


def make_params(nu=1, t_target=35.0, kappa=0.02, theta=1e-4):
    return ThermalParams(theta=theta, kappa=kappa, nu=nu, t_target=t_target)


def test_active_heating_hand_value():
    p = make_params(theta=0.5, t_target=35.0)
    assert active_heating_power(10.0, 32.0, p) == pytest.approx(0.5 * 10 * 3)
    # magnitude of the gap also counts when outside is hotter
    assert active_heating_power(10.0, 38.0, p) == pytest.approx(0.5 * 10 * 3)
    assert active_heating_power(0.0, 0.0, p) == 0.0


def test_cluster_radius_doubling_exact():
    p = make_params()
    for n in (1.0, 7.0, 1000.0, 123456.0):
        assert cluster_radius(8.0 * n, p) == 2.0 * cluster_radius(n, p)


def test_cluster_power_doubling_exact():
    # volume-proportional bees, surface-limited loss: 8x bees, 2x power
    p = make_params()
    for n in (1.0, 64.0, 15000.0, 2.0e6):
        assert cluster_heating_power(8.0 * n, 0.0, p) == \
            2.0 * cluster_heating_power(n, 0.0, p)


def test_cluster_power_clamped_when_warm():
    p = make_params(t_target=18.0)
    assert cluster_heating_power(10000.0, 18.0, p) == 0.0
    assert cluster_heating_power(10000.0, 25.0, p) == 0.0
    assert cluster_heating_power(10000.0, 17.0, p) > 0.0


def test_temperature_profile_boundaries():
    for nu in (1, 2, 3):
        p = make_params(nu=nu)
        radius, t_out = 0.12, 5.0
        assert cluster_temperature(0.0, radius, t_out, p) == p.t_target
        assert cluster_temperature(radius, radius, t_out, p) == \
            pytest.approx(t_out, abs=1e-12)
        rs = np.linspace(0.0, radius, 50)
        ts = [cluster_temperature(r, radius, t_out, p) for r in rs]
        assert all(a >= b - 1e-12 for a, b in zip(ts, ts[1:]))  # cools outward


def test_source_quadrature_oracle():
    # total power of the source profile integrated over the ball must be
    # (8 pi nu) * dt * radius; scipy quadrature is the reference
    for nu in (1, 2, 3):
        p = make_params(nu=nu)
        radius, t_out = 0.1, 10.0
        dt = p.t_target - t_out
        total, _ = integrate.quad(
            lambda r: cluster_source_density(r, radius, t_out, p)
            * 4.0 * np.pi * r * r, 0.0, radius)
        assert total == pytest.approx(8.0 * np.pi * nu * dt * radius, rel=1e-8)


def test_source_invariant_across_sizes():
    p = make_params(nu=2)
    vals = []
    for radius in (0.05, 0.1, 0.2):
        for dt in (5.0, 12.0, 25.0):
            total, _ = integrate.quad(
                lambda r: cluster_source_density(r, radius, p.t_target - dt, p)
                * 4.0 * np.pi * r * r, 0.0, radius)
            vals.append(total / (radius * dt))
    vals = np.asarray(vals)
    assert (vals.max() - vals.min()) / vals.mean() < 1e-6


def test_local_law_consistent_with_profile():
    # the gradient form must reproduce the radial source profile
    for nu in (1, 2):
        p = make_params(nu=nu)
        radius, t_out = 0.15, 8.0
        dt = p.t_target - t_out
        for r in (0.03, 0.07, 0.12):
            grad = 2.0 * nu * dt * r ** (2 * nu - 1) / radius ** (2 * nu)
            t_local = cluster_temperature(r, radius, t_out, p)
            direct = cluster_source_density(r, radius, t_out, p)
            via_grad = local_source_from_gradient(grad, t_local, p)
            assert via_grad == pytest.approx(direct, rel=1e-12)


def test_local_law_rejects_core_temperature():
    p = make_params()
    with pytest.raises(ValueError):
        local_source_from_gradient(1.0, p.t_target, p)
    with pytest.raises(ValueError):
        local_source_from_gradient(1.0, p.t_target + 2.0, p)


def test_center_value_flagged_for_steep_profiles():
    p2 = make_params(nu=2)
    with pytest.warns(RuntimeWarning):
        assert cluster_source_density(0.0, 0.1, 5.0, p2) == 0.0
    p1 = make_params(nu=1)
    direct = cluster_source_density(0.0, 0.1, 5.0, p1)
    assert direct == pytest.approx(2.0 * 3.0 * 30.0 / 0.01, rel=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        make_params(nu=0)
    with pytest.raises(ValueError):
        ThermalParams(theta=-1.0, kappa=0.1)
    with pytest.raises(ValueError):
        cluster_source_density(-0.01, 0.1, 5.0, make_params())
    with pytest.raises(ValueError):
        cluster_source_density(0.2, 0.1, 5.0, make_params())  # outside ball
