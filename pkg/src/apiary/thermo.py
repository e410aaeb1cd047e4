"""Nest thermoregulation: active brood heating and the winter cluster.

Two regimes are modelled.  With brood present, heater bees hold the nest
at a setpoint and the power bill is proportional to headcount and to the
temperature gap.  Without brood the colony contracts into a roughly
spherical winter cluster whose interior temperature falls off radially as

    T(r) = T_target - dT * (r/R)**(2 nu),

with dT the core-to-mantle drop, R the cluster radius and nu >= 1 a
steepness exponent.  The metabolic heat source density that sustains this
profile in a medium of unit conductivity is

    Q(r) = 2 nu (2 nu + 1) dT * r**(2 nu - 2) / R**(2 nu),

and integrating it over the ball gives a total power proportional to
R * dT; with cluster radius scaling as the cube root of the bee count the
whole-cluster bill becomes

    h = kappa * N**(1/3) * dT.

The source density can also be recovered pointwise from the temperature
field alone, without knowing r or R:

    Q = (2 nu + 1)/(2 nu) * |grad T|**2 / (T_target - T),

which is what a bee could sense locally; the core itself (T == T_target)
must be excluded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThermalParams:
    """Thermoregulation constants.

    theta        active heating power per heater bee per kelvin of gap, W/K
    kappa        cluster power coefficient, W/K per cube-root bee
    nu           radial steepness exponent of the cluster profile (>= 1)
    t_brood      brood-nest setpoint, degC
    t_center_min minimal acceptable cluster-core temperature, degC
    t_target     active target for the current regime, degC
    r_bee        cluster packing radius: R = r_bee * N**(1/3), m
    """

    theta: float
    kappa: float
    nu: int = 1
    t_brood: float = 35.5
    t_center_min: float = 18.0
    t_target: float = 35.5
    r_bee: float = 0.004

    def __post_init__(self):
        if self.theta <= 0.0 or self.kappa <= 0.0:
            raise ValueError("theta and kappa must be positive")
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError("nu must be an integer >= 1")
        object.__setattr__(self, "nu", int(self.nu))
        if self.r_bee <= 0.0:
            raise ValueError("r_bee must be positive")


def active_heating_power(n_heaters: float, t_out: float, p: ThermalParams) -> float:
    """Brood-nest heating bill theta * N_h * |t_target - t_out|, W."""
    if n_heaters < 0.0:
        raise ValueError("heater count must be non-negative")
    return p.theta * n_heaters * abs(p.t_target - t_out)


def cluster_radius(n_bees: float, p: ThermalParams) -> float:
    """Packed-cluster radius R = r_bee * N**(1/3), m."""
    if n_bees < 0.0:
        raise ValueError("bee count must be non-negative")
    return p.r_bee * float(np.cbrt(n_bees))


def cluster_temperature(r: float, cluster_radius: float, t_out: float,
                        p: ThermalParams) -> float:
    """Radial cluster temperature, degC:

        T(r) = t_target - (t_target - t_out) * (r/R)**(2 nu),

    so T(0) is the core setpoint and T(R) matches the outside."""
    if cluster_radius <= 0.0:
        raise ValueError("cluster radius must be positive")
    if not 0.0 <= r <= cluster_radius:
        raise ValueError("r must lie within the cluster, 0 <= r <= R")
    dt = p.t_target - t_out
    return p.t_target - dt * (r / cluster_radius) ** (2 * p.nu)


def cluster_source_density(r: float, cluster_radius: float, t_out: float,
                           p: ThermalParams) -> float:
    """Heat source density sustaining the cluster profile (temperature-
    normalized units, K/m^2):

        Q(r) = 2 nu (2 nu + 1) * (t_target - t_out) * r**(2 nu - 2) / R**(2 nu).

    For nu = 1 the density is uniform in r; for nu > 1 the r = 0 value is
    the removable limit 0 (flagged with a warning).
    """
    if cluster_radius <= 0.0:
        raise ValueError("cluster radius must be positive")
    if not 0.0 <= r <= cluster_radius:
        raise ValueError("r must lie within the cluster, 0 <= r <= R")
    dt = p.t_target - t_out
    two_nu = 2 * p.nu
    if r == 0.0 and p.nu > 1:
        warnings.warn("cluster_source_density at r=0 with nu>1: returning the limit 0",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    return two_nu * (two_nu + 1) * dt * r ** (two_nu - 2) / cluster_radius ** two_nu


def local_source_from_gradient(grad_norm: float, t_local: float, p: ThermalParams) -> float:
    """Source density from purely local sensing:

        Q = (2 nu + 1)/(2 nu) * grad_norm**2 / (t_target - t_local).

    ``grad_norm`` is the magnitude of the temperature gradient (K/m).
    Composed with the cluster profile's own gradient this reproduces
    cluster_source_density.  Raises when t_local >= t_target: the core is
    a removable singularity and callers must exclude it.
    """
    if t_local >= p.t_target:
        raise ValueError("local temperature must be strictly below the target; "
                         "the cluster core must be excluded")
    two_nu = 2 * p.nu
    return (two_nu + 1) / two_nu * grad_norm * grad_norm / (p.t_target - t_local)


def cluster_heating_power(n_bees: float, t_out: float, p: ThermalParams) -> float:
    """Whole-cluster heating bill h = kappa * N**(1/3) * (t_target - t_out), W.

    Zero when the outside is at or above the target (no heating needed).
    """
    if n_bees < 0.0:
        raise ValueError("bee count must be non-negative")
    gap = p.t_target - t_out
    if gap <= 0.0:
        return 0.0
    return p.kappa * float(np.cbrt(n_bees)) * gap
