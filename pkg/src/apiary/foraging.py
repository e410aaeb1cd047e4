"""Per-resource forager head-counts, power gain, efficiency and predation.

A forager cycles hive -> patch -> hive.  The optimal head-count on a
patch matches the patch's production rate: with surface S, density rho_f
and surfacic power lambda_f, the patch emits S*rho_f*lambda_f watts, one
trip removes q_f, so the trip rate must be S*rho_f*lambda_f/q_f and the
standing head-count is that rate times the cycle length.  Dividing the
resulting power gain by the head-count gives the per-bee efficiency

    eta_f = q0 * Q_f / cycle,

with Q_f the net quality seen from the hive.

Predation adds two per-second death rates: one during cruise flight
(expressed through a locally reduced d_max) and one on the foraging site
(through a locally raised critical density).  Both are normalized by the
full cost of losing a forager: its body energy alpha plus the pollen
that went into raising it, priced at the exchange rate tau and prorated
by the career time it had left.
"""

from __future__ import annotations

from dataclasses import dataclass

from .demography import EnergyCoefficients
from .flora import FloralResource, ForagingParams, critical_density, mean_interflower_distance


@dataclass(frozen=True)
class TripCycle:
    """Timing of one foraging cycle, seconds."""

    t_hive: float
    t_flight: float
    t_foraging: float

    def __post_init__(self):
        if self.t_hive < 0.0 or self.t_flight < 0.0 or self.t_foraging < 0.0:
            raise ValueError("cycle components must be non-negative")

    @property
    def total(self) -> float:
        return self.t_hive + self.t_flight + self.t_foraging


@dataclass(frozen=True)
class PredationParams:
    """Local hazard parameters.

    d_max_local    effective maximal distance once flight predation is
                   priced in, m (<= d_max)
    rho_crit_local effective critical density once on-site predation is
                   priced in (>= every resource's rho_crit)
    l_forager      average forager career, days
    l_average      average total lifespan, days
    """

    d_max_local: float
    rho_crit_local: float
    l_forager: float
    l_average: float

    def __post_init__(self):
        if self.d_max_local <= 0.0 or self.rho_crit_local < 0.0:
            raise ValueError("local hazard parameters must be positive")
        if self.l_forager <= 0.0 or self.l_average <= 0.0:
            raise ValueError("lifespans must be positive")
        if self.l_forager > self.l_average:
            raise ValueError("forager career cannot exceed the total lifespan")


@dataclass
class AllocationPlan:
    """Foragers assigned per resource id, plus the unassigned reserve."""

    assignments: dict[int, float]
    reserve: float = 0.0

    def __post_init__(self):
        if any(x < 0.0 for x in self.assignments.values()):
            raise ValueError("assigned counts must be non-negative")
        if self.reserve < -1e-9:
            raise ValueError("reserve must be non-negative")
        self.reserve = max(0.0, self.reserve)

    @property
    def total(self) -> float:
        return float(sum(self.assignments.values()))

    def get(self, rid: int) -> float:
        return self.assignments.get(rid, 0.0)


def trip_cycle(res: FloralResource, d: float, p: ForagingParams) -> TripCycle:
    """Cycle timing at hive distance d:

        t_hive + 2 d / v_cruise + m_f * (beta_f + hop / v_hop)
    """
    if d < 0.0:
        raise ValueError("distance must be non-negative")
    hop = mean_interflower_distance(res.rho_f, res.n, p)
    return TripCycle(t_hive=p.t_hive,
                     t_flight=2.0 * d / p.v_cruise,
                     t_foraging=res.m_f * (res.beta_f + hop / p.v_hop))


def foragers_required(res: FloralResource, d: float, p: ForagingParams) -> float:
    """Optimal standing head-count on the patch:

        phi_f = S * rho_f * (lambda_f / q_f) * cycle_total
    """
    if res.area_s is None:
        raise ValueError(f"resource {res.id} has no area")
    cycle = trip_cycle(res, d, p).total
    return res.area_s * res.rho_f * (res.lambda_f / res.q_f) * cycle


def resource_power_gain(res: FloralResource, field_quality: float,
                        p: ForagingParams) -> float:
    """Power the colony nets from fully staffing a nectar patch, W:

        S * rho_f * lambda_f * (q0 / q_f) * Q_f

    Negative quality means the patch is useless: the gain is 0.
    """
    if res.area_s is None:
        raise ValueError(f"resource {res.id} has no area")
    if field_quality < 0.0:
        return 0.0
    return res.area_s * res.rho_f * res.lambda_f * (p.q0 / res.q_f) * field_quality


def efficiency(res: FloralResource, d: float, field_quality: float,
               p: ForagingParams) -> float:
    """Per-bee power brought back from the patch, W:

        eta_f = q0 * Q_f / cycle_total

    Equals resource_power_gain / foragers_required whenever the
    head-count is positive.
    """
    cycle = trip_cycle(res, d, p).total
    if cycle <= 0.0:
        raise ValueError("cycle length must be positive")
    return p.q0 * field_quality / cycle


def predation_cost_per_death(tau: float, coeffs: EnergyCoefficients,
                             p: ForagingParams, pred: PredationParams) -> float:
    """Energy-equivalent loss when one forager is taken, J:

        alpha + tau * (alpha_tilde * q0 / q0_tilde) * l_forager / (2 l_average)

    The second term prices the pollen invested in the bee at the current
    exchange rate, prorated by the expected remaining career.
    """
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    prorata = pred.l_forager / (2.0 * pred.l_average)
    return coeffs.alpha + tau * (coeffs.alpha_tilde * p.q0 / p.q0_tilde) * prorata


def predation_flight_rate(tau: float, coeffs: EnergyCoefficients,
                          p: ForagingParams, pred: PredationParams) -> float:
    """Deaths per bee per second of cruise flight:

        v_cruise * q0 * (1/d_max_local - 1/d_max) / cost_per_death

    Zero when the local reach equals the theoretical d_max.
    """
    if pred.d_max_local > p.d_max:
        raise ValueError("d_max_local cannot exceed d_max")
    hazard = p.q0 * (1.0 / pred.d_max_local - 1.0 / p.d_max)
    return p.v_cruise * hazard / predation_cost_per_death(tau, coeffs, p, pred)


def predation_foraging_rate(res: FloralResource, tau: float,
                            coeffs: EnergyCoefficients, p: ForagingParams,
                            pred: PredationParams) -> float:
    """Deaths per bee per second on the foraging site:

        1/(1/v_hop + beta_f * rho_f^(1/n) / k_n)
          * q0 * (rho_crit_local^(1/n) - rho_crit^(1/n))
          / (alpha * k_n * (1 + tau * (alpha_tilde q0 / (alpha q0_tilde))
                                * l_forager / (2 l_average)))

    Zero when the local critical density equals the resource's own.
    """
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    k = p.k_for(res.n)
    front = 1.0 / (1.0 / p.v_hop + res.beta_f * res.rho_f ** (1.0 / res.n) / k)
    rc = critical_density(res, p)
    hazard = p.q0 * (pred.rho_crit_local ** (1.0 / res.n) - rc ** (1.0 / res.n))
    prorata = pred.l_forager / (2.0 * pred.l_average)
    denom = coeffs.alpha * k * (
        1.0 + tau * (coeffs.alpha_tilde * p.q0 / (coeffs.alpha * p.q0_tilde)) * prorata)
    return front * hazard / denom
