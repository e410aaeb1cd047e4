"""Age-structured colony demography and the colony energy ledger.

The female population is a vector of daily age classes ``N[d]`` for
``d = 0..L`` where ``L`` is the maximal lifespan in days.  Survival is a
curve ``s(d)``: the fraction of bees that live to at least age ``d``, with
``s(0) = 1``, ``s`` non-increasing and ``s(L + 1) = 0`` by convention.  A
bee of age ``d`` survives the day with probability ``s(d+1)/s(d)``, so the
expected deaths in class ``d`` are ``N[d] * (s(d) - s(d+1))/s(d)``.  Counts
are expected values (floats), not individuals.

Males are carried as one lumped count: they hold the same body-energy
quantum as workers, pay upkeep, perform no tasks and do not age through
the female survival curve.

The colony's standing energy combines honey mass, bee counts and comb:
``E = mu * M + alpha * (females + males) + gamma * C`` with ``mu`` the
energy density of honey (J/g), ``alpha`` the energy bound in one adult bee
(J) and ``gamma`` the energy bound in comb (J/g).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Days from egg to emergence; larvae occupy one pipeline slot per day of age.
DEVELOPMENT_DAYS = 21


@dataclass(frozen=True)
class SurvivalCurve:
    """Survivorship ``s(d)`` for ages ``d = 0..lifespan``.

    ``fractions[d]`` is the fraction of bees alive at age ``d`` or older.
    ``s(lifespan + 1)`` is 0 by convention: the oldest class always dies.
    """

    fractions: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.fractions, dtype=float)
        object.__setattr__(self, "fractions", s)
        if s.ndim != 1 or s.size < 1:
            raise ValueError("survival curve must be a 1-D array of length >= 1")
        if s[0] != 1.0:
            raise ValueError("survival at age 0 must be exactly 1")
        if np.any(s < 0.0) or np.any(s > 1.0):
            raise ValueError("survival fractions must lie in [0, 1]")
        if np.any(np.diff(s) > 0.0):
            raise ValueError("survival fractions must be non-increasing with age")

    @property
    def lifespan(self) -> int:
        """Maximal age L in days; s is defined on 0..L."""
        return self.fractions.size - 1

    def fraction(self, age: int) -> float:
        """s(age); 0 beyond the maximal lifespan."""
        if age < 0:
            raise ValueError("age must be non-negative")
        if age > self.lifespan:
            return 0.0
        return float(self.fractions[age])

    def transition_ratios(self) -> np.ndarray:
        """Per-age day-survival probabilities ``s(d+1)/s(d)`` for d = 0..L.

        Ages with ``s(d) == 0`` get ratio 0; callers must not hold live
        bees there (see :func:`daily_mortality`).
        """
        s = self.fractions
        s_next = np.append(s[1:], 0.0)
        out = np.zeros_like(s)
        np.divide(s_next, s, out=out, where=s > 0.0)
        return out

    @classmethod
    def from_csv(cls, path) -> "SurvivalCurve":
        """Read a two-column ``age,fraction`` file; ages must run 0..L
        contiguously.  A non-numeric first row is treated as a header."""
        rows = []
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh)):
                if not rec or all(not c.strip() for c in rec):
                    continue
                if len(rec) < 2:
                    raise ValueError(f"{path}: line {lineno + 1}: need two columns (age, fraction)")
                try:
                    age = float(rec[0])
                    frac = float(rec[1])
                except ValueError:
                    if not rows:
                        continue  # header
                    raise ValueError(f"{path}: line {lineno + 1}: non-numeric row") from None
                rows.append((age, frac))
        if not rows:
            raise ValueError(f"{path}: no data rows")
        ages = np.array([r[0] for r in rows])
        if np.any(ages != np.arange(len(rows))):
            raise ValueError(f"{path}: ages must be contiguous 0..L")
        return cls(np.array([r[1] for r in rows]))


@dataclass
class AgeStructure:
    """Expected female counts per age class plus a lumped male count."""

    counts: np.ndarray
    males: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        self.counts = c
        if c.ndim != 1 or c.size < 1:
            raise ValueError("counts must be a 1-D array of length >= 1")
        if np.any(c < 0.0):
            raise ValueError("age-class counts must be non-negative")
        if self.males < 0.0:
            raise ValueError("male count must be non-negative")

    @property
    def max_age(self) -> int:
        return self.counts.size - 1

    @property
    def total_females(self) -> float:
        return float(np.sum(self.counts))

    @property
    def total(self) -> float:
        return self.total_females + self.males

    def copy(self) -> "AgeStructure":
        return AgeStructure(self.counts.copy(), self.males)


@dataclass(frozen=True)
class TaskSchedule:
    """Age thresholds splitting the female population into task cohorts.

    ``boundaries[i]`` is the first age of cohort i; cohort i spans ages
    ``boundaries[i]..boundaries[i+1] - 1`` and the last cohort runs to the
    maximal lifespan.  Ages below ``boundaries[0]`` belong to no cohort
    (in-nest juveniles).
    """

    boundaries: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        b = tuple(int(x) for x in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(b) != len(self.labels):
            raise ValueError("need one label per boundary")
        if len(b) < 1:
            raise ValueError("schedule needs at least one cohort")
        if any(x < 0 for x in b):
            raise ValueError("boundaries must be non-negative ages")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise ValueError("boundaries must be strictly increasing")

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no cohort labelled {label!r}") from None

    def window(self, index: int, lifespan: int) -> tuple[int, int]:
        """Inclusive age range (lo, hi) of cohort ``index`` for a given
        maximal lifespan."""
        if not 0 <= index < len(self.boundaries):
            raise IndexError(f"cohort index {index} out of range")
        if self.boundaries[-1] > lifespan + 1:
            raise ValueError("schedule boundaries exceed the survival curve's lifespan")
        lo = self.boundaries[index]
        hi = self.boundaries[index + 1] - 1 if index + 1 < len(self.boundaries) else lifespan
        return lo, hi


@dataclass(frozen=True)
class EnergyCoefficients:
    """Ledger coefficients.

    mu          energy density of honey, J/g
    alpha       energy bound in one adult bee, J
    alpha_tilde pollen bound in one adult bee, g (reference-grade grams)
    gamma       energy bound in comb, J/g
    pi          basal upkeep power per bee, W
    """

    mu: float
    alpha: float
    alpha_tilde: float
    gamma: float
    pi: float

    def __post_init__(self):
        for name in ("mu", "alpha", "alpha_tilde", "gamma", "pi"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ColonyState:
    """Stocks and population of one colony.

    honey, pollen, comb are masses in grams.  Pollen is tracked in
    reference-grade grams: incoming pollen of grade ``q_f`` counts as
    ``q_f/q0_tilde`` reference grams per physical gram, so one stored gram
    always feeds the same number of larvae.  ``brood[a]`` is the expected
    count of larvae of age ``a`` days (0 = laid today); they emerge as
    adults after DEVELOPMENT_DAYS days.
    """

    honey: float
    pollen: float
    comb: float
    population: AgeStructure
    brood: np.ndarray = field(default_factory=lambda: np.zeros(DEVELOPMENT_DAYS))

    def __post_init__(self):
        b = np.asarray(self.brood, dtype=float)
        self.brood = b
        if self.honey < 0.0 or self.pollen < 0.0 or self.comb < 0.0:
            raise ValueError("stock masses must be non-negative")
        if b.ndim != 1 or b.size != DEVELOPMENT_DAYS:
            raise ValueError(f"brood pipeline must have {DEVELOPMENT_DAYS} slots")
        if np.any(b < 0.0):
            raise ValueError("brood counts must be non-negative")

    @property
    def larvae(self) -> float:
        return float(np.sum(self.brood))

    def copy(self) -> "ColonyState":
        return ColonyState(self.honey, self.pollen, self.comb,
                           self.population.copy(), self.brood.copy())


def total_energy(state: ColonyState, coeffs: EnergyCoefficients) -> float:
    """Standing colony energy E = mu*M + alpha*(females + males) + gamma*C, J.

    Larvae are excluded: their provisions are debited from stocks as they
    are fed and their body energy enters E on emergence.
    """
    return (coeffs.mu * state.honey
            + coeffs.alpha * state.population.total
            + coeffs.gamma * state.comb)


def cohort_count(pop: AgeStructure, schedule: TaskSchedule, task_index: int) -> float:
    """Total bees currently inside one task cohort's age window."""
    lo, hi = schedule.window(task_index, pop.max_age)
    return float(np.sum(pop.counts[lo:hi + 1]))


def cohort_from_history(egg_history: np.ndarray, survival: SurvivalCurve,
                        schedule: TaskSchedule, task_index: int, t: int) -> float:
    """Cohort size on day ``t`` reconstructed from a laying time series.

    ``egg_history[k]`` is the number of eggs that emerged as age-0 adults
    on absolute day ``k``.  The cohort holds the survivors of each laying
    day within its age window: ``sum_d egg_history[t - d] * s(d)``.
    """
    hist = np.asarray(egg_history, dtype=float)
    lo, hi = schedule.window(task_index, survival.lifespan)
    if t - hi < 0 or t - lo >= hist.size:
        raise ValueError(f"egg history too short for day {t}: need days {t - hi}..{t - lo}")
    ages = np.arange(lo, hi + 1)
    return float(np.sum(hist[t - ages] * survival.fractions[ages]))


def daily_mortality(pop: AgeStructure, survival: SurvivalCurve) -> float:
    """Expected female deaths over one day under the survival curve.

    The terminal age class dies entirely (s(L+1) = 0).  Raises if live
    bees occupy an age the curve says cannot be reached.
    """
    if pop.max_age != survival.lifespan:
        raise ValueError("population and survival curve cover different age ranges")
    ratios = survival.transition_ratios()
    dead_ages = survival.fractions == 0.0
    if np.any(pop.counts[dead_ages] > 0.0):
        raise ValueError("live bees at an age with zero survivorship")
    survivors = pop.counts * ratios
    return float(np.sum(pop.counts - survivors))


def advance_day(pop: AgeStructure, survival: SurvivalCurve,
                emerging: float = 0.0) -> AgeStructure:
    """Age the population one day.

    Every class moves up one age with survival ``s(d+1)/s(d)``; the oldest
    class dies; newly emerged adults enter at age 0.  Males are carried
    through unchanged.
    """
    if emerging < 0.0:
        raise ValueError("emerging count must be non-negative")
    if pop.max_age != survival.lifespan:
        raise ValueError("population and survival curve cover different age ranges")
    ratios = survival.transition_ratios()
    dead_ages = survival.fractions == 0.0
    if np.any(pop.counts[dead_ages] > 0.0):
        raise ValueError("live bees at an age with zero survivorship")
    survivors = pop.counts * ratios
    new_counts = np.empty_like(pop.counts)
    new_counts[0] = emerging
    new_counts[1:] = survivors[:-1]
    return AgeStructure(new_counts, pop.males)


def stationary_population(total: float, survival: SurvivalCurve,
                          males: float = 0.0) -> AgeStructure:
    """Age structure proportional to the survival curve, scaled to a total.

    The shape a colony converges to under steady laying.
    """
    if total < 0.0:
        raise ValueError("total must be non-negative")
    s = survival.fractions
    weight = float(np.sum(s))
    counts = s * (total / weight) if weight > 0.0 else np.zeros_like(s)
    return AgeStructure(counts, males)
