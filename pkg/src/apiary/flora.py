"""Floral resources and the nectar quality field over a landscape raster.

A resource patch is a set of raster cells with uniform floral density
``rho_f``.  Hopping between flowers costs flight, which turns the density
into a quality penalty through the critical density

    rho_crit = (k_n * m_f * v_hop / (d_max * v_cruise))**n,

and the net quality of foraging a nectar resource from distance d is

    Q = q_f/q0 - d/d_max - (rho_crit/rho_f)**(1/n).

The landscape-wide quality field maps each cell x to the best yield over
all source cells y:  Q(x) = max_y (intrinsic(y) - |x - y|/d_max).  In a
floral vacuum the field obeys |grad Q| = 1/d_max, so iso-quality lines
are Euclidean dilations of the patch boundary.

The max-over-sources is a max-plus convolution with a cone, evaluated
exactly with a squared-Euclidean distance transform (per-column scans
followed by a per-row lower envelope of parabolas).  Values are kept
unclamped: negative quality means "not worth visiting" and the ordering
below zero still matters to the allocation solvers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

NECTAR = "nectar"
POLLEN = "pollen"

# Sentinel row-distance for columns without any source cell; greater than
# any in-grid distance, small enough that its square stays well inside
# float64 range.
_FAR = 1.0e9


@dataclass(frozen=True)
class ForagingParams:
    """Trip economics shared by every resource.

    q0       energy quantum per trip to the benchmark nectar flower, J
    q0_tilde reference pollen quantum per trip, g
    d_max    maximal foraging distance, m
    v_cruise long-distance flight speed, m/s
    v_hop    inter-flower hopping speed, m/s
    k2, k3   dimensionless flower-spacing constants (field / bush)
    t_hive   in-hive turnaround time between trips, s
    xi       aerodynamic penalty factor while carrying pollen
    """

    q0: float
    q0_tilde: float
    d_max: float = 10000.0
    v_cruise: float = 6.5
    v_hop: float = 0.5
    k2: float = 1.0
    k3: float = 1.0
    t_hive: float = 300.0
    xi: float = 1.0

    def __post_init__(self):
        for name in ("q0", "q0_tilde", "d_max", "v_cruise", "v_hop",
                     "k2", "k3", "t_hive"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.xi < 0.0:
            raise ValueError("xi must be non-negative")

    def k_for(self, n: int) -> float:
        if n == 2:
            return self.k2
        if n == 3:
            return self.k3
        raise ValueError("resource dimension n must be 2 or 3")


@dataclass(frozen=True)
class FloralResource:
    """One floral patch.

    q_f is the per-trip quantum: J of nectar for kind "nectar",
    reference-grade grams of pollen for kind "pollen" (grade = lifespan
    ratio against the reference pollen flower).  lambda_f is the surfacic
    rate offered to bees: W/m^2 for nectar, reference-g/(m^2 s) for
    pollen.  rho_f is flowers per m^2 (n=2) or per m^3 (n=3); tree and
    bush patches keep 2-D cell positions but pay n=3 hopping costs.
    """

    id: int
    kind: str
    q_f: float
    rho_f: float
    lambda_f: float
    m_f: float
    beta_f: float
    n: int = 2
    area_s: float | None = None
    cells: np.ndarray | None = None     # (K, 2) raster (row, col) indices
    distance_m: float | None = None     # explicit hive distance when no raster

    def __post_init__(self):
        if self.kind not in (NECTAR, POLLEN):
            raise ValueError(f"resource {self.id}: kind must be 'nectar' or 'pollen'")
        if self.q_f <= 0.0:
            raise ValueError(f"resource {self.id}: q_f must be positive")
        if self.rho_f <= 0.0:
            raise ValueError(f"resource {self.id}: rho_f must be positive")
        if self.lambda_f < 0.0:
            raise ValueError(f"resource {self.id}: lambda_f must be non-negative")
        if self.m_f < 1.0:
            raise ValueError(f"resource {self.id}: m_f must be at least 1")
        if self.beta_f < 0.0:
            raise ValueError(f"resource {self.id}: beta_f must be non-negative")
        if self.n not in (2, 3):
            raise ValueError(f"resource {self.id}: n must be 2 or 3")
        if self.area_s is not None and self.area_s <= 0.0:
            raise ValueError(f"resource {self.id}: area_s must be positive")
        if self.cells is not None:
            c = np.asarray(self.cells, dtype=int)
            object.__setattr__(self, "cells", c)
            if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] < 1:
                raise ValueError(f"resource {self.id}: cells must be a (K, 2) index array")

    @property
    def is_nectar(self) -> bool:
        return self.kind == NECTAR


@dataclass(frozen=True)
class Landscape:
    """Raster of resource ids (0 = no resource) plus the resource table."""

    raster: np.ndarray
    cell_size: float
    resources: tuple[FloralResource, ...]
    hive: tuple[int, int] | None = None
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        r = np.asarray(self.raster, dtype=int)
        object.__setattr__(self, "raster", r)
        if r.ndim != 2:
            raise ValueError("raster must be 2-D")
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")
        ids = [res.id for res in self.resources]
        if len(set(ids)) != len(ids):
            raise ValueError("resource ids must be unique")
        if self.hive is not None:
            hr, hc = self.hive
            if not (0 <= hr < r.shape[0] and 0 <= hc < r.shape[1]):
                raise ValueError("hive cell outside the raster")

    @property
    def shape(self) -> tuple[int, int]:
        return self.raster.shape

    def resource_by_id(self, rid: int) -> FloralResource:
        for res in self.resources:
            if res.id == rid:
                return res
        raise KeyError(f"no resource with id {rid}")

    def nectar_resources(self) -> list[FloralResource]:
        return [r for r in sorted(self.resources, key=lambda r: r.id) if r.is_nectar]

    def pollen_resources(self) -> list[FloralResource]:
        return [r for r in sorted(self.resources, key=lambda r: r.id) if not r.is_nectar]

    def vacuum_mask(self) -> np.ndarray:
        """True where no resource patch of any kind sits."""
        return self.raster == 0

    def hive_distance(self, res: FloralResource) -> float:
        """Distance (m) from the hive to the resource: an explicit
        ``distance_m`` wins, otherwise the Euclidean distance to the
        nearest footprint cell."""
        if res.distance_m is not None:
            return float(res.distance_m)
        if res.cells is None:
            raise ValueError(f"resource {res.id} has neither cells nor an explicit distance")
        if self.hive is None:
            raise ValueError("landscape has no hive cell")
        delta = res.cells - np.asarray(self.hive)
        return self.cell_size * float(np.sqrt(np.min(np.sum(delta * delta, axis=1))))

    @classmethod
    def from_raster(cls, raster, resources, cell_size, hive=None,
                    origin=(0.0, 0.0)) -> "Landscape":
        """Attach cell footprints and areas to the resource table.

        Every nonzero raster id must appear in the table; resources absent
        from the raster keep their explicit distance/area if any.
        """
        r = np.asarray(raster, dtype=int)
        table = {res.id: res for res in resources}
        present = set(np.unique(r)) - {0}
        missing = sorted(present - set(table))
        if missing:
            raise ValueError(f"raster ids missing from the resource table: {missing}")
        attached = []
        for res in sorted(resources, key=lambda res: res.id):
            if res.id in present:
                cells = np.argwhere(r == res.id)
                area = cells.shape[0] * cell_size * cell_size
                res = replace(res, cells=cells, area_s=area)
            attached.append(res)
        return cls(r, cell_size, tuple(attached), hive, origin)


@dataclass(frozen=True)
class QualityField:
    """Landscape-wide nectar quality with per-cell provenance.

    grid       quality values (unclamped, may be negative)
    provenance resource id attaining the max per cell
    vacuum     True where no resource patch of any kind sits
    """

    grid: np.ndarray
    cell_size: float
    origin: tuple[float, float]
    provenance: np.ndarray
    vacuum: np.ndarray

    def value_at(self, row: int, col: int) -> float:
        return float(self.grid[row, col])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.grid, fmt="%.17g", delimiter=",")

    def to_pgm(self, path) -> None:
        write_pgm(self.grid, path)


def write_pgm(values: np.ndarray, path) -> None:
    """8-bit ASCII PGM, affinely rescaled so min maps to 0 and max to 255."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi > lo:
        scaled = np.rint((v - lo) / (hi - lo) * 255.0).astype(int)
    else:
        scaled = np.zeros(v.shape, dtype=int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{v.shape[1]} {v.shape[0]}\n255\n")
        for row in scaled:
            fh.write(" ".join(str(x) for x in row) + "\n")


def read_raster_csv(path) -> np.ndarray:
    """Integer raster of resource ids, comma-separated, 0 = no resource."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh)):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                rows.append([int(c) for c in rec])
            except ValueError:
                raise ValueError(f"{path}: line {lineno + 1}: non-integer cell") from None
    if not rows:
        raise ValueError(f"{path}: empty raster")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.array(rows, dtype=int)


# ---------------------------------------------------------------------------
# quality formulas

def mean_interflower_distance(rho: float, n: int, p: ForagingParams) -> float:
    """Average hop length between flowers, k_n / rho**(1/n), m."""
    if rho <= 0.0:
        raise ValueError("density must be positive")
    return p.k_for(n) * rho ** (-1.0 / n)


def critical_density(res: FloralResource, p: ForagingParams) -> float:
    """Density below which hopping costs exceed the whole trip budget:

        rho_crit = (k_n * m_f * v_hop / (d_max * v_cruise))**n
    """
    k = p.k_for(res.n)
    return (k * res.m_f * p.v_hop / (p.d_max * p.v_cruise)) ** res.n


def intrinsic_quality(res: FloralResource, p: ForagingParams) -> float:
    """Zero-distance nectar quality q_f/q0 - (rho_crit/rho_f)**(1/n).

    May be negative: the patch is then worthless even next door.
    """
    if not res.is_nectar:
        raise ValueError(f"resource {res.id} offers pollen; its quality depends on the "
                         "exchange rate (see the market module)")
    hop_cost = (critical_density(res, p) / res.rho_f) ** (1.0 / res.n)
    return res.q_f / p.q0 - hop_cost


def quality_at_distance(res: FloralResource, d: float, p: ForagingParams) -> float:
    """Nectar quality seen from a hive d metres away."""
    if d < 0.0:
        raise ValueError("distance must be non-negative")
    return intrinsic_quality(res, p) - d / p.d_max


# ---------------------------------------------------------------------------
# exact distance transform

def _column_row_distances(mask: np.ndarray) -> np.ndarray:
    """Per-cell distance (in rows) to the nearest source in the same column;
    _FAR for columns without sources."""
    h, _ = mask.shape
    g = np.where(mask, 0.0, _FAR)
    for r in range(1, h):
        g[r] = np.minimum(g[r], g[r - 1] + 1.0)
    for r in range(h - 2, -1, -1):
        g[r] = np.minimum(g[r], g[r + 1] + 1.0)
    return g


def _row_lower_envelope(f: np.ndarray) -> np.ndarray:
    """1-D squared-distance transform d(q) = min_v (q - v)^2 + f(v) via the
    lower envelope of the parabolas rooted at each v."""
    n = f.size
    verts = np.zeros(n, dtype=int)
    bounds = np.empty(n + 1)
    out = np.empty(n)
    k = 0
    bounds[0] = -np.inf
    bounds[1] = np.inf
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[verts[k]] + verts[k] * verts[k])) / (2.0 * (q - verts[k]))
        while s <= bounds[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[verts[k]] + verts[k] * verts[k])) / (2.0 * (q - verts[k]))
        k += 1
        verts[k] = q
        bounds[k] = s
        bounds[k + 1] = np.inf
    k = 0
    for q in range(n):
        while bounds[k + 1] < q:
            k += 1
        out[q] = (q - verts[k]) ** 2 + f[verts[k]]
    return out


def squared_distance_transform(mask: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance (in cell units) to the nearest True
    cell of ``mask``.  Intermediate values are exact integers, so the
    transform agrees bit-for-bit with a brute-force nearest-source scan.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    if not mask.any():
        raise ValueError("mask has no source cells")
    g = _column_row_distances(mask)
    f = g * g
    out = np.empty_like(f)
    for r in range(mask.shape[0]):
        out[r] = _row_lower_envelope(f[r])
    return out


def quality_field(landscape: Landscape, p: ForagingParams) -> QualityField:
    """Best-yield nectar quality per cell: the pointwise max over nectar
    patches of (intrinsic quality - Euclidean distance / d_max).

    Exact in the metric: per-patch fields come from the squared distance
    transform, merged by max with the lowest resource id winning ties.
    """
    if landscape.cell_size > p.d_max / 100.0:
        raise ValueError("raster resolution too coarse: cell_size must be <= d_max/100")
    nectar = landscape.nectar_resources()
    if not nectar:
        raise ValueError("landscape has no nectar resources")
    best = None
    provenance = None
    for res in nectar:
        if res.cells is None:
            raise ValueError(f"resource {res.id} has no raster footprint")
        mask = np.zeros(landscape.shape, dtype=bool)
        mask[res.cells[:, 0], res.cells[:, 1]] = True
        dist_m = landscape.cell_size * np.sqrt(squared_distance_transform(mask))
        vals = intrinsic_quality(res, p) - dist_m / p.d_max
        if best is None:
            best = vals
            provenance = np.full(landscape.shape, res.id, dtype=int)
        else:
            better = vals > best
            best = np.where(better, vals, best)
            provenance = np.where(better, res.id, provenance)
    return QualityField(best, landscape.cell_size, landscape.origin,
                        provenance, landscape.vacuum_mask())


def eikonal_residual(field: QualityField, p: ForagingParams):
    """Check |grad Q| = 1/d_max on vacuum cells.

    Central differences on interior cells; returns (residual raster with
    NaN outside the tested set, stats dict).  residual = | |grad| - 1/d_max |.
    """
    q = field.grid
    h, w = q.shape
    residual = np.full((h, w), np.nan)
    target = 1.0 / p.d_max
    stats = {"count": 0, "max": 0.0, "mean": 0.0,
             "frac_within_5pct": 0.0, "flagged": False}
    if h < 3 or w < 3:
        stats["flagged"] = True
        return residual, stats
    inv2 = 1.0 / (2.0 * field.cell_size)
    gx = (q[1:-1, 2:] - q[1:-1, :-2]) * inv2
    gy = (q[2:, 1:-1] - q[:-2, 1:-1]) * inv2
    grad = np.sqrt(gx * gx + gy * gy)
    interior_vacuum = field.vacuum[1:-1, 1:-1]
    res_in = np.abs(grad - target)
    residual[1:-1, 1:-1] = np.where(interior_vacuum, res_in, np.nan)
    tested = res_in[interior_vacuum]
    if tested.size == 0:
        stats["flagged"] = True
        return residual, stats
    stats["count"] = int(tested.size)
    stats["max"] = float(np.max(tested))
    stats["mean"] = float(np.mean(tested))
    stats["frac_within_5pct"] = float(np.mean(tested <= 0.05 * target))
    return residual, stats
