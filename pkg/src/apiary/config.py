"""Configuration layer: JSON in, validated Scenario out.

A config is a plain JSON-serializable dict.  ``default_config`` returns a
complete runnable year (sinusoidal weather, four floral patches on a
64x64 raster); ``load_config`` reads a file; ``apply_overrides`` patches
dotted ``key=value`` pairs from the command line; ``build_scenario``
validates everything at once and assembles the dataclasses.
"""

from __future__ import annotations

import copy
import json
import math

import numpy as np

from .demography import (AgeStructure, ColonyState, EnergyCoefficients,
                         SurvivalCurve, TaskSchedule, stationary_population)
from .flora import (NECTAR, POLLEN, FloralResource, ForagingParams, Landscape)
from .foraging import PredationParams
from .sim import MarketConfig, Scenario, WeatherSeries, WinterPlan
from .thermo import ThermalParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised with every problem found, one per line."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


def default_config() -> dict:
    """A self-contained year: spring start, plateau summer, a broodless
    cold stretch near the end.  Chosen so the stock run completes."""
    return {
        "schema_version": SCHEMA_VERSION,
        "horizon": 365,
        "seed": 0,
        "coefficients": {
            "mu": 12700.0,        # J per g honey
            "alpha": 6000.0,      # J bound per adult bee
            "alpha_tilde": 0.13,  # g pollen per reared bee
            "gamma": 2000.0,      # J per g comb
            "pi": 5.0e-4,         # W per adult, rest metabolism
        },
        "thermal": {
            "theta": 2.0e-4,
            "kappa": 0.02,
            "nu": 1,
            "t_brood": 35.5,
            "t_center_min": 18.0,
            "t_target": 35.5,
            "r_bee": 0.004,
        },
        "foraging": {
            "q0": 150.0,
            "q0_tilde": 0.015,
            "d_max": 10000.0,
            "v_cruise": 6.5,
            "v_hop": 0.5,
            "k2": 1.0,
            "k3": 1.0,
            "t_hive": 300.0,
            "xi": 1.0,
        },
        "colony": {
            "honey_g": 2000.0,
            "pollen_g": 400.0,
            "comb_g": 1200.0,
            "females": 8000.0,
            "males": 150.0,
        },
        "survival": {
            "kind": "sigmoid",
            "lifespan": 120,
            "midpoint": 60.0,
            "width": 14.0,
        },
        "schedule": {
            "boundaries": [0, 5, 13],
            "labels": ["nurse", "house", "forager"],
        },
        "queen_rate": 600.0,
        "nurse_factor": 3.0,
        "weather": {
            "kind": "sinusoid",
            "days": 365,
            "mean": 15.0,
            "amplitude": 11.0,
            "offset": 60,
            "flight_threshold": 8.0,
            "flight_hours": 8.0,
        },
        "winter_plan": {"n_winter": 10000.0},
        "market": {
            "min_pollen_income": 7.0e-3,
            "hysteresis": 0.05,
            "tolerance": 1.0e-6,
            "max_iter": 100,
            "tau_max": 1.0e6,
            "base_nectar_need": None,
        },
        "landscape": {
            "cell_size": 50.0,
            "shape": [64, 64],
            "hive": [32, 32],
            "patches": [
                {"id": 1, "center": [18, 32], "radius": 3},
                {"id": 2, "center": [44, 44], "radius": 4},
                {"id": 3, "center": [32, 16], "radius": 3},
                {"id": 4, "center": [48, 30], "radius": 3},
            ],
            "resources": [
                {"id": 1, "kind": "nectar", "q_f": 150.0, "rho_f": 10.0,
                 "lambda_f": 6.0e-4, "m_f": 10.0, "beta_f": 4.0, "n": 2},
                {"id": 2, "kind": "nectar", "q_f": 120.0, "rho_f": 6.0,
                 "lambda_f": 4.0e-4, "m_f": 10.0, "beta_f": 4.0, "n": 2},
                {"id": 3, "kind": "pollen", "q_f": 0.015, "rho_f": 8.0,
                 "lambda_f": 2.0e-8, "m_f": 10.0, "beta_f": 4.0, "n": 2},
                {"id": 4, "kind": "pollen", "q_f": 0.012, "rho_f": 5.0,
                 "lambda_f": 1.5e-8, "m_f": 8.0, "beta_f": 5.0, "n": 2},
            ],
        },
        "predation": None,
    }


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path} is not valid JSON: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    return cfg


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply ``a.b.c=value`` pairs; values parse as JSON with plain-string
    fallback.  Paths must address existing keys (typo protection)."""
    out = copy.deepcopy(cfg)
    problems = []
    for item in assignments:
        if "=" not in item:
            problems.append(f"override {item!r} is not key=value")
            continue
        path, raw = item.split("=", 1)
        keys = path.strip().split(".")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        ok = True
        for k in keys[:-1]:
            if isinstance(node, list):
                try:
                    node = node[int(k)]
                    continue
                except (ValueError, IndexError):
                    ok = False
                    break
            if not isinstance(node, dict) or k not in node:
                ok = False
                break
            node = node[k]
        if not ok:
            problems.append(f"override path {path!r} does not exist")
            continue
        leaf = keys[-1]
        if isinstance(node, list):
            try:
                node[int(leaf)] = value
            except (ValueError, IndexError):
                problems.append(f"override path {path!r} does not exist")
        elif isinstance(node, dict) and leaf in node:
            node[leaf] = value
        else:
            problems.append(f"override path {path!r} does not exist")
    if problems:
        raise ConfigError(problems)
    return out


def _need(cfg, key, kind, problems, default=None):
    if key not in cfg:
        if default is not None:
            return default
        problems.append(f"missing key {key!r}")
        return None
    v = cfg[key]
    if kind is float and isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if kind is int and isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, kind):
        return v
    problems.append(f"key {key!r} must be {kind.__name__}, got {type(v).__name__}")
    return None


def validate_config(cfg: dict) -> list[str]:
    """Structural pass; returns every problem found (empty = good)."""
    problems: list[str] = []
    if cfg.get("schema_version") != SCHEMA_VERSION:
        problems.append(f"schema_version must be {SCHEMA_VERSION}")
    horizon = _need(cfg, "horizon", int, problems)
    if horizon is not None and horizon < 1:
        problems.append("horizon must be >= 1")
    for section in ("coefficients", "thermal", "foraging", "colony",
                    "survival", "schedule", "weather", "winter_plan",
                    "market", "landscape"):
        if not isinstance(cfg.get(section), dict):
            problems.append(f"section {section!r} must be an object")
    if problems:
        return problems

    co = cfg["coefficients"]
    for k in ("mu", "alpha", "alpha_tilde", "gamma", "pi"):
        v = _need(co, f"{k}", float, problems)
        if v is not None and v <= 0.0:
            problems.append(f"coefficients.{k} must be positive")
    col = cfg["colony"]
    for k in ("honey_g", "pollen_g", "comb_g", "females", "males"):
        v = _need(col, k, float, problems)
        if v is not None and v < 0.0:
            problems.append(f"colony.{k} must be non-negative")
    sv = cfg["survival"]
    kind = sv.get("kind")
    if kind == "sigmoid":
        for k in ("midpoint", "width"):
            v = _need(sv, k, float, problems)
            if v is not None and v <= 0.0:
                problems.append(f"survival.{k} must be positive")
        lf = _need(sv, "lifespan", int, problems)
        if lf is not None and lf < 1:
            problems.append("survival.lifespan must be >= 1")
    elif kind == "table":
        if not isinstance(sv.get("fractions"), list) or not sv.get("fractions"):
            problems.append("survival.fractions must be a non-empty list")
    else:
        problems.append("survival.kind must be 'sigmoid' or 'table'")
    sch = cfg["schedule"]
    if not isinstance(sch.get("boundaries"), list) or not isinstance(sch.get("labels"), list):
        problems.append("schedule needs 'boundaries' and 'labels' lists")
    elif "nurse" not in sch["labels"] or "forager" not in sch["labels"]:
        problems.append("schedule.labels must include 'nurse' and 'forager'")
    we = cfg["weather"]
    wkind = we.get("kind")
    if wkind == "sinusoid":
        for k in ("mean", "amplitude", "flight_threshold", "flight_hours"):
            _need(we, k, float, problems)
        days = _need(we, "days", int, problems)
        if days is not None and horizon is not None and days < horizon:
            problems.append("weather.days shorter than horizon")
    elif wkind == "table":
        for k in ("t_out", "foraging_hours"):
            if not isinstance(we.get(k), list):
                problems.append(f"weather.{k} must be a list")
        if isinstance(we.get("t_out"), list) and horizon is not None \
                and len(we["t_out"]) < horizon:
            problems.append("weather table shorter than horizon")
    else:
        problems.append("weather.kind must be 'sinusoid' or 'table'")
    wp = cfg["winter_plan"]
    nv = _need(wp, "n_winter", float, problems)
    if nv is not None and nv <= 0.0:
        problems.append("winter_plan.n_winter must be positive")
    land = cfg["landscape"]
    if "raster" in land:
        if not isinstance(land["raster"], list):
            problems.append("landscape.raster must be a list of rows")
    elif "patches" in land:
        if not isinstance(land.get("shape"), list) or len(land.get("shape", [])) != 2:
            problems.append("landscape.shape must be [rows, cols]")
        for i, pt in enumerate(land.get("patches", [])):
            if not isinstance(pt, dict) or not {"id", "center", "radius"} <= pt.keys():
                problems.append(f"landscape.patches[{i}] needs id, center, radius")
    else:
        problems.append("landscape needs 'raster' or 'patches'")
    cs = _need(land, "cell_size", float, problems)
    if cs is not None and cs <= 0.0:
        problems.append("landscape.cell_size must be positive")
    if not isinstance(land.get("hive"), list) or len(land.get("hive", [])) != 2:
        problems.append("landscape.hive must be [row, col]")
    if not isinstance(land.get("resources"), list) or not land.get("resources"):
        problems.append("landscape.resources must be a non-empty list")
    else:
        for i, r in enumerate(land["resources"]):
            if not isinstance(r, dict):
                problems.append(f"landscape.resources[{i}] must be an object")
                continue
            missing = {"id", "kind", "q_f", "rho_f", "lambda_f", "m_f",
                       "beta_f"} - r.keys()
            if missing:
                problems.append(f"landscape.resources[{i}] missing "
                                + ", ".join(sorted(missing)))
            if r.get("kind") not in (NECTAR, POLLEN):
                problems.append(f"landscape.resources[{i}].kind must be "
                                f"'{NECTAR}' or '{POLLEN}'")
    pred = cfg.get("predation")
    if pred is not None:
        if not isinstance(pred, dict):
            problems.append("predation must be an object or null")
        else:
            for k in ("d_max_local", "rho_crit_local", "l_forager", "l_average"):
                _need(pred, k, float, problems)
    return problems


def _sigmoid_survival(lifespan: int, midpoint: float, width: float) -> SurvivalCurve:
    ages = np.arange(lifespan + 1, dtype=float)
    raw = 1.0 / (1.0 + np.exp(-(midpoint - ages) / width))
    return SurvivalCurve(raw / raw[0])


def _build_weather(we: dict, horizon: int) -> WeatherSeries:
    if we["kind"] == "table":
        t = np.asarray(we["t_out"], dtype=float)
        h = np.asarray(we["foraging_hours"], dtype=float)
        if "winter" in we:
            w = np.asarray(we["winter"], dtype=bool)
        else:
            w = h == 0.0
        return WeatherSeries(t, h, w)
    days = int(we.get("days", horizon))
    d = np.arange(days, dtype=float)
    t = we["mean"] - we["amplitude"] * np.cos(
        2.0 * math.pi * (d + we.get("offset", 0)) / 365.0)
    h = np.where(t >= we["flight_threshold"], we["flight_hours"], 0.0)
    return WeatherSeries(t, h, h == 0.0)


def _build_raster(land: dict) -> np.ndarray:
    if "raster" in land:
        return np.asarray(land["raster"], dtype=int)
    rows, cols = land["shape"]
    raster = np.zeros((rows, cols), dtype=int)
    for pt in land["patches"]:
        r0, c0 = pt["center"]
        rad = pt["radius"]
        rr, cc = np.ogrid[:rows, :cols]
        mask = (rr - r0) ** 2 + (cc - c0) ** 2 <= rad ** 2
        raster[mask] = pt["id"]
    return raster


def build_scenario(cfg: dict) -> Scenario:
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    try:
        coeffs = EnergyCoefficients(**cfg["coefficients"])
        thermal = ThermalParams(**cfg["thermal"])
        foraging = ForagingParams(**cfg["foraging"])
        sv = cfg["survival"]
        if sv["kind"] == "sigmoid":
            survival = _sigmoid_survival(sv["lifespan"], sv["midpoint"], sv["width"])
        else:
            survival = SurvivalCurve(np.asarray(sv["fractions"], dtype=float))
        schedule = TaskSchedule(tuple(cfg["schedule"]["boundaries"]),
                                tuple(cfg["schedule"]["labels"]))
        col = cfg["colony"]
        pop = stationary_population(col["females"], survival, males=col["males"])
        colony = ColonyState(honey=col["honey_g"], pollen=col["pollen_g"],
                             comb=col["comb_g"], population=pop)
        weather = _build_weather(cfg["weather"], cfg["horizon"])
        wp = cfg["winter_plan"]
        if "t_out" in wp:
            winter_t = np.asarray(wp["t_out"], dtype=float)
        else:
            winter_t = weather.t_out[weather.winter]
        winter_plan = WinterPlan(wp["n_winter"], winter_t)
        mk = {k: v for k, v in cfg["market"].items() if v is not None}
        market = MarketConfig(**mk)
        land = cfg["landscape"]
        raster = _build_raster(land)
        resources = tuple(
            FloralResource(id=r["id"], kind=r["kind"], q_f=r["q_f"],
                           rho_f=r["rho_f"], lambda_f=r["lambda_f"],
                           m_f=r["m_f"], beta_f=r["beta_f"],
                           n=r.get("n", 2))
            for r in sorted(land["resources"], key=lambda r: r["id"]))
        landscape = Landscape.from_raster(raster, resources, land["cell_size"],
                                          hive=tuple(land["hive"]))
        pred_cfg = cfg.get("predation")
        predation = PredationParams(**pred_cfg) if pred_cfg else None
        return Scenario(colony=colony, survival=survival, schedule=schedule,
                        coeffs=coeffs, thermal=thermal, foraging=foraging,
                        weather=weather, winter_plan=winter_plan,
                        horizon=cfg["horizon"], market=market,
                        landscape=landscape, predation=predation,
                        queen_rate=cfg.get("queen_rate", 600.0),
                        nurse_factor=cfg.get("nurse_factor", 3.0),
                        seed=cfg.get("seed", 0))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as err:
        raise ConfigError(f"cannot assemble scenario: {err}") from err
