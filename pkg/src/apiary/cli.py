"""Command-line front end.

Subcommands:
  run     simulate the configured horizon; writes reports.csv,
          summary.json and figures into --out
  field   rasterize the foraging quality field; writes CSV, PGM, a
          heatmap and the gradient-consistency summary
  market  solve a single day-0 exchange and print the solution
  check   validate a config (or the built-in default) and print key facts

Exit codes: 0 success, 1 configuration problem, 2 starvation halt,
3 infeasible market.  Diagnostics go to stderr, data to stdout.
The APIARY_LOG environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (ConfigError, apply_overrides, build_scenario,
                     default_config, load_config)
from .flora import eikonal_residual, quality_field, write_pgm
from .market import (InfeasibleMarketError, Regime, ScarceMarketError,
                     classify_regime, solve_case_A, solve_case_B,
                     solve_case_B_scarce)
from .sim import Simulation, run, write_reports_csv, write_summary_json

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STARVED = 2
EXIT_INFEASIBLE = 3

log = logging.getLogger("apiary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apiary",
        description="honeybee colony resource-allocation simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default="out"):
        p.add_argument("--config", help="JSON scenario file (default: built-in)")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config entry (dotted path, JSON value)")

    common(sub.add_parser("run", help="simulate the horizon"))
    common(sub.add_parser("field", help="rasterize the quality field"))
    common(sub.add_parser("market", help="solve one exchange"))
    p_check = sub.add_parser("check", help="validate a configuration")
    common(p_check)
    return parser


def _load(args) -> dict:
    cfg = load_config(args.config) if args.config else default_config()
    if args.overrides:
        cfg = apply_overrides(cfg, args.overrides)
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _load(args)
    scenario = build_scenario(cfg)
    out = _outdir(args)
    result = run(scenario)
    write_reports_csv(result.reports, out / "reports.csv")
    write_summary_json(result.summary, out / "summary.json")
    from .plotting import plot_run
    plot_run(result.reports, out)
    print(json.dumps(result.summary, sort_keys=True))
    if result.halted:
        halt = result.summary["halt"]
        print(f"halted on day {halt['day']}: {halt['stock']} exhausted",
              file=sys.stderr)
        return EXIT_STARVED
    return EXIT_OK


def cmd_field(args) -> int:
    cfg = _load(args)
    scenario = build_scenario(cfg)
    out = _outdir(args)
    field = quality_field(scenario.landscape, scenario.foraging)
    field.to_csv(out / "quality.csv")
    write_pgm(field.grid, out / "quality.pgm")
    residual, stats = eikonal_residual(field, scenario.foraging)
    np.savetxt(out / "eikonal_residual.csv", residual, delimiter=",", fmt="%.17g")
    with open(out / "field_summary.json", "w") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")
    from .plotting import plot_field
    plot_field(field, scenario.landscape, out / "field.png")
    print(json.dumps(stats, sort_keys=True))
    if stats.get("flagged"):
        print("gradient-consistency check flagged: open-terrain slope "
              "deviates from the expected decay rate", file=sys.stderr)
    return EXIT_OK


def cmd_market(args) -> int:
    cfg = _load(args)
    scenario = build_scenario(cfg)
    out = _outdir(args)
    sim = Simulation(scenario)
    state = sim.state
    ratio = classify_regime(state, sim.r_target, scenario.market.hysteresis,
                            scenario.coeffs)
    from .demography import cohort_count
    forager_i = scenario.schedule.index_of("forager")
    budget = cohort_count(state.population, scenario.schedule, forager_i)
    heating = 0.0
    if len(scenario.weather) and bool(scenario.weather.winter[0]):
        from .thermo import cluster_heating_power
        heating = cluster_heating_power(state.population.total,
                                        float(scenario.weather.t_out[0]),
                                        sim.thermal_cluster)
    try:
        if ratio.regime is Regime.DEFICIT:
            solution = solve_case_A(sim.nectar_options, sim.pollen_options,
                                    scenario.market.min_pollen_income,
                                    scenario.foraging, scenario.coeffs, budget)
        else:
            need = scenario.market.base_nectar_need
            if need is None:
                need = scenario.coeffs.pi * state.population.total + heating
            try:
                solution = solve_case_B(sim.nectar_options, sim.pollen_options,
                                        budget, need,
                                        tolerance=scenario.market.tolerance,
                                        max_iter=scenario.market.max_iter)
            except ScarceMarketError:
                solution = solve_case_B_scarce(
                    sim.nectar_options, sim.pollen_options, budget, need,
                    scenario.foraging, tolerance=scenario.market.tolerance,
                    max_iter=scenario.market.max_iter,
                    tau_max=scenario.market.tau_max)
    except (InfeasibleMarketError, ScarceMarketError) as err:
        print(f"market infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    payload = solution.to_dict()
    payload["regime"] = ratio.regime.value
    payload["r_hive"] = ratio.r_hive if ratio.r_hive != float("inf") else None
    payload["r_target"] = ratio.r_target
    with open(out / "exchange_solution.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _load(args)
    scenario = build_scenario(cfg)
    sim = Simulation(scenario)
    land = scenario.landscape
    print(f"configuration ok (schema {cfg['schema_version']})")
    print(f"horizon: {scenario.horizon} days, "
          f"colony: {scenario.colony.population.total:g} adults, "
          f"honey {scenario.colony.honey:g} g, pollen {scenario.colony.pollen:g} g")
    print(f"brood nest set point: {scenario.thermal.t_brood:g} C")
    print(f"foraging range limit: {scenario.foraging.d_max:g} m")
    if land is not None:
        print(f"landscape: {land.shape[0]}x{land.shape[1]} cells at "
              f"{land.cell_size:g} m, {len(land.resources)} resources")
    print(f"winter target ratio: {sim.r_target:.6g} J/g")
    return EXIT_OK


_COMMANDS = {"run": cmd_run, "field": cmd_field, "market": cmd_market,
             "check": cmd_check}


def main(argv=None) -> int:
    level = os.environ.get("APIARY_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        print(str(err), file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
