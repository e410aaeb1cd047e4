"""File-output figures for runs and fields.  No interactive backends:
everything renders through Agg straight to PNG."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_REGIME_COLORS = {"deficit": "#d62728", "surplus": "#2ca02c",
                  "balanced": "#1f77b4"}


def _regime_bands(ax, reports):
    """Shade the background by the day's ledger regime."""
    start = 0
    current = reports[0].regime
    for i in range(1, len(reports) + 1):
        if i == len(reports) or reports[i].regime != current:
            ax.axvspan(reports[start].day, reports[i - 1].day + 1,
                       color=_REGIME_COLORS.get(current, "#cccccc"),
                       alpha=0.12, linewidth=0)
            if i < len(reports):
                start, current = i, reports[i].regime


def plot_run(reports, out_dir) -> list[str]:
    """Render the four run figures; returns the file names written."""
    if not reports:
        return []
    days = [r.day for r in reports]
    written = []

    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(days, [r.honey_g / 1000.0 for r in reports], label="honey (kg)")
    ax.plot(days, [r.pollen_g / 1000.0 for r in reports], label="pollen (kg)")
    _regime_bands(ax, reports)
    ax.set_xlabel("day")
    ax.set_ylabel("stock (kg)")
    ax.set_title("stores")
    ax.legend()
    fig.tight_layout()
    path = str(out_dir / "stocks.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(days, [r.females for r in reports], label="adult females")
    ax.plot(days, [r.larvae for r in reports], label="brood")
    ax.plot(days, [r.nurses for r in reports], label="nurses")
    ax.plot(days, [r.foragers for r in reports], label="foragers")
    ax.set_xlabel("day")
    ax.set_ylabel("bees")
    ax.set_title("population")
    ax.legend()
    fig.tight_layout()
    path = str(out_dir / "population.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    for name, label in [("flux_foraging_j", "foraging"),
                        ("flux_heating_j", "heating"),
                        ("flux_upkeep_j", "upkeep"),
                        ("flux_brood_j", "brood"),
                        ("flux_pollen_cost_j", "pollen fetch"),
                        ("flux_mortality_j", "mortality"),
                        ("flux_emergence_j", "emergence")]:
        ax.plot(days, [getattr(r, name) / 1e6 for r in reports], label=label)
    ax.axhline(0.0, color="k", linewidth=0.5)
    ax.set_xlabel("day")
    ax.set_ylabel("daily flux (MJ)")
    ax.set_title("energy ledger")
    ax.legend(ncol=2, fontsize=8)
    fig.tight_layout()
    path = str(out_dir / "fluxes.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    tau_days = [r.day for r in reports if r.tau is not None]
    taus = [r.tau for r in reports if r.tau is not None]
    if taus:
        ax.plot(tau_days, taus, ".", markersize=3, label="exchange rate")
    ax.plot(days, [r.eta_cut for r in reports], label="marginal efficiency",
            color="#ff7f0e")
    _regime_bands(ax, reports)
    ax.set_xlabel("day")
    ax.set_title("market")
    ax.legend()
    fig.tight_layout()
    path = str(out_dir / "market.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def plot_field(field, landscape, path) -> str:
    """Heatmap of the nectar quality field with the hive marked."""
    grid = field.grid
    rows, cols = grid.shape
    cs = field.cell_size
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(grid, origin="upper",
                   extent=(0, cols * cs, rows * cs, 0), cmap="viridis")
    ax.imshow(np.where(field.vacuum, np.nan, 1.0), origin="upper",
              extent=(0, cols * cs, rows * cs, 0), cmap="Greys",
              vmin=0.0, vmax=2.0, alpha=0.35)
    if landscape is not None and landscape.hive is not None:
        hr, hc = landscape.hive
        ax.plot((hc + 0.5) * cs, (hr + 0.5) * cs, "r*", markersize=14,
                label="hive")
        ax.legend(loc="upper right")
    fig.colorbar(im, ax=ax, label="expected trip quality")
    ax.set_xlabel("m")
    ax.set_ylabel("m")
    ax.set_title("foraging quality")
    fig.tight_layout()
    fig.savefig(str(path), dpi=120)
    plt.close(fig)
    return str(path)
