"""Static SVG figures plus the CSV each one is drawn from.

matplotlib runs on the Agg backend, so no display is needed.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dailyfit import FitParams  # noqa: E402
from .maps import scaled_pdm, write_map_csv  # noqa: E402
from .modelfile import ModelFile  # noqa: E402
from .pv import ChargeStatistics  # noqa: E402
from .simulate import expected_exposure  # noqa: E402

KINDS = ("pdm", "discrete", "exposure", "boxes", "params")

# fixed metadata keeps repeated renders byte-identical
_SVG_META = {"Date": None, "Creator": "irradsim"}


def _save(fig, path: Path) -> None:
    plt.rcParams["svg.hashsalt"] = "irradsim"
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def _heatmap(m_star, r_star, values, title: str, label: str, svg: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(m_star, r_star, values.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=label)
    ax.set_xlabel("m*")
    ax.set_ylabel("r*")
    ax.set_title(title)
    _save(fig, svg)


def plot_pdm(model: ModelFile, season: int, out_dir: Path) -> tuple[Path, Path]:
    """Scaled kernel density map of one season."""
    kmap = model.maps[season].rates
    r, values = scaled_pdm(kmap)
    csv_path, svg_path = out_dir / f"pdm_s{season}.csv", out_dir / f"pdm_s{season}.svg"
    write_map_csv(csv_path, kmap.grid.nodes, r, values)
    _heatmap(kmap.grid.nodes, r, values, f"season {season}: h f_h", "h f_h", svg_path)
    return svg_path, csv_path


def plot_discrete(model: ModelFile, season: int, out_dir: Path) -> tuple[Path, Path]:
    """Binned probability map of one season (columns normalised to unit mass)."""
    dmap = model.maps[season].discrete
    centers = 0.5 * (dmap.edges[:-1] + dmap.edges[1:])
    csv_path, svg_path = out_dir / f"discrete_s{season}.csv", out_dir / f"discrete_s{season}.svg"
    write_map_csv(csv_path, dmap.grid.nodes, centers, dmap.mass)
    _heatmap(dmap.grid.nodes, centers, dmap.mass, f"season {season}: binned map", "probability",
             svg_path)
    return svg_path, csv_path


def plot_exposure(model: ModelFile, out_dir: Path,
                  simulated: dict[int, float] | None = None) -> tuple[Path, Path]:
    """Expected daily exposure over the year, with simulated values if given."""
    days = np.arange(365)
    expected = np.array([expected_exposure(int(d), model) for d in days])
    csv_path, svg_path = out_dir / "exposure_plot.csv", out_dir / "exposure_plot.svg"
    simulated = simulated or {}
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "expected_whm2", "simulated_whm2"])
        for d, e in zip(days, expected):
            s = simulated.get(int(d))
            w.writerow([int(d), f"{e:.4f}", "" if s is None else f"{s:.4f}"])
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(days, expected / 1000.0, color="k", lw=1.5, label="expected")
    if simulated:
        sd = sorted(simulated)
        ax.plot(sd, [simulated[d] / 1000.0 for d in sd], ".", ms=3, label="simulated")
    ax.set_xlabel("day of year")
    ax.set_ylabel("exposure (kW h/m^2)")
    ax.legend()
    _save(fig, svg_path)
    return svg_path, csv_path


def plot_boxes(stats: Sequence[ChargeStatistics], out_dir: Path,
               measured: dict[int, float] | None = None) -> tuple[Path, Path]:
    """Box and whisker chart of replicate charges per day."""
    csv_path, svg_path = out_dir / "boxes.csv", out_dir / "boxes.svg"
    measured = measured or {}
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "q1", "median", "q3", "whisker_low", "whisker_high", "measured_ah"])
        for s in stats:
            m = measured.get(s.day)
            w.writerow([s.day, f"{s.q1:.6f}", f"{s.median:.6f}", f"{s.q3:.6f}",
                        f"{s.whisker_low:.6f}", f"{s.whisker_high:.6f}",
                        "" if m is None else f"{m:.6f}"])
    boxes = [
        {"label": str(s.day), "q1": s.q1, "med": s.median, "q3": s.q3,
         "whislo": s.whisker_low, "whishi": s.whisker_high, "fliers": s.outliers}
        for s in stats
    ]
    fig, ax = plt.subplots(figsize=(max(6, 0.25 * len(stats)), 4))
    ax.bxp(boxes, positions=range(len(stats)), showfliers=True,
           flierprops={"marker": "x", "markersize": 3})
    if measured:
        xs = [i for i, s in enumerate(stats) if s.day in measured]
        ax.plot(xs, [measured[stats[i].day] for i in xs], "o", color="tab:red", ms=3,
                label="measured")
        ax.legend()
    ax.set_xlabel("day")
    ax.set_ylabel("charge (A h)")
    ax.tick_params(axis="x", labelsize=6)
    _save(fig, svg_path)
    return svg_path, csv_path


def plot_params(params: Sequence[FitParams], out_dir: Path,
                model: ModelFile | None = None) -> tuple[Path, Path]:
    """Daily A, B, C against day of year, with the annual trend when a model is given."""
    csv_path, svg_path = out_dir / "params_plot.csv", out_dir / "params_plot.svg"
    days = np.array([p.d for p in params])
    cols = {k: np.array([getattr(p, k) for p in params]) for k in ("A", "B", "C")}
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "A", "B", "C"])
        for i, d in enumerate(days):
            w.writerow([int(d)] + [repr(float(cols[k][i])) for k in ("A", "B", "C")])
    fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
    grid = np.arange(365)
    for ax, k in zip(axes, ("A", "B", "C")):
        ax.plot(days, cols[k], ".", ms=3)
        if model is not None:
            ax.plot(grid, model.trends.trend(k, grid), "k-", lw=1)
        ax.set_ylabel(k)
    axes[-1].set_xlabel("day of year")
    _save(fig, svg_path)
    return svg_path, csv_path
