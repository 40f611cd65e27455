"""
The fitted model as one JSON document.

Layout (``format_version`` "1.x")::

    {
      "format_version": "1.0",
      "m_c": 360.0,
      "seasons": [{"id": 1, "from_day": 35, "to_day": 124}, ...],
      "trends": {"A": {"y0": .., "y1": .., "y2": .., "mu": .., "nu": ..}, "B": ..., "C": ...},
      "mean_B": 0.899,
      "J": 64,
      "h": 0.0364,            # bandwidth of the rate maps
      "h_rstar": ...,         # bandwidth of the R* envelope maps
      "binning": {"lo": .., "hi": .., "M_r": ..},
      "maps": {"1": {"rates": [[...], ...], "rstar": [[...], ...]}, ...},
      "provenance": {...}
    }

``rates`` and ``rstar`` hold the raw column samples (J+1 lists each); the
densities and histograms are rebuilt from them on load. Readers accept any
1.x file and reject other major versions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import norm

from . import __version__
from .errors import ModelFileError
from .ingest import DEFAULT_SEASONS, Season, check_seasons, season_of
from .maps import (
    Binning,
    ColumnData,
    DiscreteProbabilityMap,
    KdeMap,
    MstarGrid,
    build_discrete_map,
    build_grid,
    envelope,
    freedman_diaconis_bins,
    kde_bandwidth,
)
from .trends import GumbelParams, TrendCoefficients, TrendModel, reference_trend_model

FORMAT_VERSION = "1.0"


@dataclass
class SeasonMaps:
    season: int
    rates: KdeMap
    rstar: KdeMap
    discrete: DiscreteProbabilityMap

    @cached_property
    def envelope(self) -> tuple[np.ndarray, np.ndarray]:
        return envelope(self.rstar)


@dataclass
class ModelFile:
    m_c: float
    seasons: tuple[Season, ...]
    trends: TrendModel
    grid: MstarGrid
    h: float
    h_rstar: float
    binning: Binning
    maps: dict[int, SeasonMaps]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        implied = build_grid(self.trends.mean_B, self.m_c).J
        if implied != self.grid.J:
            raise ModelFileError(f"grid J={self.grid.J} but <B> and m_c imply J={implied}")
        for s in self.maps.values():
            if s.rates.grid.J != self.grid.J or s.rstar.grid.J != self.grid.J:
                raise ModelFileError(f"season {s.season} maps use a different grid")
        missing = {s.id for s in self.seasons} - set(self.maps)
        if missing:
            raise ModelFileError(f"no maps for seasons {sorted(missing)}")

    def season_maps(self, d: int) -> SeasonMaps:
        return self.maps[season_of(d, self.seasons)]

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        trends = {}
        for name, c in self.trends.trends.items():
            g = self.trends.residuals[name]
            trends[name] = {"y0": c.y0, "y1": c.y1, "y2": c.y2, "mu": g.mu, "nu": g.nu}
        maps = {}
        for sid in sorted(self.maps):
            sm = self.maps[sid]
            maps[str(sid)] = {
                "rates": [c.tolist() for c in sm.rates.columns],
                "rstar": [c.tolist() for c in sm.rstar.columns],
            }
        return {
            "format_version": FORMAT_VERSION,
            "m_c": self.m_c,
            "seasons": [{"id": s.id, "from_day": s.from_day, "to_day": s.to_day} for s in self.seasons],
            "trends": trends,
            "mean_B": self.trends.mean_B,
            "J": self.grid.J,
            "h": self.h,
            "h_rstar": self.h_rstar,
            "binning": {"lo": self.binning.lo, "hi": self.binning.hi, "M_r": self.binning.M_r},
            "maps": maps,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ModelFile":
        version = str(doc.get("format_version", ""))
        major = version.split(".")[0]
        if major != FORMAT_VERSION.split(".")[0]:
            raise ModelFileError(f"unsupported model format_version {version!r}")
        try:
            trends = TrendModel(
                {k: TrendCoefficients(v["y0"], v["y1"], v["y2"]) for k, v in doc["trends"].items()},
                {k: GumbelParams(v["mu"], v["nu"]) for k, v in doc["trends"].items()},
                float(doc["mean_B"]),
            )
            grid = MstarGrid(int(doc["J"]))
            b = doc["binning"]
            M_r = int(b["M_r"])
            binning = Binning((b["hi"] - b["lo"]) / M_r, M_r, float(b["lo"]), float(b["hi"]))
            seasons = tuple(Season(s["id"], s["from_day"], s["to_day"]) for s in doc["seasons"])
            h, h_rstar = float(doc["h"]), float(doc["h_rstar"])
            maps = {}
            for sid, m in doc["maps"].items():
                sid = int(sid)
                rates = [np.asarray(c, dtype=float) for c in m["rates"]]
                rstar = [np.asarray(c, dtype=float) for c in m["rstar"]]
                maps[sid] = SeasonMaps(
                    sid,
                    KdeMap(sid, grid, h, rates),
                    KdeMap(sid, grid, h_rstar, rstar),
                    build_discrete_map(rates, grid, binning, sid),
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFileError(f"malformed model file: {exc!r}") from exc
        return cls(float(doc["m_c"]), seasons, trends, grid, h, h_rstar, binning, maps,
                   dict(doc.get("provenance", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ModelFile":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
        return cls.from_dict(doc)


def build_model(
    trends: TrendModel,
    season_columns: Mapping[int, ColumnData],
    m_c: float = 360.0,
    seasons: Sequence[Season] = DEFAULT_SEASONS,
    h: float | None = None,
    h_rstar: float | None = None,
    provenance: dict | None = None,
) -> ModelFile:
    """Assemble per-season maps that share one grid, one binning and one bandwidth.

    Bandwidths and bin edges come from the columns pooled over all seasons.
    A season without any data borrows the pooled columns.
    """
    check_seasons(seasons)
    grid = build_grid(trends.mean_B, m_c)
    parts = [c for c in season_columns.values()]
    if not parts:
        raise ModelFileError("no residual columns to build maps from")
    for c in parts:
        if c.grid.J != grid.J:
            raise ModelFileError(f"columns built on J={c.grid.J}, model needs J={grid.J}")
    pooled = ColumnData.merge(parts)
    if h is None:
        h = kde_bandwidth(pooled.rates)
    if h_rstar is None:
        h_rstar = kde_bandwidth(pooled.rstar)
    binning = freedman_diaconis_bins(pooled.rates)
    maps = {}
    for s in seasons:
        cols = season_columns.get(s.id)
        if cols is None or not any(c.size for c in cols.rates):
            cols = pooled
        maps[s.id] = SeasonMaps(
            s.id,
            KdeMap(s.id, grid, h, cols.rates),
            KdeMap(s.id, grid, h_rstar, cols.rstar),
            build_discrete_map(cols.rates, grid, binning, s.id),
        )
    return ModelFile(m_c, tuple(seasons), trends, grid, float(h), float(h_rstar), binning, maps,
                     dict(provenance or {}, package_version=__version__))


# -- reference default ---------------------------------------------------------

REFERENCE_BANDWIDTH = 0.0364
REFERENCE_SAMPLES = 91


def laplace_width(m_star, edge: float = 0.02, noon: float = 0.08) -> np.ndarray:
    """Laplace scale of the reference rate columns: narrow at dawn/dusk, wide at noon."""
    return edge + noon * (1.0 - np.square(m_star))


def synthetic_columns(grid: MstarGrid, widths: np.ndarray, n: int = REFERENCE_SAMPLES) -> ColumnData:
    """Deterministic, symmetric column samples (quantiles, no random draws).

    Rates in column j are Laplace quantiles with scale ``widths[j]``; R* in
    column j are normal quantiles whose spread matches a random walk of those
    rates from ``R*_0 = 0``.
    """
    p = (np.arange(1, n + 1) - 0.5) / n
    c = p - 0.5
    laplace = -np.sign(c) * np.log1p(-2.0 * np.abs(c))
    gauss = norm.ppf(p)
    step_var = (grid.spacing ** 2) * 2.0 * np.square(widths)
    step_var[0] = 0.0
    walk_sd = np.sqrt(np.cumsum(step_var))
    rates = [np.zeros(0)] + [widths[j] * laplace for j in range(1, grid.J + 1)]
    rstar = [walk_sd[j] * gauss for j in range(grid.J + 1)]
    return ColumnData(grid, rates, rstar)


def reference_model() -> ModelFile:
    """Ready-to-simulate default: published trend and Gumbel values plus symmetric maps."""
    trends = reference_trend_model()
    grid = build_grid(trends.mean_B)
    cols = synthetic_columns(grid, laplace_width(grid.nodes))
    return build_model(
        trends,
        {s.id: cols for s in DEFAULT_SEASONS},
        h=REFERENCE_BANDWIDTH,
        h_rstar=kde_bandwidth(cols.rstar),
        provenance={"source": "reference defaults"},
    )

