"""Known-truth generator models for self-consistency checks and demos."""

from __future__ import annotations

import numpy as np

from .ingest import DEFAULT_SEASONS, DailySeries
from .maps import build_grid
from .modelfile import ModelFile, build_model, synthetic_columns
from .simulate import simulate_dataset
from .trends import EULER_GAMMA, REFERENCE_GUMBEL, REFERENCE_MEAN_B, REFERENCE_TRENDS, GumbelParams, TrendModel


def generator_model(noise_scale: float = 0.5, rate_width: float = 0.005,
                    h: float = 0.002) -> ModelFile:
    """Reference trends with narrowed, zero-mean Gumbel deviations and tight rate maps.

    Each deviation keeps the reference shape ``nu`` times ``noise_scale`` and
    puts ``mu = nu * gamma`` so that its mean is zero; the trends are then the
    expected daily parameters. Rate columns have Laplace scale ``rate_width``.
    """
    residuals = {}
    for k, g in REFERENCE_GUMBEL.items():
        nu = g.nu * noise_scale
        residuals[k] = GumbelParams(nu * EULER_GAMMA, nu)
    trends = TrendModel(dict(REFERENCE_TRENDS), residuals, REFERENCE_MEAN_B)
    grid = build_grid(trends.mean_B)
    cols = synthetic_columns(grid, np.full(grid.J + 1, rate_width))
    return build_model(trends, {s.id: cols for s in DEFAULT_SEASONS}, h=h,
                       provenance={"source": "synthetic generator"})


def generate_year(model: ModelFile, seed: int = 7, cadence: float = 10.0) -> list[DailySeries]:
    """One simulated day for each day of the year."""
    return simulate_dataset(model, range(365), seed, cadence)


def relative_error(fitted, truth) -> float:
    """``|fitted - truth| / |truth|`` with vector norms."""
    fitted, truth = np.asarray(fitted, dtype=float), np.asarray(truth, dtype=float)
    return float(np.linalg.norm(fitted - truth) / np.linalg.norm(truth))
