"""End-to-end fitting and validation, shared by the CLI and the demos."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dailyfit import FitParams, day_residuals, fit_days
from .errors import IrradsimError
from .ingest import DEFAULT_SEASONS, DailySeries, ParsedDataset, Season, season_of
from .maps import ColumnData, build_grid
from .modelfile import ModelFile, build_model
from .pv import ChargeStatistics, DiodeModel, charge_statistics, daily_charge
from .simulate import replicate_rng, simulate_irradiance_batch
from .smoothing import TmaConfig, smooth_dataset
from .trends import fit_trend_model

log = logging.getLogger(__name__)


class StageError(IrradsimError):
    """An error re-raised with the pipeline stage it happened in."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (IrradsimError, ValueError, np.linalg.LinAlgError) as exc:
        raise StageError(name, str(exc)) from exc


@dataclass
class FitResult:
    model: ModelFile
    smoothed: list[DailySeries]
    params: list[FitParams]
    trend_residuals: dict[str, np.ndarray]
    skipped: list[tuple[int, str]] = field(default_factory=list)


def fit_model(
    dataset: ParsedDataset,
    m_c: float = 360.0,
    tma: TmaConfig | None = None,
    seasons: Sequence[Season] = DEFAULT_SEASONS,
) -> FitResult:
    """Smooth, fit the daily parabolas, fit the annual trends and build the maps."""
    tma = tma or TmaConfig()
    with stage("smoothing"):
        smoothed, skipped = smooth_dataset(dataset.days, tma)
        if not smoothed:
            raise IrradsimError("no day could be smoothed")
    with stage("daily-fit"):
        params, failed = fit_days(smoothed, m_c)
        skipped = skipped + failed
        for d, why in failed:
            log.warning("day %d dropped from the fit: %s", d, why)
        if len(params) < 10:
            raise IrradsimError(f"only {len(params)} days fitted, need at least 10")
    with stage("long-term-trends"):
        days = [p.d for p in params]
        trends, resid = fit_trend_model(days, {
            "A": [p.A for p in params],
            "B": [p.B for p in params],
            "C": [p.C for p in params],
        })
    with stage("residual-maps"):
        grid = build_grid(trends.mean_B, m_c)
        per_season: dict[int, list] = {s.id: [] for s in seasons}
        for r in day_residuals(dataset.days, params, m_c):
            per_season[season_of(r.d, seasons)].append(r)
        columns = {sid: ColumnData.collect(rs, grid) for sid, rs in per_season.items() if rs}
        model = build_model(trends, columns, m_c, seasons, provenance={
            "dataset_sha256": dataset.sha256,
            "days_fitted": len(params),
            "tma": {"N": tma.N, "L": tma.L},
        })
    return FitResult(model, smoothed, params, resid, skipped)


def replicate_charges(
    model: ModelFile,
    diode: DiodeModel,
    days: Sequence[int],
    replicates: int,
    seed: int,
    cadence: float = 10.0,
    n_series: int = 8,
) -> dict[int, np.ndarray]:
    """Daily charge (A h) of every replicate, keyed by day.

    The replicates of day ``d`` come from one stream seeded by ``(seed, d)``.
    """
    out = {}
    for d in days:
        minutes, E = simulate_irradiance_batch(replicate_rng(seed, d), d, model, replicates, cadence)
        out[d] = np.atleast_1d(daily_charge(minutes, E, diode, n_series))
    return out


@dataclass
class ValidationResult:
    statistics: list[ChargeStatistics]
    measured: dict[int, float]
    charges: dict[int, np.ndarray]

    @property
    def within_box(self) -> dict[int, bool]:
        return {s.day: s.contains(self.measured[s.day]) for s in self.statistics}

    @property
    def within_box_rate(self) -> float:
        flags = list(self.within_box.values())
        return float(np.mean(flags)) if flags else 0.0


def validate(
    model: ModelFile,
    diode: DiodeModel,
    measured: dict[int, float],
    replicates: int = 100,
    seed: int = 0,
    cadence: float = 10.0,
    n_series: int = 8,
) -> ValidationResult:
    days = sorted(measured)
    charges = replicate_charges(model, diode, days, replicates, seed, cadence, n_series)
    stats = [charge_statistics(charges[d], d) for d in days]
    return ValidationResult(stats, dict(measured), charges)
