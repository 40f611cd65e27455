"""Trimmed moving average over neighbouring days.

Each smoothed day is the per-minute mean of the ``2N+1`` surrounding days
after dropping the ``L`` days with the smallest daily irradiance sum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidInputError
from .ingest import MINUTES_PER_DAY, DailySeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TmaConfig:
    N: int = 5
    L: int = 4
    cadence_min: float = 10.0

    def __post_init__(self):
        if self.N < 0 or self.L < 0:
            raise InvalidInputError("TMA N and L must be non-negative")
        if self.L >= 2 * self.N + 1:
            raise InvalidInputError(f"L={self.L} must be < 2N+1={2 * self.N + 1}")


def minute_grid(cadence_min: float) -> np.ndarray:
    return np.arange(0.0, MINUTES_PER_DAY, cadence_min)


def _window_days(d: int, present: Sequence[int], cfg: TmaConfig) -> tuple[list[int], int]:
    """Day indices entering the window of ``d`` and the trim count to use."""
    lo, hi = min(present), max(present)
    span = hi - lo + 1
    have = set(present)
    if span >= 365:
        days = [lo + (d + n - lo) % span for n in range(-cfg.N, cfg.N + 1)]
        L = cfg.L
    else:
        n_fit = min(cfg.N, d - lo, hi - d)
        days = list(range(d - n_fit, d + n_fit + 1))
        L = min(cfg.L, 2 * n_fit)
    return [k for k in days if k in have], L


def trimmed_moving_average(
    dataset: Sequence[DailySeries], d: int, cfg: TmaConfig | None = None
) -> DailySeries:
    """Smoothed curve of day ``d`` on the common minute grid."""
    cfg = cfg or TmaConfig()
    by_day = {s.d: s for s in dataset}
    if d not in by_day:
        raise InsufficientDataError(f"day {d} not in dataset")
    window, L = _window_days(d, sorted(by_day), cfg)
    if len(window) < L + 1:
        raise InsufficientDataError(
            f"day {d}: {len(window)} usable window days, need at least {L + 1}"
        )
    grid = minute_grid(cfg.cadence_min)
    curves = np.vstack([by_day[k].on_grid(grid) for k in window])
    # stable sort keeps the earliest day first among equal sums
    order = np.argsort(curves.sum(axis=1), kind="stable")
    kept = curves[np.sort(order[L:])]
    smooth = np.clip(kept.mean(axis=0), 0.0, None)
    return DailySeries(d, grid, smooth)


def smooth_dataset(
    dataset: Sequence[DailySeries], cfg: TmaConfig | None = None
) -> tuple[list[DailySeries], list[tuple[int, str]]]:
    """Smooth every day; days that cannot be smoothed are reported, not raised."""
    cfg = cfg or TmaConfig()
    out, skipped = [], []
    present = sorted(s.d for s in dataset)
    if present and present[-1] - present[0] + 1 < 365:
        log.warning(
            "dataset spans %d days (< 365): TMA window truncated at the edges",
            present[-1] - present[0] + 1,
        )
    for s in dataset:
        try:
            out.append(trimmed_moving_average(dataset, s.d, cfg))
        except InsufficientDataError as exc:
            skipped.append((s.d, str(exc)))
    return out, skipped
