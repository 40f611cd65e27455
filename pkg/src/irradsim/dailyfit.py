"""
Parabolic day model and the normalised (m*, E*) coordinates.

A smoothed day is described by three numbers, all per day:

``A``
    noon time in units of ``m_c``
``B``
    half the daytime length in units of ``m_c``
``C``
    irradiance at noon, W/m^2

so that ``E(m) = C * (1 - ((m/m_c - A) / B)**2)`` during daytime.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDayError, InsufficientDataError, InvalidInputError
from .ingest import MINUTES_PER_DAY, DailySeries

M_C = 360.0
DAYTIME_FLOOR_WM2 = 5.0
DAYTIME_FRACTION = 0.01


@dataclass(frozen=True)
class FitParams:
    d: int
    A: float
    B: float
    C: float

    def validate(self, m_c: float = M_C) -> "FitParams":
        if not (np.isfinite(self.A) and np.isfinite(self.B) and np.isfinite(self.C)):
            raise DegenerateDayError(f"day {self.d}: non-finite parameters")
        if self.B <= 0 or self.C <= 0:
            raise DegenerateDayError(f"day {self.d}: B={self.B}, C={self.C} must be positive")
        if not (0 < m_c * (self.A - self.B) and m_c * (self.A + self.B) < MINUTES_PER_DAY):
            raise DegenerateDayError(
                f"day {self.d}: sunrise/nightfall {m_c * (self.A - self.B):.1f}/"
                f"{m_c * (self.A + self.B):.1f} min outside the day"
            )
        return self

    def curve(self, minutes, m_c: float = M_C) -> np.ndarray:
        """Parabola evaluated at ``minutes`` (not clipped at zero)."""
        u = np.asarray(minutes, dtype=float) / m_c
        return self.C * (1.0 - ((u - self.A) / self.B) ** 2)


@dataclass
class NormalizedSeries:
    """Normalised samples of one day; arrays share one index."""

    d: int
    m_star: np.ndarray
    E_star: np.ndarray

    @property
    def in_daytime(self) -> np.ndarray:
        return np.abs(self.m_star) <= 1.0


@dataclass
class ResidualSeries:
    d: int
    m_star: np.ndarray
    R_star: np.ndarray


def daytime_mask(E: np.ndarray) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    if E.size == 0:
        return np.zeros(0, dtype=bool)
    return E > max(DAYTIME_FLOOR_WM2, DAYTIME_FRACTION * float(E.max()))


def fit_parabola(curve: DailySeries, m_c: float = M_C) -> FitParams:
    """Least-squares parabola through the daytime part of a smoothed day.

    The quadratic is fitted in ``u = m / m_c`` (better conditioned than raw
    minutes) and converted to vertex form.

    Raises
    ------
    InsufficientDataError
        fewer than three samples above the daytime threshold.
    DegenerateDayError
        the fitted parabola opens upwards or has no valid daytime.
    """
    mask = daytime_mask(curve.irradiance)
    if mask.sum() < 3:
        raise InsufficientDataError(f"day {curve.d}: {int(mask.sum())} daytime samples, need 3")
    u = curve.minutes[mask] / m_c
    E = curve.irradiance[mask]
    design = np.column_stack([u * u, u, np.ones_like(u)])
    (a2, a1, a0), *_ = np.linalg.lstsq(design, E, rcond=None)
    if not a2 < 0:
        raise DegenerateDayError(f"day {curve.d}: non-concave fit (c2={a2:.3g})")
    A = -a1 / (2.0 * a2)
    C = a0 - a1 * a1 / (4.0 * a2)
    if not C > 0:
        raise DegenerateDayError(f"day {curve.d}: non-positive peak C={C:.3g}")
    B = np.sqrt(-C / a2)
    return FitParams(curve.d, float(A), float(B), float(C)).validate(m_c)


def daytime_bounds(p: FitParams, m_c: float = M_C) -> tuple[float, float]:
    """Sunrise and nightfall minutes, the zeros of the parabola."""
    return m_c * (p.A - p.B), m_c * (p.A + p.B)


def normalize(raw: DailySeries, p: FitParams, m_c: float = M_C) -> NormalizedSeries:
    if p.C == 0:
        raise InvalidInputError("C = 0 cannot normalise")
    m_star = (raw.minutes / m_c - p.A) / p.B
    E_star = raw.irradiance / p.C - 1.0
    return NormalizedSeries(raw.d, m_star, E_star)


def master_curve(m_star):
    return -np.square(m_star)


def residuals(samples: NormalizedSeries) -> ResidualSeries:
    """Residual from the master curve, daytime samples only."""
    keep = samples.in_daytime
    m = samples.m_star[keep]
    return ResidualSeries(samples.d, m, samples.E_star[keep] - master_curve(m))


def fit_days(
    smoothed: Iterable[DailySeries], m_c: float = M_C
) -> tuple[list[FitParams], list[tuple[int, str]]]:
    """Fit every smoothed day; failures are collected instead of raised."""
    params, failed = [], []
    for s in smoothed:
        try:
            params.append(fit_parabola(s, m_c))
        except (InsufficientDataError, DegenerateDayError) as exc:
            failed.append((s.d, str(exc)))
    return params, failed


def day_residuals(
    raw_days: Sequence[DailySeries], params: Sequence[FitParams], m_c: float = M_C
) -> list[ResidualSeries]:
    """Normalise each raw day with the parameters fitted to its smoothed curve."""
    raw = {s.d: s for s in raw_days}
    return [residuals(normalize(raw[p.d], p, m_c)) for p in params if p.d in raw]


def write_params(params: Iterable[FitParams], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "A", "B", "C"])
        for p in params:
            w.writerow([p.d, repr(p.A), repr(p.B), repr(p.C)])


def read_params(path) -> list[FitParams]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [FitParams(int(r["day"]), float(r["A"]), float(r["B"]), float(r["C"])) for r in rows]
