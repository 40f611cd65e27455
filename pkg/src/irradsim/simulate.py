"""
Forward simulation of daily irradiance curves and radiant exposure.

One simulated day draws, in this order,

1. the Gumbel deviations ``x_A, x_B, x_C`` around the annual trends, and
2. a residual path ``R*_j`` on the m* grid, built step by step from rates
   drawn out of the season's density map:
   ``R*_j = R*_{j-1} + (2/J) r*_j`` with ``R*_0 = 0``.

The irradiance is then ``C [1 - m*^2 + R*(m*)]`` inside the daytime and zero
outside. Functions taking ``size`` draw that many independent replicates in
one vectorised pass; ``size=None`` draws one and returns scalars.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import RealizationError
from .ingest import DAYS_PER_YEAR, MINUTES_PER_DAY, DailySeries
from .modelfile import ModelFile, SeasonMaps
from .maps import KdeMap
from .trends import gumbel_expected, sample_gumbel

log = logging.getLogger(__name__)

MAX_REDRAWS = 100


def replicate_rng(seed: int, day: int, replicate: int = 0) -> np.random.Generator:
    """Independent stream per (seed, day, replicate)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(day), int(replicate)]))


def _valid_params(A, B, C, m_c):
    return (B > 0) & (C > 0) & (m_c * (A - B) > 0) & (m_c * (A + B) < MINUTES_PER_DAY)


def realize_params(rng: np.random.Generator, d: int, model: ModelFile, size=None):
    """Trend value plus a Gumbel deviation for each of A, B, C.

    Draws that give an impossible day (non-positive B or C, sunrise before
    midnight, nightfall after) are redrawn, at most 100 times.
    """
    n = 1 if size is None else int(size)
    tm = model.trends
    base = {k: tm.trend(k, d) for k in ("A", "B", "C")}
    dev = {k: sample_gumbel(rng, tm.residuals[k], n) for k in ("A", "B", "C")}
    A, B, C = (base[k] + dev[k] for k in ("A", "B", "C"))
    ok = _valid_params(A, B, C, model.m_c)
    for _ in range(MAX_REDRAWS):
        if ok.all():
            break
        idx = np.flatnonzero(~ok)
        A[idx] = base["A"] + sample_gumbel(rng, tm.residuals["A"], idx.size)
        B[idx] = base["B"] + sample_gumbel(rng, tm.residuals["B"], idx.size)
        C[idx] = base["C"] + sample_gumbel(rng, tm.residuals["C"], idx.size)
        ok = _valid_params(A, B, C, model.m_c)
    if not ok.all():
        raise RealizationError(
            f"day {d}: no valid (A, B, C) after {MAX_REDRAWS} redraws; "
            f"trend values {base}"
        )
    if size is None:
        return float(A[0]), float(B[0]), float(C[0])
    return A, B, C


def sample_rate(rng: np.random.Generator, j: int, kmap: KdeMap, size=None):
    """Inverse-transform draw from column ``j`` (nearest filled column if empty)."""
    u = rng.random(size)
    r = kmap.column(j).ppf(u)
    return float(r) if size is None else r


def simulate_residual_paths(rng: np.random.Generator, maps: SeasonMaps, size: int) -> np.ndarray:
    """``size`` residual paths, shape (size, J+1), each kept inside the R* envelope.

    A step that would leave the node's allowed interval is redrawn (at most
    100 times) and then clamped to the nearest bound.
    """
    J = maps.rates.grid.J
    step = 2.0 / J
    lo, hi = maps.envelope
    R = np.zeros((size, J + 1))
    for j in range(1, J + 1):
        col = maps.rates.column(j)
        prev = R[:, j - 1]
        cand = prev + step * col.ppf(rng.random(size))
        bad = (cand < lo[j]) | (cand > hi[j])
        for _ in range(MAX_REDRAWS):
            if not bad.any():
                break
            idx = np.flatnonzero(bad)
            cand[idx] = prev[idx] + step * col.ppf(rng.random(idx.size))
            bad[idx] = (cand[idx] < lo[j]) | (cand[idx] > hi[j])
        R[:, j] = np.clip(cand, lo[j], hi[j])
    return R


def simulate_residual_path(rng: np.random.Generator, maps: SeasonMaps) -> np.ndarray:
    return simulate_residual_paths(rng, maps, 1)[0]


def residual_integral(R: np.ndarray) -> np.ndarray | float:
    """Trapezoid rule of R* over m* in [-1, 1] on the uniform grid (last axis)."""
    R = np.asarray(R, dtype=float)
    J = R.shape[-1] - 1
    total = (R[..., 0] + 2.0 * R[..., 1:-1].sum(axis=-1) + R[..., -1]) / J
    return float(total) if np.ndim(total) == 0 else total


def irradiance_curve(minutes, A: float, B: float, C: float, R: np.ndarray, m_c: float) -> np.ndarray:
    """``C [1 - m*^2 + R*(m*)]`` with R* linear between grid nodes; zero at night."""
    minutes = np.asarray(minutes, dtype=float)
    J = R.size - 1
    nodes = -1.0 + 2.0 * np.arange(J + 1) / J
    m_star = (minutes / m_c - A) / B
    day = np.abs(m_star) <= 1.0
    E = np.zeros_like(minutes)
    ms = m_star[day]
    E[day] = C * (1.0 - ms * ms + np.interp(ms, nodes, R))
    return np.clip(E, 0.0, None)


def radiant_exposure(minutes, irradiance) -> float:
    """Daily radiant exposure in W h/m^2 (trapezoid in minutes, divided by 60).

    A grid that starts at midnight and stops short of 1440 is closed with the
    midnight value, so the integral always spans the whole day.
    """
    m = np.asarray(minutes, dtype=float)
    E = np.asarray(irradiance, dtype=float)
    if m.size and m[0] == 0.0 and m[-1] < MINUTES_PER_DAY:
        m = np.append(m, MINUTES_PER_DAY)
        E = np.append(E, E[0])
    return float(trapezoid(E, m) / 60.0)


@dataclass
class SimulatedDay:
    d: int
    A: float
    B: float
    C: float
    minutes: np.ndarray
    irradiance: np.ndarray
    residual_path: np.ndarray
    exposure: float

    def as_series(self) -> DailySeries:
        return DailySeries(self.d, self.minutes, self.irradiance)


def simulate_irradiance(
    rng: np.random.Generator, d: int, model: ModelFile, cadence: float = 10.0
) -> SimulatedDay:
    A, B, C = realize_params(rng, d, model)
    R = simulate_residual_path(rng, model.season_maps(d))
    minutes = np.arange(0.0, MINUTES_PER_DAY, cadence)
    E = irradiance_curve(minutes, A, B, C, R, model.m_c)
    return SimulatedDay(d, A, B, C, minutes, E, R, radiant_exposure(minutes, E))


def simulate_irradiance_batch(
    rng: np.random.Generator, d: int, model: ModelFile, size: int, cadence: float = 10.0
) -> tuple[np.ndarray, np.ndarray]:
    """``size`` curves of one day from a single stream: (minutes, irradiance[size, T]).

    Draws in the same order as :func:`simulate_exposure` with the same ``size``.
    """
    A, B, C = realize_params(rng, d, model, size)
    R = simulate_residual_paths(rng, model.season_maps(d), size)
    minutes = np.arange(0.0, MINUTES_PER_DAY, cadence)
    E = np.stack([irradiance_curve(minutes, A[k], B[k], C[k], R[k], model.m_c) for k in range(size)])
    return minutes, E


def simulate_exposure(rng: np.random.Generator, d: int, model: ModelFile, size=None):
    """Radiant exposure from the closed form ``(m_c/60) B C (4/3 + int R*)``.

    Consumes random numbers in the same order as :func:`simulate_irradiance`,
    so equal generator states give the same realisation on both routes.
    """
    n = 1 if size is None else int(size)
    A, B, C = realize_params(rng, d, model, n)
    R = simulate_residual_paths(rng, model.season_maps(d), n)
    I = model.m_c / 60.0 * B * C * (4.0 / 3.0 + residual_integral(R))
    return float(I[0]) if size is None else I


def expected_residual_path(kmap: KdeMap) -> np.ndarray:
    J = kmap.grid.J
    means = np.array([0.0] + [kmap.column_mean(j) for j in range(1, J + 1)])
    return np.cumsum(means * (2.0 / J))


def expected_exposure(d: int, model: ModelFile) -> float:
    """Mean exposure treating the parameter deviations and the path as independent."""
    tm = model.trends
    B = tm.trend("B", d) + gumbel_expected(tm.residuals["B"])
    C = tm.trend("C", d) + gumbel_expected(tm.residuals["C"])
    ER = expected_residual_path(model.season_maps(d).rates)
    return model.m_c / 60.0 * B * C * (4.0 / 3.0 + residual_integral(ER))


def expected_curve(d: int, model: ModelFile, cadence: float = 10.0) -> tuple[np.ndarray, np.ndarray]:
    """Parabola of the trend values (no deviations, no residual)."""
    tm = model.trends
    A, B, C = (tm.trend(k, d) for k in ("A", "B", "C"))
    minutes = np.arange(0.0, MINUTES_PER_DAY, cadence)
    return minutes, irradiance_curve(minutes, A, B, C, np.zeros(model.grid.J + 1), model.m_c)


def normalize_day(d: int) -> int:
    if d >= DAYS_PER_YEAR or d < 0:
        log.warning("day %d reduced modulo %d", d, DAYS_PER_YEAR)
    return d % DAYS_PER_YEAR


def simulate_dataset(model: ModelFile, days, seed: int, cadence: float = 10.0) -> list[DailySeries]:
    """One simulated day per entry of ``days``, each from its own stream."""
    return [
        simulate_irradiance(replicate_rng(seed, d, 0), d, model, cadence).as_series()
        for d in days
    ]
