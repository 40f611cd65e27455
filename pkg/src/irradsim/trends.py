"""
Annual trends of the day parameters and the spread around them.

Each of A, B, C is modelled as a constant plus two cosine harmonics of the
year, phased on the June solstice (day 172). What is left over, ``x = Y - Ỹ``,
follows a minimum-type Gumbel law

    f(x) = 1/nu * exp(z - exp(z)),   z = (x - mu) / nu

whose mean is ``mu - nu * gamma``; the long tail points to negative ``x``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateFitError, GumbelFitError, InvalidInputError

SOLSTICE_DAY = 172
PERIOD_DAYS = 365.0
EULER_GAMMA = 0.5772156649015329
PARAMETERS = ("A", "B", "C")


@dataclass(frozen=True)
class TrendCoefficients:
    y0: float
    y1: float
    y2: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.y0, self.y1, self.y2)):
            raise InvalidInputError("trend coefficients must be finite")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.y0, self.y1, self.y2)


@dataclass(frozen=True)
class GumbelParams:
    mu: float
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidInputError(f"Gumbel scale must be positive, got {self.nu}")


@dataclass
class TrendModel:
    trends: dict[str, TrendCoefficients]
    residuals: dict[str, GumbelParams]
    mean_B: float

    def __post_init__(self):
        missing = [k for k in PARAMETERS if k not in self.trends or k not in self.residuals]
        if missing:
            raise InvalidInputError(f"trend model lacks parameters {missing}")

    def trend(self, name: str, d) -> np.ndarray | float:
        return eval_trend(self.trends[name], d)


def trend_basis(d) -> np.ndarray:
    phase = 2.0 * np.pi * (np.asarray(d, dtype=float) % PERIOD_DAYS - SOLSTICE_DAY) / PERIOD_DAYS
    return np.stack([np.ones_like(phase), np.cos(phase), np.cos(2.0 * phase)], axis=-1)


def eval_trend(c: TrendCoefficients, d):
    value = trend_basis(d) @ np.array(c.as_tuple())
    return float(value) if np.ndim(value) == 0 else value


def fit_trend(days: Sequence[float], values: Sequence[float]) -> TrendCoefficients:
    """Least-squares fit of the constant + two-harmonic basis."""
    days = np.asarray(days, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.unique(days % PERIOD_DAYS).size < 3:
        raise DegenerateFitError("trend fit needs at least 3 distinct days")
    X = trend_basis(days)
    coef, _, rank, _ = np.linalg.lstsq(X, values, rcond=None)
    if rank < 3:
        raise DegenerateFitError("rank-deficient trend design")
    return TrendCoefficients(*map(float, coef))


def rice_bins(n: int, data_range: float | None = None) -> tuple[int, float | None]:
    """Rice's rule: bin count ``ceil(2 n^(1/3))`` and width ``range / (2 n^(1/3))``."""
    if n < 1:
        raise InvalidInputError("Rice's rule needs at least one sample")
    k = 2.0 * n ** (1.0 / 3.0)
    # 2*8**(1/3) evaluates to 4.000000000000001
    count = math.ceil(round(k, 9))
    if data_range is None:
        return count, None
    if not data_range > 0:
        raise InvalidInputError("zero-range data has no Rice bin width")
    return count, data_range / k


def gumbel_pdf(x, p: GumbelParams):
    z = (np.asarray(x, dtype=float) - p.mu) / p.nu
    with np.errstate(over="ignore"):
        out = np.exp(z - np.exp(z)) / p.nu
    return float(out) if np.ndim(out) == 0 else out


def gumbel_cdf(x, p: GumbelParams):
    z = (np.asarray(x, dtype=float) - p.mu) / p.nu
    with np.errstate(over="ignore"):
        out = -np.expm1(-np.exp(z))
    return float(out) if np.ndim(out) == 0 else out


def gumbel_quantile(u, p: GumbelParams):
    """Inverse CDF: ``mu + nu * ln(-ln(1 - u))``."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        out = p.mu + p.nu * np.log(-np.log1p(-u))
    return float(out) if np.ndim(out) == 0 else out


def gumbel_expected(p: GumbelParams) -> float:
    return p.mu - p.nu * EULER_GAMMA


def sample_gumbel(rng: np.random.Generator, p: GumbelParams, size=None):
    """Inverse-transform draws; ``size=None`` returns a float."""
    u = rng.random(size)
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).eps)
    return gumbel_quantile(u, p)


@dataclass
class GumbelFit:
    params: GumbelParams
    iterations: int
    log_likelihood: float


def gumbel_loglik(x, p: GumbelParams) -> float:
    z = (np.asarray(x, dtype=float) - p.mu) / p.nu
    return float(np.sum(z - np.exp(z)) - z.size * math.log(p.nu))


def fit_gumbel(x: Sequence[float], tol: float = 1e-9, max_iter: int = 200) -> GumbelParams:
    return fit_gumbel_full(x, tol, max_iter).params


def fit_gumbel_full(x: Sequence[float], tol: float = 1e-9, max_iter: int = 200) -> GumbelFit:
    """Maximum-likelihood fit of the minimum-type Gumbel law.

    Works on standardised data. The scale solves the profile equation
    ``nu = sum(z w) / sum(w) - mean(z)`` with ``w = exp(z / nu)``, by Newton
    iteration started at the moment estimate ``sqrt(6) / pi``; the location
    then follows in closed form.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 10:
        raise GumbelFitError(f"Gumbel fit needs at least 10 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise GumbelFitError("non-finite samples")
    mean, std = float(x.mean()), float(x.std())
    if not std > 0 or std < 1e-14 * max(1.0, abs(mean)):
        raise GumbelFitError("zero-scale sample: all values identical")
    z = (x - mean) / std

    nu = math.sqrt(6.0) / math.pi
    history = []
    for it in range(1, max_iter + 1):
        a = z / nu
        w = np.exp(a - a.max())
        w /= w.sum()
        wmean = float(w @ z)
        wvar = float(w @ (z - wmean) ** 2)
        g = nu - wmean
        step = g / (1.0 + wvar / nu**2)
        new = nu - step
        if new <= 0:
            new = nu / 2.0
        history.append(new)
        if abs(new - nu) < tol:
            nu = new
            break
        nu = new
    else:
        raise GumbelFitError(
            f"no convergence after {max_iter} iterations; last scale estimates {history[-3:]}"
        )
    mu_z = nu * (logsumexp(z / nu) - math.log(z.size))
    params = GumbelParams(mean + std * mu_z, std * nu)
    return GumbelFit(params, it, gumbel_loglik(x, params))


def fit_trend_model(
    days: Sequence[int], values: dict[str, Sequence[float]]
) -> tuple[TrendModel, dict[str, np.ndarray]]:
    """Trend + Gumbel fit for each of A, B, C; also returns the residuals."""
    days = np.asarray(days)
    trends, gumbels, resid = {}, {}, {}
    for name in PARAMETERS:
        y = np.asarray(values[name], dtype=float)
        c = fit_trend(days, y)
        r = y - eval_trend(c, days)
        trends[name] = c
        gumbels[name] = fit_gumbel(r)
        resid[name] = r
    return TrendModel(trends, gumbels, float(np.mean(values["B"]))), resid


@dataclass
class HistogramRow:
    bin_left: float
    bin_right: float
    count: int
    pdf_scaled: float


def residual_histogram(x: Sequence[float], p: GumbelParams) -> list[HistogramRow]:
    """Rice-rule histogram of ``x`` with the Gumbel PDF scaled by width * n."""
    x = np.asarray(x, dtype=float)
    count, width = rice_bins(x.size, float(x.max() - x.min()))
    edges = x.min() + width * np.arange(count + 1)
    edges[-1] = max(edges[-1], x.max())
    counts, _ = np.histogram(x, edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    scaled = gumbel_pdf(centers, p) * width * x.size
    return [
        HistogramRow(float(a), float(b), int(c), float(s))
        for a, b, c, s in zip(edges[:-1], edges[1:], counts, scaled)
    ]


def write_histogram(rows: Sequence[HistogramRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count", "pdf_scaled"])
        for r in rows:
            w.writerow([repr(r.bin_left), repr(r.bin_right), r.count, repr(r.pdf_scaled)])


REFERENCE_TRENDS = {
    "A": TrendCoefficients(1.9790, -0.0017, 0.0005),
    "B": TrendCoefficients(0.8990, 0.0689, -0.0089),
    "C": TrendCoefficients(913.0363, 103.6416, -54.6980),
}
REFERENCE_GUMBEL = {
    "A": GumbelParams(0.0028, 0.0064),
    "B": GumbelParams(0.0048, 0.0111),
    "C": GumbelParams(26.0092, 26.0947),
}
REFERENCE_MEAN_B = 0.8990


def reference_trend_model() -> TrendModel:
    return TrendModel(dict(REFERENCE_TRENDS), dict(REFERENCE_GUMBEL), REFERENCE_MEAN_B)
