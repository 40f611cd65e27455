"""
Probability maps of the residual rate of change ``r* = dR*/dm*``.

The normalised daytime [-1, 1] is cut into ``J`` equal steps. For each node
``m*_j`` the observed rates form one *column*; a column is summarised either
as a histogram on bin edges shared by all columns (discrete map) or as a
Gaussian kernel density estimate with one bandwidth for the whole map.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dailyfit import ResidualSeries
from .errors import BandwidthError, BinningError, EmptySupportError, GridError, InvalidInputError

log = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
SUPPORT_THRESHOLD = 1e-3
EVAL_POINTS = 1025
TAIL_WIDTHS = 8.0


@dataclass(frozen=True)
class MstarGrid:
    J: int

    def __post_init__(self):
        if self.J < 2:
            raise GridError(f"grid needs J >= 2, got {self.J}")

    @property
    def nodes(self) -> np.ndarray:
        return -1.0 + 2.0 * np.arange(self.J + 1) / self.J

    @property
    def spacing(self) -> float:
        return 2.0 / self.J

    def nearest(self, m_star) -> np.ndarray:
        j = np.rint((np.asarray(m_star, dtype=float) + 1.0) * self.J / 2.0)
        return np.clip(j, 0, self.J).astype(int)


def build_grid(mean_B: float, m_c: float = 360.0) -> MstarGrid:
    """Grid with ``J = floor(m_c <B> / 5)``, i.e. roughly 10-minute steps."""
    if not mean_B > 0:
        raise GridError(f"mean half-daytime must be positive, got {mean_B}")
    # guard floor() against 71.99999999 style round-off
    return MstarGrid(int(math.floor(m_c * mean_B / 5.0 + 1e-9)))


# -- rates -------------------------------------------------------------------


@dataclass
class RateSamples:
    """Flat sample list: ``r[k]`` was observed in column ``j[k]``."""

    j: np.ndarray
    r: np.ndarray

    def __len__(self):
        return self.j.size


def residuals_on_grid(day: ResidualSeries, grid: MstarGrid) -> tuple[np.ndarray, np.ndarray]:
    """Node indices covered by the day's m* range and R* interpolated there."""
    if day.m_star.size < 2:
        return np.zeros(0, dtype=int), np.zeros(0)
    order = np.argsort(day.m_star, kind="stable")
    m, R = day.m_star[order], day.R_star[order]
    nodes = grid.nodes
    idx = np.flatnonzero((nodes >= m[0] - 1e-12) & (nodes <= m[-1] + 1e-12))
    return idx, np.interp(nodes[idx], m, R)


def rates_from_nodes(idx: np.ndarray, R_nodes: np.ndarray, J: int) -> RateSamples:
    """Finite differences between consecutive covered nodes, trimmed to [-J/2, J/2]."""
    if idx.size < 2:
        return RateSamples(np.zeros(0, dtype=int), np.zeros(0))
    consecutive = np.diff(idx) == 1
    r = np.diff(R_nodes) * (J / 2.0)
    j = idx[1:][consecutive]
    r = r[consecutive]
    keep = np.abs(r) <= J / 2.0
    return RateSamples(j[keep], r[keep])


def column_rates(day: ResidualSeries, grid: MstarGrid) -> RateSamples:
    idx, R_nodes = residuals_on_grid(day, grid)
    if idx.size < 2:
        log.info("day %s: fewer than 2 covered grid nodes, skipped", day.d)
    return rates_from_nodes(idx, R_nodes, grid.J)


@dataclass
class ColumnData:
    """Per-column sample arrays (index 0..J) of rates and of R* itself."""

    grid: MstarGrid
    rates: list[np.ndarray]
    rstar: list[np.ndarray]

    @classmethod
    def collect(cls, days: Iterable[ResidualSeries], grid: MstarGrid) -> "ColumnData":
        rates = [[] for _ in range(grid.J + 1)]
        rstar = [[] for _ in range(grid.J + 1)]
        for day in days:
            idx, R_nodes = residuals_on_grid(day, grid)
            if idx.size < 2:
                log.info("day %s: fewer than 2 covered grid nodes, skipped", day.d)
                continue
            for j, R in zip(idx, R_nodes):
                rstar[j].append(R)
            rs = rates_from_nodes(idx, R_nodes, grid.J)
            for j, r in zip(rs.j, rs.r):
                rates[j].append(r)
        return cls(
            grid,
            [np.asarray(c, dtype=float) for c in rates],
            [np.asarray(c, dtype=float) for c in rstar],
        )

    @classmethod
    def merge(cls, parts: Sequence["ColumnData"]) -> "ColumnData":
        grid = parts[0].grid
        J = grid.J
        return cls(
            grid,
            [np.concatenate([p.rates[j] for p in parts]) for j in range(J + 1)],
            [np.concatenate([p.rstar[j] for p in parts]) for j in range(J + 1)],
        )


# -- discrete map ------------------------------------------------------------


@dataclass
class Binning:
    delta: float
    M_r: int
    lo: float
    hi: float
    column_widths: dict[int, float] = field(default_factory=dict)
    column_counts: dict[int, int] = field(default_factory=dict)
    excluded: list[int] = field(default_factory=list)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.M_r + 1)


def freedman_diaconis_bins(columns: Sequence[np.ndarray]) -> Binning:
    """Common bin count as the mean of per-column Freedman-Diaconis counts.

    Column ``j`` gets width ``2 IQR / l_j^(1/3)`` and count
    ``ceil(range_j / width_j)``; the map uses the (rounded up) mean count and
    spreads it over the range of all samples. Columns with fewer than two
    samples or zero IQR are left out of the average.
    """
    widths, counts, excluded = {}, {}, []
    pooled = []
    for j, c in enumerate(columns):
        c = np.asarray(c, dtype=float)
        if c.size == 0:
            continue
        pooled.append(c)
        if c.size < 2:
            excluded.append(j)
            continue
        q1, q3 = np.percentile(c, [25, 75])
        iqr = q3 - q1
        if not iqr > 0:
            log.info("column %d: zero IQR, left out of the bin average", j)
            excluded.append(j)
            continue
        w = 2.0 * iqr / c.size ** (1.0 / 3.0)
        widths[j] = w
        counts[j] = max(1, math.ceil((c.max() - c.min()) / w))
    if not pooled:
        raise BinningError("all columns are empty")
    allr = np.concatenate(pooled)
    lo, hi = float(allr.min()), float(allr.max())
    if counts:
        M_r = max(1, math.ceil(np.mean(list(counts.values())) - 1e-9))
    else:
        M_r = 1
    if hi <= lo:
        # every sample identical: one bin centred on that value
        lo, hi = lo - 0.5, hi + 0.5
        M_r = 1
    return Binning((hi - lo) / M_r, M_r, lo, hi, widths, counts, excluded)


@dataclass
class DiscreteProbabilityMap:
    season: int
    grid: MstarGrid
    edges: np.ndarray
    mass: np.ndarray
    counts: np.ndarray

    @property
    def empty_columns(self) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.counts.sum(axis=1) == 0)]


def build_discrete_map(
    columns: Sequence[np.ndarray], grid: MstarGrid, binning: Binning, season: int = 0
) -> DiscreteProbabilityMap:
    edges = binning.edges
    counts = np.zeros((grid.J + 1, binning.M_r), dtype=np.int64)
    for j, c in enumerate(columns):
        c = np.clip(np.asarray(c, dtype=float), edges[0], edges[-1])
        if c.size:
            counts[j], _ = np.histogram(c, edges)
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        mass = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
    dmap = DiscreteProbabilityMap(season, grid, edges, mass, counts)
    if dmap.empty_columns:
        log.info("season %s: empty columns %s", season, dmap.empty_columns)
    return dmap


# -- kernel density ----------------------------------------------------------


def gaussian_kernel(u):
    return np.exp(-0.5 * np.square(u)) / SQRT_2PI


def kde_density(samples, h: float, r_star):
    """``1/(h S) * sum_s K((r - r_s) / h)`` with a standard normal kernel."""
    samples = np.asarray(samples, dtype=float).ravel()
    if not h > 0:
        raise InvalidInputError("bandwidth must be positive")
    if samples.size == 0:
        raise InvalidInputError("density of an empty sample set")
    r = np.asarray(r_star, dtype=float)
    flat = r.ravel()
    out = np.empty(flat.size)
    step = max(1, 2_000_000 // samples.size)
    for k in range(0, flat.size, step):
        u = (flat[k:k + step, None] - samples[None, :]) / h
        out[k:k + step] = gaussian_kernel(u).sum(axis=1)
    out /= h * samples.size
    return float(out[0]) if r.ndim == 0 else out.reshape(r.shape)


def column_bandwidth(samples) -> float | None:
    """Normal-reference bandwidth ``(4 / (3 l))^(1/5) * sigma``; None if undefined."""
    c = np.asarray(samples, dtype=float)
    if c.size < 2:
        return None
    sigma = float(np.std(c, ddof=1))
    if not sigma > 0:
        return None
    return (4.0 / (3.0 * c.size)) ** 0.2 * sigma


def kde_bandwidth(columns: Sequence[np.ndarray]) -> float:
    """Average of the per-column normal-reference bandwidths."""
    hs = [h for h in map(column_bandwidth, columns) if h is not None]
    if not hs:
        raise BandwidthError("no column with at least 2 samples and nonzero spread")
    return float(np.mean(hs))


@dataclass
class KdeColumn:
    """One column's density tabulated on ``EVAL_POINTS`` points."""

    samples: np.ndarray
    h: float
    x: np.ndarray
    density: np.ndarray
    cdf: np.ndarray

    @classmethod
    def build(cls, samples, h: float) -> "KdeColumn":
        samples = np.asarray(samples, dtype=float)
        x = np.linspace(samples.min() - TAIL_WIDTHS * h, samples.max() + TAIL_WIDTHS * h, EVAL_POINTS)
        f = kde_density(samples, h, x)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))])
        # a small ramp keeps the table strictly increasing across zero-density gaps
        cum = cum + 1e-12 * np.arange(x.size)
        return cls(samples, h, x, f, cum / cum[-1])

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    def ppf(self, u):
        return np.interp(u, self.cdf, self.x)


class KdeMap:
    """Per-column samples with a shared bandwidth; columns are tabulated lazily."""

    def __init__(self, season: int, grid: MstarGrid, h: float, columns: Sequence[np.ndarray]):
        if len(columns) != grid.J + 1:
            raise InvalidInputError(f"expected {grid.J + 1} columns, got {len(columns)}")
        if not h > 0:
            raise BandwidthError("bandwidth must be positive")
        self.season = season
        self.grid = grid
        self.h = float(h)
        self.columns = [np.asarray(c, dtype=float) for c in columns]
        self._tables: dict[int, KdeColumn] = {}

    def nonempty(self, j: int) -> bool:
        return self.columns[j].size > 0

    def resolve(self, j: int) -> int:
        """``j`` itself if it has samples, otherwise the nearest column that does."""
        if self.nonempty(j):
            return j
        for k in range(1, self.grid.J + 1):
            for cand in (j - k, j + k):
                if 0 <= cand <= self.grid.J and self.nonempty(cand):
                    log.debug("season %s: column %d empty, using %d", self.season, j, cand)
                    return cand
        raise EmptySupportError(f"season {self.season}: map has no samples")

    def column(self, j: int) -> KdeColumn:
        j = self.resolve(j)
        if j not in self._tables:
            self._tables[j] = KdeColumn.build(self.columns[j], self.h)
        return self._tables[j]

    def density(self, j: int, r_star):
        return kde_density(self.columns[j], self.h, r_star)

    def column_mean(self, j: int) -> float:
        return self.column(j).mean


def scaled_pdm(kmap: KdeMap, r_grid: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``h * f_h`` on a common r* grid; rows are columns, empty rows are zero."""
    if r_grid is None:
        filled = [c for c in kmap.columns if c.size]
        lo = min(c.min() for c in filled) - 4 * kmap.h
        hi = max(c.max() for c in filled) + 4 * kmap.h
        r_grid = np.linspace(lo, hi, 401)
    out = np.zeros((kmap.grid.J + 1, r_grid.size))
    for j, c in enumerate(kmap.columns):
        if c.size:
            out[j] = kmap.h * kde_density(c, kmap.h, r_grid)
    return r_grid, out


def column_support(column: KdeColumn, threshold: float = SUPPORT_THRESHOLD) -> tuple[float, float]:
    """Smallest and largest tabulated r* where the density exceeds ``threshold``."""
    above = np.flatnonzero(column.density > threshold)
    if threshold <= 0:
        return float(column.x[0]), float(column.x[-1])
    if above.size == 0:
        raise EmptySupportError(f"density never exceeds {threshold}")
    return float(column.x[above[0]]), float(column.x[above[-1]])


def envelope(rstar_map: KdeMap, threshold: float = SUPPORT_THRESHOLD) -> tuple[np.ndarray, np.ndarray]:
    """Allowed R* interval per node, from the density of the observed R* values."""
    J = rstar_map.grid.J
    lo, hi = np.full(J + 1, -np.inf), np.full(J + 1, np.inf)
    for j in range(J + 1):
        try:
            lo[j], hi[j] = column_support(rstar_map.column(j), threshold)
        except EmptySupportError:
            log.info("season %s: node %d has no R* envelope", rstar_map.season, j)
    return lo, hi


def write_map_csv(path, m_star: np.ndarray, r_star: np.ndarray, values: np.ndarray) -> None:
    """Long-format ``m_star,r_star,value`` rows; ``values`` is (columns, r)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m_star", "r_star", "value"])
        for j, m in enumerate(m_star):
            for r, v in zip(r_star, values[j]):
                w.writerow([f"{m:.6f}", f"{r:.6f}", f"{v:.8g}"])
