"""
Reading raw irradiance records and splitting time into (day, minute).

Two CSV layouts are accepted and told apart by their header::

    t_min,irradiance_wm2
    day,minute,irradiance_wm2

Rows that cannot be used (bad numbers, negative irradiance, duplicate
timestamps) are skipped and reported with their 1-based line number; the
parse carries on with the remaining rows.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import InvalidInputError, ParseError

MINUTES_PER_DAY = 1440
DAYS_PER_YEAR = 365

ABSOLUTE_HEADER = ("t_min", "irradiance_wm2")
DECOMPOSED_HEADER = ("day", "minute", "irradiance_wm2")


@dataclass(frozen=True)
class IrradianceSample:
    t: int
    d: int
    m: int
    E: float

    def __post_init__(self):
        if self.t != MINUTES_PER_DAY * self.d + self.m:
            raise InvalidInputError(f"t={self.t} is not 1440*{self.d}+{self.m}")
        if not 0 <= self.m < MINUTES_PER_DAY:
            raise InvalidInputError(f"minute {self.m} outside [0, 1440)")
        if not self.E >= 0:
            raise InvalidInputError(f"negative irradiance {self.E}")


@dataclass
class DailySeries:
    """Irradiance samples of one day, ordered by minute-of-day."""

    d: int
    minutes: np.ndarray
    irradiance: np.ndarray

    def __post_init__(self):
        self.minutes = np.asarray(self.minutes, dtype=float)
        self.irradiance = np.asarray(self.irradiance, dtype=float)
        if self.minutes.shape != self.irradiance.shape:
            raise InvalidInputError("minutes and irradiance lengths differ")
        if self.minutes.size > 1 and np.any(np.diff(self.minutes) <= 0):
            raise InvalidInputError(f"day {self.d}: minutes not strictly increasing")

    def __len__(self):
        return self.minutes.size

    @property
    def daily_sum(self) -> float:
        return float(self.irradiance.sum())

    def on_grid(self, grid: np.ndarray) -> np.ndarray:
        """Linear interpolation onto ``grid``; zero outside the observed span."""
        if len(self) == 0:
            return np.zeros_like(grid, dtype=float)
        return np.interp(grid, self.minutes, self.irradiance, left=0.0, right=0.0)


@dataclass(frozen=True)
class Season:
    id: int
    from_day: int
    to_day: int

    def contains(self, d: int) -> bool:
        d = d % DAYS_PER_YEAR
        if self.from_day <= self.to_day:
            return self.from_day <= d <= self.to_day
        return d >= self.from_day or d <= self.to_day


DEFAULT_SEASONS = (
    Season(1, 35, 124),
    Season(2, 125, 218),
    Season(3, 219, 309),
    Season(4, 310, 34),
)


def check_seasons(seasons: Sequence[Season]) -> None:
    """Raise unless ``seasons`` cover every day of [0, 365) exactly once."""
    counts = np.zeros(DAYS_PER_YEAR, dtype=int)
    for s in seasons:
        for d in range(DAYS_PER_YEAR):
            counts[d] += s.contains(d)
    if np.any(counts != 1):
        bad = np.flatnonzero(counts != 1)
        raise InvalidInputError(f"seasons do not partition the year (e.g. day {bad[0]})")


def decompose_time(t: int) -> tuple[int, int]:
    """Split absolute minutes since the reference midnight into (day, minute)."""
    if t < 0:
        raise InvalidInputError(f"negative time {t}")
    d, m = divmod(int(t), MINUTES_PER_DAY)
    return d, m


def season_of(d: int, seasons: Sequence[Season] = DEFAULT_SEASONS) -> int:
    d = d % DAYS_PER_YEAR
    for s in seasons:
        if s.contains(d):
            return s.id
    raise InvalidInputError(f"day {d} not covered by any season")


@dataclass
class SchemaConfig:
    cadence_min: float = 10.0
    day_offset: int = 0


@dataclass
class RejectedRow:
    line: int
    reason: str


@dataclass
class Gap:
    day: int
    first_missing_minute: int
    last_missing_minute: int


@dataclass
class ParsedDataset:
    days: list[DailySeries]
    rejected: list[RejectedRow] = field(default_factory=list)
    gaps: list[Gap] = field(default_factory=list)
    sha256: str = ""

    def by_day(self) -> dict[int, DailySeries]:
        return {s.d: s for s in self.days}


def _open_source(source) -> tuple[TextIO, bool]:
    if isinstance(source, (str, Path)):
        try:
            return open(source, newline="", encoding="utf-8"), True
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc}") from exc
    return source, False


def parse_dataset(source, config: SchemaConfig | None = None) -> ParsedDataset:
    """Parse a GHI CSV (path or text stream) into one series per day present."""
    config = config or SchemaConfig()
    handle, owned = _open_source(source)
    try:
        try:
            text = handle.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise ParseError(f"unreadable source: {exc}") from exc
    finally:
        if owned:
            handle.close()

    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise ParseError("empty dataset: no header") from None
    if header == ABSOLUTE_HEADER:
        absolute = True
    elif header == DECOMPOSED_HEADER:
        absolute = False
    else:
        raise ParseError(
            f"header {','.join(header)!r} matches neither "
            f"{','.join(ABSOLUTE_HEADER)!r} nor {','.join(DECOMPOSED_HEADER)!r}"
        )

    rejected: list[RejectedRow] = []
    per_day: dict[int, dict[int, float]] = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            sample = _row_to_sample(row, absolute, config.day_offset)
        except (ValueError, InvalidInputError) as exc:
            rejected.append(RejectedRow(line, str(exc)))
            continue
        minutes = per_day.setdefault(sample.d, {})
        if sample.m in minutes:
            rejected.append(RejectedRow(line, f"duplicate timestamp day {sample.d} minute {sample.m}"))
            continue
        minutes[sample.m] = sample.E

    if not per_day:
        raise ParseError("empty dataset: no usable rows")

    days = []
    for d in sorted(per_day):
        items = sorted(per_day[d].items())
        m = np.array([k for k, _ in items], dtype=float)
        e = np.array([v for _, v in items], dtype=float)
        days.append(DailySeries(d, m, e))

    gaps = find_gaps(days, config.cadence_min)
    return ParsedDataset(days, rejected, gaps, hashlib.sha256(text.encode()).hexdigest())


def _row_to_sample(row: list[str], absolute: bool, day_offset: int) -> IrradianceSample:
    expected = 2 if absolute else 3
    if len(row) != expected:
        raise ValueError(f"expected {expected} fields, got {len(row)}")
    values = [float(c) for c in row]
    if not all(math.isfinite(v) for v in values):
        raise ValueError("non-finite value")
    if absolute:
        t_raw = values[0]
        if t_raw != int(t_raw):
            raise ValueError(f"malformed timestamp {row[0]!r}")
        d, m = decompose_time(int(t_raw))
    else:
        d_raw, m_raw = values[0], values[1]
        if d_raw != int(d_raw) or m_raw != int(m_raw) or d_raw < 0:
            raise ValueError(f"malformed timestamp {row[0]!r},{row[1]!r}")
        d, m = int(d_raw), int(m_raw)
        if not 0 <= m < MINUTES_PER_DAY:
            raise ValueError(f"minute {m} outside [0, 1440)")
    E = values[-1]
    if E < 0:
        raise ValueError(f"negative irradiance {E}")
    d += day_offset
    return IrradianceSample(MINUTES_PER_DAY * d + m, d, m, E)


def find_gaps(days: Iterable[DailySeries], cadence_min: float) -> list[Gap]:
    """Spacings longer than 1.5 cadences inside a day are reported as gaps."""
    gaps = []
    for s in days:
        if len(s) < 2:
            continue
        step = np.diff(s.minutes)
        for k in np.flatnonzero(step > 1.5 * cadence_min):
            gaps.append(Gap(
                s.d,
                int(s.minutes[k] + cadence_min),
                int(s.minutes[k + 1] - cadence_min),
            ))
    return gaps


def write_gap_report(gaps: Iterable[Gap], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "first_missing_minute", "last_missing_minute"])
        for g in gaps:
            w.writerow([g.day, g.first_missing_minute, g.last_missing_minute])


def write_series(days: Iterable[DailySeries], path) -> None:
    """Write day series in the decomposed input schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DECOMPOSED_HEADER)
        for s in days:
            for m, e in zip(s.minutes, s.irradiance):
                w.writerow([s.d, int(round(m)), f"{e:.6f}"])
