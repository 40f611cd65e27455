"""
Reading irradiance records and smoothing them across days
=========================================================

A synthetic year is written in the decomposed CSV layout, read back,
checked for gaps and smoothed with the trimmed moving average.
"""

import io
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from irradsim.ingest import decompose_time, find_gaps, parse_dataset, season_of, write_series
from irradsim.smoothing import TmaConfig, trimmed_moving_average
from irradsim.synthetic import generate_year, generator_model

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

# Absolute minutes split into (day, minute-of-day); seasons come from the day.
print(decompose_time(1440 * 90 + 700), "season", season_of(90))

# A year of 10-minute data from a known model, with one sample knocked out.
days = generate_year(generator_model(noise_scale=1.0), seed=1)
d = days[40]
days[40] = type(d)(d.d, np.delete(d.minutes, 70), np.delete(d.irradiance, 70))
write_series(days, out / "year.csv")

ds = parse_dataset(out / "year.csv")
print(len(ds.days), "days,", len(ds.rejected), "rejected rows, gaps:", find_gaps(ds.days, 10.0))

# Rows with negative irradiance are skipped and reported, the rest is kept.
bad = parse_dataset(io.StringIO("t_min,irradiance_wm2\n600,100\n610,-5\n620,130\n"))
print(bad.rejected)

# Smoothing day 200 with the default window (N=5 neighbours each side,
# the 4 dimmest days dropped) against the untrimmed mean.
trim = trimmed_moving_average(ds.days, 200)
plain = trimmed_moving_average(ds.days, 200, TmaConfig(5, 0))
raw = ds.by_day()[200]

fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(raw.minutes, raw.irradiance, lw=0.8, label="day 200")
ax.plot(plain.minutes, plain.irradiance, label="mean of 11 days")
ax.plot(trim.minutes, trim.irradiance, label="trimmed mean (L=4)")
ax.set_xlabel("minute of day")
ax.set_ylabel("W/m^2")
ax.legend()
fig.savefig(out / "01_smoothing.svg")
