"""
Parabola fit of a smoothed day and the normalised residuals
===========================================================

Each smoothed day is summarised by a vertex time A, a half-daytime B and a
peak C (A and B in units of m_c = 360 minutes). Normalising both axes by
those parameters folds every day onto the same curve ``-m*^2``; what is left
over is the residual R*.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from irradsim.dailyfit import daytime_bounds, fit_parabola, normalize, residuals
from irradsim.smoothing import smooth_dataset
from irradsim.synthetic import generate_year, generator_model

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

raw = generate_year(generator_model(noise_scale=1.0, rate_width=0.05, h=0.02), seed=2)
smoothed, _ = smooth_dataset(raw)

p = fit_parabola(smoothed[100])
print(p, "sunrise/nightfall (min):", daytime_bounds(p))

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for day in (10, 100, 200, 300):
    p = fit_parabola(smoothed[day])
    ns = normalize(raw[day], p)
    lit = ns.in_daytime
    ax1.plot(raw[day].minutes, raw[day].irradiance, lw=0.8, label=f"day {day}")
    ax2.plot(ns.m_star[lit], ns.E_star[lit], ".", ms=2)
    r = residuals(ns)
    print(f"day {day}: A={p.A:.4f} B={p.B:.4f} C={p.C:.1f}  mean R*={r.R_star.mean():+.4f}")
m = np.linspace(-1, 1, 101)
ax2.plot(m, -m * m, "k-", lw=1)
ax1.set_xlabel("minute of day")
ax1.legend()
ax2.set_xlabel("m*")
ax2.set_ylabel("E*")
fig.savefig(out / "02_normalised.svg")
