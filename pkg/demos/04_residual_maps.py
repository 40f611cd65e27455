"""
Rate maps on the normalised daytime grid
========================================

Residuals are sampled on a grid of J+1 nodes across the normalised daytime.
Their finite differences (rates) are collected per node and per season and
turned into a binned probability map and a Gaussian kernel density map.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from irradsim.ingest import ParsedDataset
from irradsim.maps import scaled_pdm
from irradsim.pipeline import fit_model
from irradsim.synthetic import generate_year, generator_model

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

gen = generator_model(noise_scale=1.0, rate_width=0.05, h=0.02)
result = fit_model(ParsedDataset(generate_year(gen, seed=4)))
model = result.model
print(f"J={model.grid.J}, bandwidth h={model.h:.4f}, bins M_r={model.binning.M_r}")

season = model.maps[2]
r, dens = scaled_pdm(season.rates)
d = season.discrete
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
ax1.pcolormesh(d.grid.nodes, 0.5 * (d.edges[1:] + d.edges[:-1]), d.mass.T, shading="nearest")
ax1.set_title("binned probability, season 2")
ax2.pcolormesh(season.rates.grid.nodes, r, dens.T, shading="nearest")
ax2.set_title("h * kernel density, season 2")
for ax in (ax1, ax2):
    ax.set_xlabel("m*")
    ax.set_ylabel("r*")
fig.savefig(out / "04_maps.svg")

lo, hi = season.envelope
print("allowed R* at noon:", lo[model.grid.J // 2], hi[model.grid.J // 2])
