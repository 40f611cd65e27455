"""
Photovoltaic charge and the box-plot comparison
===============================================

The single-diode model is extracted from the S60PC-250 datasheet, then a
month of simulated days is converted to delivered charge. A "measured" series
is compared with the replicate quartiles.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import numpy as np

from irradsim.modelfile import reference_model
from irradsim.pipeline import replicate_charges, validate
from irradsim.plotting import plot_boxes
from irradsim.pv import S60PC_250, extract_diode_model, iv_current, mpp

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

diode = extract_diode_model(S60PC_250)
print(diode)
print("I(0) =", iv_current(0.0, 1000.0, diode), "A;  MPP at STC:", mpp(1000.0, diode))
for g in (200.0, 500.0, 800.0):
    print(f"  {g:.0f} W/m^2 -> {mpp(g, diode)[2]:.1f} W")

# Stand-in measurements: one independent realisation per day.
model = reference_model()
days = list(range(150, 181))
one = replicate_charges(model, diode, days, 4, seed=77)
measured = {d: float(one[d][0]) for d in days}

res = validate(model, diode, measured, replicates=100, seed=1)
print(f"within-box rate: {res.within_box_rate:.2f}")
print(plot_boxes(res.statistics, out, measured))
print("median charge over the month:", np.median([s.median for s in res.statistics]), "A h")
