"""
Single-diode photovoltaic model, datasheet extraction and daily charge.

The panel obeys the implicit five-parameter equation

    I = I_ph - I_0 [exp((V + I R_s) / a) - 1] - (V + I R_s) / R_sh

with ``a = n N_cells k T / q``. The photocurrent scales linearly with
irradiance. The five parameters are solved from the datasheet points
(short circuit, open circuit, maximum power and zero power slope there) plus
the usual condition that the I-V slope at short circuit is ``-1/R_sh``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import constants, optimize
from scipy.integrate import trapezoid

from .errors import ExtractionError, InvalidInputError, StatisticsError

T_REF_C = 25.0
G_REF = 1000.0
BANDGAP_EV = 1.121
SERIES_PANELS = 8


def thermal_voltage(temp_c: float = T_REF_C) -> float:
    return constants.k * (temp_c + 273.15) / constants.e


@dataclass(frozen=True)
class PanelSpec:
    """Datasheet values of one module at STC."""

    stc_power_w: float
    ptc_power_w: float
    noct_c: float
    power_per_area: float
    peak_efficiency: float
    n_cells: int
    i_mp_a: float
    v_mp_v: float
    i_sc_a: float
    v_oc_v: float

    def __post_init__(self):
        if not 0 < self.i_mp_a < self.i_sc_a:
            raise InvalidInputError(f"need 0 < Imp ({self.i_mp_a}) < Isc ({self.i_sc_a})")
        if not 0 < self.v_mp_v < self.v_oc_v:
            raise InvalidInputError(f"need 0 < Vmp ({self.v_mp_v}) < Voc ({self.v_oc_v})")
        if self.i_mp_a * self.v_mp_v > 1.01 * self.stc_power_w:
            raise InvalidInputError("Imp * Vmp exceeds the STC power")
        if self.n_cells < 1:
            raise InvalidInputError("need at least one cell")

    @classmethod
    def load(cls, path) -> "PanelSpec":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            return cls(**{k: doc[k] for k in cls.__dataclass_fields__})
        except KeyError as exc:
            raise InvalidInputError(f"panel spec {path} lacks field {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")


# Solartec S60PC-250 datasheet
S60PC_250 = PanelSpec(
    stc_power_w=250.0,
    ptc_power_w=226.47,
    noct_c=45.0,
    power_per_area=153.7,
    peak_efficiency=15.39,
    n_cells=60,
    i_mp_a=8.17,
    v_mp_v=30.60,
    i_sc_a=8.71,
    v_oc_v=36.3,
)


@dataclass(frozen=True)
class DiodeModel:
    i_ph_ref: float
    i_0: float
    n: float
    r_s: float
    r_sh: float
    n_cells: int
    v_oc_ref: float = field(default=0.0)

    def __post_init__(self):
        for name in ("i_ph_ref", "i_0", "n", "r_s", "r_sh"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"diode parameter {name} must be positive")

    def a(self, temp_c: float = T_REF_C) -> float:
        return self.n * self.n_cells * thermal_voltage(temp_c)

    def saturation_current(self, temp_c: float = T_REF_C) -> float:
        t, tr = temp_c + 273.15, T_REF_C + 273.15
        eg = BANDGAP_EV * constants.e / constants.k
        return self.i_0 * (t / tr) ** 3 * np.exp(eg * (1.0 / tr - 1.0 / t))


def _diode_terms(v, i, i_ph, i_0, a, r_s, r_sh):
    x = np.minimum((v + i * r_s) / a, 700.0)
    e = np.exp(x)
    f = i_ph - i_0 * (e - 1.0) - (v + i * r_s) / r_sh - i
    df = -i_0 * e * r_s / a - r_s / r_sh - 1.0
    return f, df


def _solve_current(v, i_ph, i_0, a, r_s, r_sh, tol=1e-12, max_iter=100):
    """Newton from I = I_ph (monotone for this concave residual), bisection fallback."""
    v, i_ph = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(i_ph, dtype=float))
    v, i_ph = v.copy(), i_ph.copy()
    i = i_ph.copy()
    for _ in range(max_iter):
        f, df = _diode_terms(v, i, i_ph, i_0, a, r_s, r_sh)
        step = f / df
        i = i - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(i))):
            break
    f, _ = _diode_terms(v, i, i_ph, i_0, a, r_s, r_sh)
    bad = ~(np.abs(f) <= 1e-10) | ~np.isfinite(i)
    if bad.any():
        i[bad] = _bisect_current(v[bad], i_ph[bad], i_0, a, r_s, r_sh)
    return i


def _bisect_current(v, i_ph, i_0, a, r_s, r_sh):
    lo = -v / r_s  # residual > 0 here
    hi = i_ph.copy()  # residual <= 0 here
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f, _ = _diode_terms(v, mid, i_ph, i_0, a, r_s, r_sh)
        pos = f > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)


def iv_current(v, g, model: DiodeModel, temp_c: float = T_REF_C):
    """Panel current (A) at voltage ``v`` and irradiance ``g`` (W/m^2)."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise InvalidInputError("irradiance must be non-negative")
    i_ph = model.i_ph_ref * g / G_REF
    i = _solve_current(v, i_ph, model.saturation_current(temp_c), model.a(temp_c), model.r_s, model.r_sh)
    return float(i) if i.ndim == 0 else i


def iv_residual(v, i, g, model: DiodeModel, temp_c: float = T_REF_C):
    """Left-hand minus right-hand side of the diode equation."""
    f, _ = _diode_terms(np.asarray(v, float), np.asarray(i, float), model.i_ph_ref * np.asarray(g) / G_REF,
                        model.saturation_current(temp_c), model.a(temp_c), model.r_s, model.r_sh)
    return f


def extract_diode_model(spec: PanelSpec, temp_c: float = T_REF_C) -> DiodeModel:
    """Solve the five parameters from the datasheet anchors.

    Initial guesses: ``n = 1.3``, ``R_s = 0.2 (V_oc - V_mp) / I_mp``,
    ``R_sh = 100 V_oc / I_sc``, ``I_0`` from the open-circuit condition.
    """
    vt = thermal_voltage(temp_c)
    isc, voc, imp, vmp = spec.i_sc_a, spec.v_oc_v, spec.i_mp_a, spec.v_mp_v

    def equations(p):
        i_ph, log_i0, a, r_s, log_rsh = p
        i_0, r_sh = np.exp(log_i0), np.exp(log_rsh)
        sc = i_ph - i_0 * np.expm1(isc * r_s / a) - isc * r_s / r_sh - isc
        oc = i_ph - i_0 * np.expm1(voc / a) - voc / r_sh
        mp = i_ph - i_0 * np.expm1((vmp + imp * r_s) / a) - (vmp + imp * r_s) / r_sh - imp
        g_mp = i_0 / a * np.exp((vmp + imp * r_s) / a) + 1.0 / r_sh
        dp = imp - vmp * g_mp / (1.0 + r_s * g_mp)
        g_sc = i_0 / a * np.exp(isc * r_s / a) + 1.0 / r_sh
        slope = (1.0 / r_sh - g_sc / (1.0 + r_s * g_sc)) * r_sh
        return [sc, oc, mp, dp, slope]

    a0 = 1.3 * spec.n_cells * vt
    x0 = [isc, np.log(isc / np.expm1(voc / a0)), a0, 0.2 * (voc - vmp) / imp, np.log(100.0 * voc / isc)]
    sol = optimize.root(equations, x0, method="hybr")
    i_ph, log_i0, a, r_s, log_rsh = sol.x
    if not sol.success or not (r_s > 0 and a > 0 and i_ph > 0):
        raise ExtractionError(f"datasheet extraction did not converge: {sol.message}; x={sol.x}")
    model = DiodeModel(float(i_ph), float(np.exp(log_i0)), float(a / (spec.n_cells * vt)),
                       float(r_s), float(np.exp(log_rsh)), spec.n_cells, voc)

    checks = {
        "short circuit": abs(iv_current(0.0, G_REF, model, temp_c) - isc) / isc <= 1e-3,
        "open circuit": abs(iv_current(voc, G_REF, model, temp_c)) <= 1e-3 * isc,
    }
    v, i, p = mpp(G_REF, model, temp_c)
    checks["maximum power point"] = abs(v - vmp) / vmp <= 0.01 and abs(i - imp) / imp <= 0.01
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise ExtractionError(f"extracted model misses anchors: {', '.join(failed)}")
    return model


def mpp(g, model: DiodeModel, temp_c: float = T_REF_C, tol: float = 1e-9):
    """Maximum power point ``(v, i, p)`` by golden-section search on P(V).

    Works elementwise on array ``g``; zero irradiance gives (0, 0, 0).
    """
    g = np.asarray(g, dtype=float)
    scalar = g.ndim == 0
    g = np.atleast_1d(g)
    lit = g > 0
    if not lit.all():
        v, i, p = (np.zeros_like(g) for _ in range(3))
        if lit.any():
            v[lit], i[lit], p[lit] = mpp(g[lit], model, temp_c, tol)
        return (float(v[0]), float(i[0]), float(p[0])) if scalar else (v, i, p)
    i_0, a = model.saturation_current(temp_c), model.a(temp_c)
    i_ph = model.i_ph_ref * g / G_REF
    v_top = 1.1 * (model.v_oc_ref or model.n_cells * 0.7)
    lo = np.zeros_like(g)
    hi = np.full_like(g, v_top)
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0

    def power(v):
        return v * _solve_current(v, i_ph, i_0, a, model.r_s, model.r_sh)

    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    pc, pd = power(c), power(d)
    while np.max(hi - lo) > tol:
        left = pc > pd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        x = np.where(left, hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo))
        px = power(x)
        # the surviving interior point is reused, only ``x`` is new
        c, d, pc, pd = (
            np.where(left, x, d),
            np.where(left, c, x),
            np.where(left, px, pd),
            np.where(left, pc, px),
        )
    v = 0.5 * (lo + hi)
    i = _solve_current(v, i_ph, i_0, a, model.r_s, model.r_sh)
    p = v * i
    if scalar:
        return float(v[0]), float(i[0]), float(p[0])
    return v, i, p


def daily_charge(minutes, irradiance, model: DiodeModel, n_series: int = SERIES_PANELS,
                 temp_c: float = T_REF_C, tol: float = 1e-6):
    """Charge in A h delivered at the maximum power point over one day.

    A series string carries one panel's current, so ``n_series`` only scales
    the voltage (and power), not the charge. A 2-D ``irradiance`` (one day per
    row) gives one charge per row. ``tol`` is the MPP voltage tolerance.
    """
    if n_series < 1:
        raise InvalidInputError("need at least one panel in the string")
    g = np.clip(np.asarray(irradiance, dtype=float), 0.0, None)
    _, i, _ = mpp(g, model, temp_c, tol)
    q = trapezoid(np.asarray(i), np.asarray(minutes, dtype=float), axis=-1) / 60.0
    return float(q) if np.ndim(q) == 0 else q


@dataclass
class ChargeStatistics:
    day: int
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: list[float]

    @property
    def n_outliers(self) -> int:
        return len(self.outliers)

    def contains(self, value: float) -> bool:
        return self.q1 <= value <= self.q3


def charge_statistics(charges: Sequence[float], day: int = 0) -> ChargeStatistics:
    """Box statistics of replicate charges: quartiles by linear interpolation,
    whiskers over the full range, outliers beyond 1.5 IQR from the box."""
    x = np.asarray(charges, dtype=float)
    if x.size < 4:
        raise StatisticsError(f"day {day}: {x.size} replicates, need at least 4")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    out = x[(x < q1 - 1.5 * iqr) | (x > q3 + 1.5 * iqr)]
    return ChargeStatistics(day, float(q1), float(med), float(q3), float(x.min()), float(x.max()),
                            sorted(map(float, out)))


def write_statistics(stats: Sequence[ChargeStatistics], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "q1", "median", "q3", "whisker_low", "whisker_high", "n_outliers"])
        for s in stats:
            w.writerow([s.day, f"{s.q1:.6f}", f"{s.median:.6f}", f"{s.q3:.6f}",
                        f"{s.whisker_low:.6f}", f"{s.whisker_high:.6f}", s.n_outliers])


def read_statistics(path) -> list[ChargeStatistics]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            ChargeStatistics(int(r["day"]), float(r["q1"]), float(r["median"]), float(r["q3"]),
                             float(r["whisker_low"]), float(r["whisker_high"]), [])
            for r in csv.DictReader(fh)
        ]
