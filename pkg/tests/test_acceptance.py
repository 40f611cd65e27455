"""Acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL`` line with the measured value, the
tolerance and the wall time; the lines are printed at the end of the pytest
run (see ``conftest.pytest_terminal_summary``) and also when this file is run
as a script.
"""

import csv
import math
import time

import numpy as np
import pytest

from conftest import parabola_day
from irradsim.cli import main as cli_main
from irradsim.dailyfit import fit_parabola
from irradsim.ingest import DEFAULT_SEASONS, DailySeries, write_series
from irradsim.maps import (
    ColumnData,
    KdeColumn,
    MstarGrid,
    build_discrete_map,
    build_grid,
    freedman_diaconis_bins,
    kde_density,
    scaled_pdm,
)
from irradsim.modelfile import ModelFile, build_model
from irradsim.pipeline import replicate_charges
from irradsim.pv import S60PC_250, daily_charge, extract_diode_model, iv_current, mpp
from irradsim.simulate import (
    expected_exposure,
    replicate_rng,
    simulate_exposure,
    simulate_irradiance,
)
from irradsim.synthetic import generate_year, generator_model, relative_error
from irradsim.trends import (
    REFERENCE_GUMBEL,
    REFERENCE_MEAN_B,
    REFERENCE_TRENDS,
    GumbelParams,
    TrendModel,
    eval_trend,
    fit_gumbel,
    fit_trend,
    gumbel_expected,
    gumbel_pdf,
    rice_bins,
    sample_gumbel,
)

RESULTS: list[str] = []


def report(number: int, title: str, ok: bool, detail: str, elapsed: float, limit: float) -> None:
    in_time = elapsed <= limit
    verdict = "PASS" if ok and in_time else "FAIL"
    line = (f"[{verdict}] criterion {number:2d} {title}: {detail}; "
            f"{elapsed:.3f} s (limit {limit:g} s{'' if in_time else ', exceeded'})")
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def test_01_grid_arithmetic():
    t0 = time.perf_counter()
    g = build_grid(0.8990, 360.0)
    elapsed = time.perf_counter() - t0
    ok = g.J == 64 and g.nodes.size == 65 and g.spacing == 0.03125
    report(1, "grid arithmetic", ok, f"J={g.J}, nodes={g.nodes.size}, spacing={g.spacing}", elapsed, 1e-3)


def test_02_rice_rule():
    t0 = time.perf_counter()
    count, _ = rice_bins(365)
    report(2, "Rice rule", count == 15, f"n=365 -> {count} bins", time.perf_counter() - t0, 1.0)


def _noise_free_model():
    """Reference trends with collapsed Gumbel noise and an all-zero rate map."""
    tiny = 1e-12
    trends = TrendModel(dict(REFERENCE_TRENDS), {k: GumbelParams(0.0, tiny) for k in "ABC"},
                        REFERENCE_MEAN_B)
    grid = build_grid(REFERENCE_MEAN_B)
    cols = ColumnData(grid, [np.zeros(0)] + [np.zeros(1)] * grid.J, [np.zeros(1)] * (grid.J + 1))
    return build_model(trends, {s.id: cols for s in DEFAULT_SEASONS}, h=tiny, h_rstar=tiny)


def test_03_deterministic_reduction():
    t0 = time.perf_counter()
    model = _noise_free_model()
    worst = 0.0
    for d in range(0, 365, 7):
        I = simulate_exposure(replicate_rng(0, d), d, model)
        target = 8.0 * model.trends.trend("B", d) * model.trends.trend("C", d)
        worst = max(worst, abs(I - target) / target)
    report(3, "deterministic reduction", worst <= 1e-9, f"max rel. error {worst:.2e} (tol 1e-9)",
           time.perf_counter() - t0, 1.0)


def test_04_fit_round_trip():
    t0 = time.perf_counter()
    truth = np.array([1.9790, 0.8990, 913.0])
    day = parabola_day(0, *truth)
    p = fit_parabola(day)
    exact = np.max(np.abs(np.array([p.A, p.B, p.C]) - truth) / truth)
    rng = np.random.default_rng(2024)
    E = day.irradiance.copy()
    lit = E > 0
    E[lit] += rng.uniform(-0.01 * truth[2], 0.01 * truth[2], lit.sum())
    q = fit_parabola(DailySeries(0, day.minutes, np.clip(E, 0, None)))
    noisy = np.max(np.abs(np.array([q.A, q.B, q.C]) - truth) / truth)
    report(4, "daily fit round trip", exact <= 1e-9 and noisy <= 0.01,
           f"noiseless {exact:.1e} (tol 1e-9), 1% noise {noisy:.2e} (tol 1e-2)",
           time.perf_counter() - t0, 1.0)


def test_05_trend_round_trip():
    t0 = time.perf_counter()
    c = REFERENCE_TRENDS["B"]
    days = np.arange(365)
    got = fit_trend(days, eval_trend(c, days))
    err = np.max(np.abs(np.array(got.as_tuple()) - np.array(c.as_tuple())))
    report(5, "trend round trip", err <= 1e-10, f"max abs. error {err:.1e} (tol 1e-10)",
           time.perf_counter() - t0, 1.0)


def test_06_gumbel_suite():
    from scipy import integrate, stats

    t0 = time.perf_counter()
    notes, ok = [], True
    for k, p in REFERENCE_GUMBEL.items():
        total = (integrate.quad(gumbel_pdf, -np.inf, p.mu, args=(p,))[0]
                 + integrate.quad(gumbel_pdf, p.mu, p.mu + 40 * p.nu, args=(p,))[0])
        ok &= abs(total - 1) <= 1e-6
        notes.append(f"int_{k}={total:.8f}")
    p = REFERENCE_GUMBEL["B"]
    x = sample_gumbel(np.random.default_rng(1), p, 1_000_000)
    z = (x.mean() - gumbel_expected(p)) / (x.std(ddof=1) / 1000.0)
    ok &= abs(z) < 3
    skew = stats.skew(x)
    ok &= skew < 0
    notes.append(f"mean z={z:+.2f}, skew={skew:.3f}")
    worst = 0.0
    for k, q in REFERENCE_GUMBEL.items():
        f = fit_gumbel(sample_gumbel(np.random.default_rng(10), q, 100_000))
        worst = max(worst, abs(f.mu - q.mu) / q.mu, abs(f.nu - q.nu) / q.nu)
    ok &= worst <= 0.02
    notes.append(f"fit worst rel. error {worst:.4f} (tol 0.02)")
    report(6, "Gumbel suite", bool(ok), ", ".join(notes), time.perf_counter() - t0, 30.0)


def test_07_kde_suite(ref_model):
    t0 = time.perf_counter()
    worst = 0.0
    top = 0.0
    for sm in ref_model.maps.values():
        for j in range(ref_model.grid.J + 1):
            col = sm.rates.column(j)
            worst = max(worst, abs(np.trapezoid(col.density, col.x) - 1.0))
        _, vals = scaled_pdm(sm.rates)
        top = max(top, vals.max())
        low = vals.min()
    h = 0.0364
    single = KdeColumn.build([0.25], h)
    peak = kde_density(single.samples, h, 0.25)
    exact_peak = 1.0 / (h * math.sqrt(2.0 * math.pi))
    ok = worst <= 1e-4 and 0.0 <= low and top <= 1.0 and peak == pytest.approx(exact_peak, rel=1e-15)
    report(7, "KDE suite", ok,
           f"max |int f - 1| {worst:.1e}, scaled range [{low:.3f}, {top:.4f}], peak {peak:.6f} vs {exact_peak:.6f}",
           time.perf_counter() - t0, 10.0)


def test_08_discrete_columns_sum_to_one():
    t0 = time.perf_counter()
    grid = MstarGrid(64)
    rng = np.random.default_rng(8)
    cols = [np.zeros(0)] + [rng.laplace(0, 0.05 + 0.1 * rng.random(), rng.integers(5, 400))
                            for _ in range(grid.J)]
    dmap = build_discrete_map(cols, grid, freedman_diaconis_bins(cols))
    sums = dmap.mass[1:].sum(axis=1)
    err = np.max(np.abs(sums - 1.0))
    report(8, "discrete map normalisation", err <= 1e-12, f"max |sum - 1| {err:.1e} (tol 1e-12)",
           time.perf_counter() - t0, 5.0)


def test_09_expectation_law(ref_model):
    t0 = time.perf_counter()
    zs = []
    for d in (90, 180, 270, 360):
        I = simulate_exposure(replicate_rng(9, d), d, ref_model, size=10_000)
        zs.append((I.mean() - expected_exposure(d, ref_model)) / (I.std(ddof=1) / 100.0))
    ok = all(abs(z) < 3 for z in zs)
    report(9, "expectation law", ok, "z = " + ", ".join(f"{z:+.2f}" for z in zs) + " (|z| < 3)",
           time.perf_counter() - t0, 60.0)


def test_10_route_consistency(ref_model):
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(100):
        d = (37 * k) % 365
        I = simulate_exposure(replicate_rng(10, d, k), d, ref_model)
        sim = simulate_irradiance(replicate_rng(10, d, k), d, ref_model)
        worst = max(worst, abs(I - sim.exposure) / I)
    report(10, "route consistency", worst <= 0.005, f"max rel. difference {worst:.2e} (tol 5e-3)",
           time.perf_counter() - t0, 30.0)


def test_11_pv_anchors():
    t0 = time.perf_counter()
    diode = extract_diode_model(S60PC_250)
    isc = iv_current(0.0, 1000.0, diode)
    ioc = iv_current(36.3, 1000.0, diode)
    _, _, p = mpp(1000.0, diode)
    q = daily_charge(np.linspace(0, 60, 61), np.full(61, 1000.0), diode)
    ok = (abs(isc - 8.71) / 8.71 <= 1e-3 and abs(ioc) <= 1e-3 * 8.71
          and abs(p - 250) / 250 <= 0.02 and abs(q - 8.17) / 8.17 <= 0.02)
    report(11, "PV anchors", ok,
           f"I(0)={isc:.4f} A, I(36.3)={ioc:.1e} A, Pmpp={p:.2f} W, 1 h charge={q:.3f} A h",
           time.perf_counter() - t0, 5.0)


def test_12_end_to_end(tmp_path):
    """Fit a synthetic year through the CLI, then validate against the generator's medians."""
    t0 = time.perf_counter()
    gen = generator_model()
    write_series(generate_year(gen, seed=12), tmp_path / "year.csv")
    assert cli_main(["fit", str(tmp_path / "year.csv"), "--output-dir", str(tmp_path / "fit")]) == 0
    fitted = ModelFile.load(tmp_path / "fit" / "model.json")
    errors = {k: relative_error(fitted.trends.trends[k].as_tuple(), gen.trends.trends[k].as_tuple())
              for k in "ABC"}

    diode = extract_diode_model(S60PC_250)
    days = list(range(365))
    truth = replicate_charges(gen, diode, days, 100, seed=1200)
    with open(tmp_path / "measured.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "charge_ah"])
        for d in days:
            w.writerow([d, f"{np.median(truth[d]):.6f}"])
    assert cli_main(["validate", "--model", str(tmp_path / "fit" / "model.json"),
                     "--measured", str(tmp_path / "measured.csv"), "--replicates", "100",
                     "--seed", "1201", "--output-dir", str(tmp_path / "val")]) == 0
    with open(tmp_path / "val" / "comparison.csv", newline="") as fh:
        inside = [r["within_box"] == "1" for r in csv.DictReader(fh)]
    rate = float(np.mean(inside))
    ok = max(errors.values()) <= 0.02 and rate > 0.5
    detail = ("trend vector rel. errors " + ", ".join(f"{k} {v:.4f}" for k, v in errors.items())
              + f" (tol 0.02); within-box rate {rate:.3f} over {len(inside)} days (> 0.5)")
    report(12, "end-to-end synthetic reproduction", ok, detail, time.perf_counter() - t0, 300.0)


def test_13_determinism(tmp_path):
    t0 = time.perf_counter()
    args = ["simulate", "--seed", "13", "--day", "0-29", "--replicates", "3"]
    assert cli_main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    assert cli_main(args + ["--output-dir", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = all((tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names)
    report(13, "determinism", same and len(names) == 7, f"{len(names)} CSV files byte-identical: {same}",
           time.perf_counter() - t0, 10.0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
