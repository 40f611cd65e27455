"""Command line entry point: ``irradsim fit | simulate | validate | plot``.

Options may also come from a JSON config file (``--config`` or the
``IRRADSIM_CONFIG`` environment variable). Keys are the long option names
with dashes replaced by underscores; flags given on the command line win.
Each failing stage exits with its own code (see ``EXIT_CODES``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .dailyfit import read_params, write_params
from .errors import AlignmentError, InvalidInputError, IrradsimError
from .ingest import (
    DEFAULT_SEASONS,
    ParsedDataset,
    SchemaConfig,
    Season,
    find_gaps,
    parse_dataset,
    write_gap_report,
    write_series,
)
from .maps import scaled_pdm, write_map_csv
from .modelfile import ModelFile, reference_model
from .pipeline import StageError, fit_model, validate
from .pv import PanelSpec, extract_diode_model, read_statistics, write_statistics
from .simulate import expected_exposure, normalize_day, radiant_exposure, replicate_rng, simulate_irradiance
from .smoothing import TmaConfig
from .trends import PARAMETERS, residual_histogram, write_histogram

log = logging.getLogger("irradsim")

CONFIG_ENV = "IRRADSIM_CONFIG"

EXIT_CODES = {
    "config": 3,
    "ingest": 4,
    "smoothing": 5,
    "daily-fit": 6,
    "long-term-trends": 7,
    "residual-maps": 8,
    "model-file": 9,
    "stochastic-sim": 10,
    "pv-validation": 11,
    "plot": 12,
}

DEFAULTS = {
    "output_dir": ".",
    "m_c": 360.0,
    "tma_n": 5,
    "tma_l": 4,
    "cadence_min": 10.0,
    "seed": 0,
    "day": "0-364",
    "replicates": 1,
    "series": 8,
    "season": 1,
    "model": None,
    "panel": None,
    "seasons": None,
}


_DAY_RANGE = re.compile(r"(-?\d+)(?:-(-?\d+))?")


class ConfigError(IrradsimError):
    stage = "config"


def parse_days(text: str) -> list[int]:
    """``"0-29,90"`` -> [0, 1, ..., 29, 90]; days outside 0..364 wrap with a warning."""
    days = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        m = _DAY_RANGE.fullmatch(part)
        if m is None:
            raise ConfigError(f"bad --day value {text!r}: cannot read {part!r}")
        lo = int(m.group(1))
        hi = lo if m.group(2) is None else int(m.group(2))
        if hi < lo:
            raise ConfigError(f"bad --day value {text!r}: empty range {part!r}")
        days.extend(range(lo, hi + 1))
    if not days:
        raise ConfigError("--day selects no day")
    out = []
    for d in days:
        d = normalize_day(d)
        if d not in out:
            out.append(d)
    return out


def load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return doc


def resolve(args: argparse.Namespace, config: dict) -> argparse.Namespace:
    """Fill unset options from the config file, then from the defaults."""
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    if getattr(args, "inputs", None) == [] and "inputs" in config:
        args.inputs = list(config["inputs"])
    if getattr(args, "measured", None) is None and "measured" in config:
        args.measured = config["measured"]
    return args


def _seasons(spec) -> tuple[Season, ...]:
    if spec is None:
        return DEFAULT_SEASONS
    try:
        return tuple(Season(int(s[0]), int(s[1]), int(s[2])) for s in spec)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"seasons must be [[id, from_day, to_day], ...]: {exc}") from exc


def _load_model(path) -> ModelFile:
    if path is None or path == "reference":
        log.info("using the reference default model")
        return reference_model()
    return ModelFile.load(path)


def _load_panel(path) -> PanelSpec:
    if path is None:
        ref = resources.files("irradsim") / "data" / "s60pc_250.json"
        with resources.as_file(ref) as p:
            return PanelSpec.load(p)
    try:
        return PanelSpec.load(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read panel spec {path}: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- fit -----------------------------------------------------------------------


def _read_inputs(paths, cadence: float) -> ParsedDataset:
    if not paths:
        raise InvalidInputError("no input file given")
    parts = [parse_dataset(p, SchemaConfig(cadence_min=cadence)) for p in paths]
    days, seen = [], set()
    for part in parts:
        for s in part.days:
            if s.d in seen:
                raise InvalidInputError(f"day {s.d} appears in more than one input file")
            seen.add(s.d)
            days.append(s)
    days.sort(key=lambda s: s.d)
    rejected = [r for p in parts for r in p.rejected]
    gaps = [g for p in parts for g in p.gaps]
    sha = parts[0].sha256 if len(parts) == 1 else ",".join(p.sha256 for p in parts)
    return ParsedDataset(days, rejected, gaps, sha)


def cmd_fit(args) -> int:
    out = _out_dir(args)
    seasons = _seasons(args.seasons)
    try:
        tma = TmaConfig(int(args.tma_n), int(args.tma_l), float(args.cadence_min))
    except (InvalidInputError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    dataset = _read_inputs(args.inputs, float(args.cadence_min))
    for r in dataset.rejected:
        log.warning("line %d rejected: %s", r.line, r.reason)
    write_gap_report(dataset.gaps or find_gaps(dataset.days, float(args.cadence_min)),
                     out / "gaps.csv")
    result = fit_model(dataset, float(args.m_c), tma, seasons)
    model = result.model
    model.save(out / "model.json")
    write_series(result.smoothed, out / "smoothed.csv")
    write_params(result.params, out / "fit_params.csv")
    for name in PARAMETERS:
        rows = residual_histogram(result.trend_residuals[name], model.trends.residuals[name])
        write_histogram(rows, out / f"hist_{name}.csv")
    for sid, sm in sorted(model.maps.items()):
        d = sm.discrete
        centers = 0.5 * (d.edges[:-1] + d.edges[1:])
        write_map_csv(out / f"discrete_s{sid}.csv", d.grid.nodes, centers, d.mass)
        r, values = scaled_pdm(sm.rates)
        write_map_csv(out / f"pdm_s{sid}.csv", sm.rates.grid.nodes, r, values)
    log.info("fitted %d days (%d skipped); model written to %s",
             len(result.params), len(result.skipped), out / "model.json")
    return 0


# -- simulate ------------------------------------------------------------------


def _write_irradiance(path: Path, days) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "minute", "irradiance_wm2"])
        for sim in days:
            for m, e in zip(sim.minutes, sim.irradiance):
                w.writerow([sim.d, f"{m:g}", f"{e:.4f}"])


def _write_exposure(path: Path, pairs, column: str = "exposure_whm2") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", column])
        for d, v in pairs:
            w.writerow([d, f"{v:.4f}"])


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    model = _load_model(args.model)
    days = parse_days(args.day)
    reps = int(args.replicates)
    if reps < 1:
        raise ConfigError("--replicates must be at least 1")
    cadence = float(args.cadence_min)
    for k in range(reps):
        sims = [simulate_irradiance(replicate_rng(args.seed, d, k), d, model, cadence) for d in days]
        suffix = "" if reps == 1 else f"_r{k:03d}"
        _write_irradiance(out / f"irradiance{suffix}.csv", sims)
        _write_exposure(out / f"exposure{suffix}.csv",
                        [(s.d, radiant_exposure(s.minutes, s.irradiance)) for s in sims])
    _write_exposure(out / "expected_exposure.csv",
                    [(d, expected_exposure(d, model)) for d in days])
    log.info("simulated %d days x %d replicates into %s", len(days), reps, out)
    return 0


# -- validate ------------------------------------------------------------------


def read_measured(path) -> dict[int, float]:
    """CSV ``day,charge_ah``."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        out = {}
        for r in rows:
            d = int(r["day"])
            if d in out:
                raise InvalidInputError(f"day {d} measured twice")
            out[d] = float(r["charge_ah"])
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: expected columns day,charge_ah ({exc})") from exc
    if not out:
        raise InvalidInputError(f"{path} holds no measurement")
    return out


def cmd_validate(args) -> int:
    out = _out_dir(args)
    if args.measured is None:
        raise ConfigError("--measured is required")
    model = _load_model(args.model)
    measured = read_measured(args.measured)
    if args.day_given:
        wanted = set(parse_days(args.day))
        if wanted != set(measured):
            raise AlignmentError(
                f"--day selects {len(wanted)} days but the measured file covers "
                f"{len(measured)}; missing {sorted(wanted - set(measured))[:5]}, "
                f"extra {sorted(set(measured) - wanted)[:5]}"
            )
    for d in measured:
        if not 0 <= d < 365:
            raise AlignmentError(f"measured day {d} is outside 0..364")
    diode = extract_diode_model(_load_panel(args.panel))
    reps = int(args.replicates) if args.replicates_given else 100
    res = validate(model, diode, measured, reps, int(args.seed), float(args.cadence_min),
                   int(args.series))
    write_statistics(res.statistics, out / "charge_statistics.csv")
    inside = res.within_box
    with open(out / "comparison.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "measured_ah", "q1", "median", "q3", "within_box"])
        for s in res.statistics:
            w.writerow([s.day, f"{measured[s.day]:.6f}", f"{s.q1:.6f}", f"{s.median:.6f}",
                        f"{s.q3:.6f}", int(inside[s.day])])
    with open(out / "replicate_charges.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "replicate", "charge_ah"])
        for d in sorted(res.charges):
            for k, q in enumerate(res.charges[d]):
                w.writerow([d, k, f"{q:.6f}"])
    log.info("within-box rate %.1f%% over %d days", 100 * res.within_box_rate, len(measured))
    print(f"within_box_rate={res.within_box_rate:.4f}")
    return 0


# -- plot ----------------------------------------------------------------------


def _read_comparison(path: Path) -> dict[int, float]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {int(r["day"]): float(r["measured_ah"]) for r in csv.DictReader(fh)}


def _read_exposure(path) -> dict[int, float]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {int(r["day"]): float(r["exposure_whm2"]) for r in csv.DictReader(fh)}


def cmd_plot(args) -> int:
    from . import plotting

    out = _out_dir(args)
    artifact = args.artifact
    if artifact != "reference" and not Path(artifact).exists():
        raise PlotError(f"artifact {artifact} does not exist")
    kind = args.kind
    if kind in ("pdm", "discrete", "exposure"):
        model = _load_model(artifact)
        if kind == "exposure":
            sim = _read_exposure(args.simulated) if args.simulated else None
            paths = plotting.plot_exposure(model, out, sim)
        else:
            season = int(args.season)
            if season not in model.maps:
                raise PlotError(f"model has no season {season}")
            fn = plotting.plot_pdm if kind == "pdm" else plotting.plot_discrete
            paths = fn(model, season, out)
    elif kind == "boxes":
        stats = read_statistics(artifact)
        replicates = Path(artifact).with_name("replicate_charges.csv")
        if replicates.exists():
            # outliers are not kept in the statistics table; recover them
            from .pv import charge_statistics

            with open(replicates, newline="", encoding="utf-8") as fh:
                per_day: dict[int, list[float]] = {}
                for r in csv.DictReader(fh):
                    per_day.setdefault(int(r["day"]), []).append(float(r["charge_ah"]))
            stats = [charge_statistics(per_day[s.day], s.day) if s.day in per_day else s
                     for s in stats]
        comparison = Path(artifact).with_name("comparison.csv")
        measured = _read_comparison(comparison) if comparison.exists() else None
        paths = plotting.plot_boxes(stats, out, measured)
    elif kind == "params":
        model = _load_model(args.model) if args.model else None
        paths = plotting.plot_params(read_params(artifact), out, model)
    else:
        raise PlotError(f"unknown plot kind {kind!r}")
    for p in paths:
        print(p)
    return 0


class PlotError(IrradsimError):
    stage = "plot"


# -- argument parsing ----------------------------------------------------------


class _Marked(argparse.Action):
    """Store the value and remember that the flag was given."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        setattr(namespace, self.dest + "_given", True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--output-dir", help="directory for the outputs (default: .)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="irradsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", parents=[common], help="fit a model to measured irradiance")
    f.add_argument("inputs", nargs="*", help="irradiance CSV files")
    f.add_argument("--m-c", type=float)
    f.add_argument("--tma-n", type=int)
    f.add_argument("--tma-l", type=int)
    f.add_argument("--cadence-min", type=float)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", parents=[common], help="simulate irradiance and exposure")
    s.add_argument("--model", help="model JSON (default: reference model)")
    s.add_argument("--seed", type=int)
    s.add_argument("--day", help="days, e.g. 0-29,90 (default: 0-364)")
    s.add_argument("--replicates", type=int)
    s.add_argument("--cadence-min", type=float)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", parents=[common], help="compare measured charge with simulations")
    v.add_argument("--model", help="model JSON (default: reference model)")
    v.add_argument("--panel", help="panel spec JSON (default: S60PC-250)")
    v.add_argument("--measured", help="CSV day,charge_ah")
    v.add_argument("--replicates", type=int, action=_Marked, help="default 100")
    v.add_argument("--seed", type=int)
    v.add_argument("--day", action=_Marked, help="days expected in the measured file")
    v.add_argument("--series", type=int, help="panels in series (default 8)")
    v.add_argument("--cadence-min", type=float)
    v.set_defaults(func=cmd_validate)

    pl = sub.add_parser("plot", parents=[common], help="render an SVG and its CSV")
    pl.add_argument("artifact", help="model JSON, charge_statistics.csv or fit_params.csv")
    pl.add_argument("--kind", required=True, choices=("pdm", "discrete", "exposure", "boxes", "params"))
    pl.add_argument("--season", type=int)
    pl.add_argument("--model", help="model JSON drawn over fit_params (kind=params)")
    pl.add_argument("--simulated", help="exposure.csv drawn over the expectation (kind=exposure)")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    for flag in ("day", "replicates"):
        if not hasattr(args, flag + "_given"):
            setattr(args, flag + "_given", False)
    try:
        config = load_config(args.config)
        if args.replicates_given is False and "replicates" in config:
            args.replicates_given = True
        resolve(args, config)
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.stage, 1)
    except IrradsimError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.stage, 1)
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
