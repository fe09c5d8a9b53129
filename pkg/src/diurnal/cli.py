"""Command line driver for the analysis pipeline.

Subcommands mirror the processing stages:

    synth -> impute -> aggregate -> trend -> contour
                              \\-> cluster -> radar
                               \\-> dcor

Every option can also be supplied through a config file of ``key=value``
lines (``--config PATH``); a flag given on the command line wins over the
file, and the file wins over the built-in default. Config keys are the long
option names without the leading dashes.

Exit status: 0 on success, 1 for usage or pipeline errors, 2 for I/O
failures.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from types import SimpleNamespace
from typing import Callable, Mapping, Sequence

import numpy as np

from ._util import fmt, parse_bool
from .aggregate import (
    SCALES,
    WindowHourPanel,
    build_calendar,
    hourly_window_means,
    read_panel,
    write_panel,
    year_series,
)
from .errors import ContractError, EmptyInputError, ParseError, PipelineError
from .impute import MONTH_ABBR, seasonal_split_impute
from .ingest import (
    HALF_HOUR,
    HOUR,
    Region,
    StationGroup,
    StationMeta,
    read_metadata,
    read_records,
    to_hourly,
    write_metadata,
    write_records,
)
from .report import (
    cluster_table,
    contour_grid,
    radar_sheet,
    read_cluster_csv,
    synth_station,
    write_cluster_csv,
    write_contour_csv,
    write_merges_csv,
    write_radar_csv,
)
from .similarity import (
    METRICS,
    DtwConfig,
    agglomerative_cluster,
    dcor_permutation_test,
    pairwise_dtw,
    silhouette,
    write_distance_csv,
)
from .trend import read_trend_csv, sen_slope, trend_surface, write_trend_csv

DCOR_HEADER = ("scale", "window_label", "station_a", "station_b",
               "dcor", "p_value", "n_perm")

_REQUIRED = object()


@dataclass(frozen=True)
class _Opt:
    flag: str
    parse: Callable[[str], object]
    default: object
    help: str
    dest: str | None = None
    is_flag: bool = False

    @property
    def key(self) -> str:
        return self.flag.lstrip("-")

    @property
    def dest_name(self) -> str:
        return self.dest or self.key.replace("-", "_")


def _step_arg(text: str):
    if text == "1h":
        return HOUR
    if text == "30m":
        return HALF_HOUR
    raise ValueError(f"expected 1h or 30m, got {text!r}")


def _scale_arg(text: str) -> str:
    if text not in SCALES:
        raise ValueError(f"expected one of {', '.join(SCALES)}, got {text!r}")
    return text


def _weights_arg(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected wh,wv,wd (three numbers), got {text!r}")
    return tuple(float(p) for p in parts)


def _features_arg(text: str) -> str:
    if text not in ("slope", "level"):
        raise ValueError(f"expected slope or level, got {text!r}")
    return text


def _metric_arg(text: str) -> str:
    if text not in METRICS:
        raise ValueError(f"expected one of {', '.join(METRICS)}, got {text!r}")
    return text


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the pipeline reserves 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            key, sep, value = s.partition("=")
            if not sep or not key.strip():
                raise ParseError(f"expected key=value, got {s!r}", line_no)
            cfg[key.strip()] = value.strip()
    return cfg


def _resolve(args: argparse.Namespace, opts: Sequence[_Opt],
             config: Mapping[str, str]) -> SimpleNamespace:
    allowed = {o.key: o for o in opts}
    for key in config:
        if key not in allowed:
            raise ContractError(
                f"unknown config key {key!r}; allowed: {', '.join(sorted(allowed))}")
    parsed = {}
    for key, raw in config.items():  # validate the whole file before precedence
        o = allowed[key]
        try:
            parsed[key] = parse_bool(raw) if o.is_flag else o.parse(raw)
        except ValueError as exc:
            raise ContractError(f"config key {key}: {exc}") from None
    out = {}
    for o in opts:
        val = getattr(args, o.dest_name)
        if val is None and o.key in parsed:
            val = parsed[o.key]
        if val is None:
            if o.default is _REQUIRED:
                raise ContractError(f"missing required option {o.flag}")
            val = False if o.is_flag else o.default
        out[o.dest_name] = val
    return SimpleNamespace(**out)


def _add_command(subs, name: str, help_text: str, opts: Sequence[_Opt], run) -> None:
    sp = subs.add_parser(name, help=help_text, description=help_text)
    sp.add_argument("--config", default=None, metavar="PATH",
                    help="key=value file supplying defaults for the options below")
    for o in opts:
        if o.is_flag:
            sp.add_argument(o.flag, dest=o.dest_name, action="store_true",
                            default=None, help=o.help)
        else:
            sp.add_argument(o.flag, dest=o.dest_name, type=o.parse, default=None,
                            metavar=o.key.upper().replace("-", "_"), help=o.help)
    sp.set_defaults(_run=run, _opts=tuple(opts))


# ---------------------------------------------------------------- synth

_SYNTH_OPTS = (
    _Opt("--out-dir", str, _REQUIRED, "directory for records.csv and metadata.csv"),
    _Opt("--stations", int, 6, "number of stations to generate"),
    _Opt("--years", int, 10, "calendar years per station"),
    _Opt("--start-year", int, 2000, "first year"),
    _Opt("--step", _step_arg, HOUR, "sampling step, 1h or 30m"),
    _Opt("--base", float, 10.0, "base temperature, degrees C"),
    _Opt("--diurnal-amplitude", float, 5.0, "amplitude of the daily cycle"),
    _Opt("--annual-amplitude", float, 8.0, "amplitude of the seasonal cycle"),
    _Opt("--trend", float, 0.02, "warming trend, degrees per year"),
    _Opt("--trend-spread", float, 0.0, "extra trend per station group index"),
    _Opt("--group-spread", float, 3.0, "extra base temperature per station group index"),
    _Opt("--noise-sd", float, 1.0, "observation noise standard deviation"),
    _Opt("--missing-rate", float, 0.0, "fraction of slots masked at random"),
    _Opt("--seed", int, 0, "random seed"),
)

_GROUP_CYCLE = (StationGroup.UKH, StationGroup.UKL, StationGroup.IH, StationGroup.IL)


def _run_synth(ns) -> int:
    out = Path(ns.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = datetime(ns.start_year, 1, 1)
    series, metas = [], []
    for i in range(ns.stations):
        g = i % len(_GROUP_CYCLE)
        group = _GROUP_CYCLE[g]
        if group in (StationGroup.UKH, StationGroup.UKL):
            region = Region.UK
            lat, lon = 52.0 + 0.3 * i, -1.5 - 0.2 * i
        else:
            region = Region.VALLE_DAOSTA if group is StationGroup.IH else Region.PIEMONTE
            lat, lon = 45.2 + 0.1 * i, 7.0 + 0.2 * i
        alt = 600.0 + 25.0 * i if group in (StationGroup.UKH, StationGroup.IH) else 80.0 + 5.0 * i
        sid = f"SYN{i + 1:02d}"
        series.append(synth_station(
            sid, start, n_years=ns.years, step=ns.step,
            base=ns.base + g * ns.group_spread,
            diurnal_amplitude=ns.diurnal_amplitude,
            annual_amplitude=ns.annual_amplitude,
            trend_per_year=ns.trend + g * ns.trend_spread,
            noise_sd=ns.noise_sd, missing_rate=ns.missing_rate,
            seed=[ns.seed, i]))
        metas.append(StationMeta(sid, f"Synthetic {i + 1:02d}", group, region, lat, lon, alt))
    write_records(out / "records.csv", series)
    write_metadata(out / "metadata.csv", metas)
    print(f"wrote {out / 'records.csv'} and {out / 'metadata.csv'} ({ns.stations} stations)")
    return 0


# ---------------------------------------------------------------- impute

_IMPUTE_OPTS = (
    _Opt("--records", str, _REQUIRED, "input records CSV"),
    _Opt("--out", str, _REQUIRED, "output records CSV with gaps filled"),
    _Opt("--to-hourly", parse_bool, None, "collapse a 30-minute series to hourly means "
         "after filling", is_flag=True),
)


def _run_impute(ns) -> int:
    series = read_records(ns.records)
    out_series = []
    for sid in sorted(series):
        filled, _ = seasonal_split_impute(series[sid])
        if ns.to_hourly:
            if filled.step == HALF_HOUR:
                filled = to_hourly(filled)
            elif filled.step != HOUR:
                raise ContractError(
                    f"station {sid}: cannot collapse step {filled.step} to hourly")
        out_series.append(filled)
    write_records(ns.out, out_series)
    print(f"wrote {ns.out} ({len(out_series)} stations)")
    return 0


# ---------------------------------------------------------------- aggregate

_AGGREGATE_OPTS = (
    _Opt("--records", str, _REQUIRED, "input records CSV (hourly, or 30m to be averaged)"),
    _Opt("--scale", _scale_arg, _REQUIRED, "window calendar: " + ", ".join(SCALES)),
    _Opt("--out", str, _REQUIRED, "output panel CSV"),
    _Opt("--skip-missing", parse_bool, None, "aggregate around masked slots instead of "
         "requiring an imputed series", is_flag=True),
)


def _run_aggregate(ns) -> int:
    cal = build_calendar(ns.scale)
    series = read_records(ns.records)
    panels = []
    for sid in sorted(series):
        s = series[sid]
        if s.step == HALF_HOUR:
            s = to_hourly(s)
        panels.append(hourly_window_means(s, cal, skip_missing=ns.skip_missing))
    write_panel(ns.out, panels)
    print(f"wrote {ns.out} ({len(panels)} stations, scale {ns.scale})")
    return 0


# ---------------------------------------------------------------- trend

_TREND_OPTS = (
    _Opt("--panel", str, _REQUIRED, "input panel CSV"),
    _Opt("--out", str, _REQUIRED, "output trend CSV"),
    _Opt("--min-years", int, 3, "minimum valid years per cell"),
)


def _run_trend(ns) -> int:
    panels = read_panel(ns.panel)
    cells = []
    for sid in sorted(panels):
        cells.extend(trend_surface(panels[sid], min_years=ns.min_years))
    if not cells:
        raise EmptyInputError("no cell had enough usable years for a trend test")
    write_trend_csv(ns.out, cells)
    print(f"wrote {ns.out} ({len(cells)} cells)")
    return 0


# ---------------------------------------------------------------- contour

_CONTOUR_OPTS = (
    _Opt("--trend", str, _REQUIRED, "input trend CSV"),
    _Opt("--out", str, _REQUIRED, "output contour CSV with slope and p bands"),
)


def _run_contour(ns) -> int:
    grids = contour_grid(read_trend_csv(ns.trend))
    write_contour_csv(ns.out, grids)
    print(f"wrote {ns.out} ({sum(len(g.cells) for g in grids)} cells)")
    return 0


# ---------------------------------------------------------------- cluster

_CLUSTER_OPTS = (
    _Opt("--panel", str, _REQUIRED, "input panel CSV"),
    _Opt("--out-dir", str, _REQUIRED, "directory for per-window cluster outputs"),
    _Opt("--k", int, 4, "number of clusters"),
    _Opt("--window", str, None, "single window label to cluster (default: all windows)"),
    _Opt("--features", _features_arg, "slope",
         "per-hour feature: slope (Sen's slope across years) or level (mean)"),
    _Opt("--weights", _weights_arg, (1.0, 1.0, 2.0), "DTW move weights wh,wv,wd"),
    _Opt("--lambda", float, 0.0, "DTW off-diagonal penalty", dest="lam"),
    _Opt("--metric", _metric_arg, "absolute", "DTW local cost: absolute or squared"),
    _Opt("--meta", str, None, "station metadata CSV; adds a readable cluster table"),
)


def _shared_scale(panels: Mapping[str, WindowHourPanel]) -> str:
    scales = {p.scale for p in panels.values()}
    if len(scales) != 1:
        raise ContractError(f"panel mixes scales {sorted(scales)}; aggregate per scale")
    return scales.pop()


def _hour_profile(panel: WindowHourPanel, label: str, kind: str) -> np.ndarray:
    vals = []
    for hour in range(24):
        years, v = year_series(panel, label, hour)
        if kind == "slope":
            if years.size < 2:
                raise ContractError(
                    f"station {panel.station_id}, window {label}, hour {hour}: "
                    f"need at least 2 valid years for slope features, have {years.size}")
            vals.append(sen_slope(v, years).slope)
        else:
            if v.size == 0:
                raise ContractError(
                    f"station {panel.station_id}, window {label}, hour {hour}: "
                    "no valid years for level features")
            vals.append(float(v.mean()))
    return np.asarray(vals)


def _select_windows(ns, scale: str) -> list[str]:
    labels = build_calendar(scale).labels
    if ns.window is None:
        return list(labels)
    if ns.window not in labels:
        raise ContractError(f"window {ns.window!r} does not belong to scale {scale}")
    return [ns.window]


def _run_cluster(ns) -> int:
    panels = read_panel(ns.panel)
    scale = _shared_scale(panels)
    windows = _select_windows(ns, scale)
    config = DtwConfig(*ns.weights, lam=ns.lam, metric=ns.metric)
    meta = read_metadata(ns.meta) if ns.meta else None
    out = Path(ns.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for label in windows:
        profiles = {sid: _hour_profile(panels[sid], label, ns.features)
                    for sid in sorted(panels)}
        dist = pairwise_dtw(profiles, config)
        rep = agglomerative_cluster(dist, ns.k)
        scores, mean = silhouette(dist, rep.assignment)
        write_distance_csv(out / f"dtw_{label}.csv", dist)
        write_cluster_csv(out / f"clusters_{label}.csv", rep, scores)
        write_merges_csv(out / f"merges_{label}.csv", rep.merges)
        if meta is not None:
            (out / f"cluster_table_{label}.txt").write_text(
                cluster_table(rep, scores, meta), encoding="utf-8")
        print(f"{label}: k={ns.k} mean_silhouette={mean:.4f}")
    return 0


# ---------------------------------------------------------------- dcor

_DCOR_OPTS = (
    _Opt("--panel", str, _REQUIRED, "input panel CSV"),
    _Opt("--out", str, _REQUIRED, "output dcor CSV"),
    _Opt("--window", str, None, "single window label (default: all windows)"),
    _Opt("--n-perm", int, 199, "permutations for the p-value (>= 99)"),
    _Opt("--seed", int, 0, "random seed"),
)


def _run_dcor(ns) -> int:
    panels = read_panel(ns.panel)
    scale = _shared_scale(panels)
    windows = _select_windows(ns, scale)
    labels = build_calendar(scale).labels
    sids = sorted(panels)
    if len(sids) < 2:
        raise ContractError("dcor needs at least 2 stations in the panel")
    rows = []
    for label in windows:
        w = labels.index(label)
        profiles = {sid: _hour_profile(panels[sid], label, "level") for sid in sids}
        for i in range(len(sids)):
            for j in range(i + 1, len(sids)):
                res = dcor_permutation_test(
                    profiles[sids[i]], profiles[sids[j]],
                    n_perm=ns.n_perm, seed=[ns.seed, w, i, j])
                rows.append((scale, label, sids[i], sids[j], res))
    with open(ns.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DCOR_HEADER)
        for scale_, label, a, b, res in rows:
            writer.writerow((scale_, label, a, b, fmt(res.dcor),
                             fmt(res.p_value), res.n_perm))
    print(f"wrote {ns.out} ({len(rows)} pairs)")
    return 0


# ---------------------------------------------------------------- radar

_RADAR_OPTS = (
    _Opt("--clusters-dir", str, _REQUIRED,
         "directory holding monthly clusters_<Mon>.csv files"),
    _Opt("--meta", str, _REQUIRED, "station metadata CSV"),
    _Opt("--out", str, _REQUIRED, "output radar CSV"),
)


def _run_radar(ns) -> int:
    meta = read_metadata(ns.meta)
    monthly = {}
    for mon in MONTH_ABBR:
        path = Path(ns.clusters_dir) / f"clusters_{mon}.csv"
        if path.exists():
            monthly[mon] = read_cluster_csv(path)
    if not monthly:
        raise EmptyInputError(f"no clusters_<Mon>.csv files found in {ns.clusters_dir}")
    sheet = radar_sheet(monthly, meta)
    write_radar_csv(ns.out, sheet)
    print(f"wrote {ns.out} ({len(sheet.rows)} rows, {len(monthly)} months)")
    return 0


# ---------------------------------------------------------------- driver

_COMMANDS = (
    ("synth", "generate synthetic station records and metadata", _SYNTH_OPTS, _run_synth),
    ("impute", "fill gaps by within-month linear interpolation", _IMPUTE_OPTS, _run_impute),
    ("aggregate", "average hourly records into window/hour panels", _AGGREGATE_OPTS,
     _run_aggregate),
    ("trend", "Mann-Kendall, Sen's slope and serial-correlation screening", _TREND_OPTS,
     _run_trend),
    ("contour", "bin trend cells into slope and p-value bands", _CONTOUR_OPTS, _run_contour),
    ("cluster", "DTW distances, average-linkage clusters and silhouettes", _CLUSTER_OPTS,
     _run_cluster),
    ("dcor", "pairwise distance correlation with a permutation test", _DCOR_OPTS, _run_dcor),
    ("radar", "summarize monthly clusterings by region", _RADAR_OPTS, _run_radar),
)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diurnal",
                     description="diurnal temperature pattern analysis pipeline")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, help_text, opts, run in _COMMANDS:
        _add_command(subs, name, help_text, opts, run)
    return parser


def cli(argv: Sequence[str] | None = None) -> int:
    """Run the pipeline CLI; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "_run"):
        parser.error("a subcommand is required")
    try:
        config = _load_config(args.config) if args.config else {}
        ns = _resolve(args, args._opts, config)
        return args._run(ns)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
