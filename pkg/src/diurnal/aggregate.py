"""Hour-of-day aggregation over multi-day calendar windows.

Hourly readings are grouped into (year, window, hour-of-day) cells and
averaged. Four window calendars are supported:

* ``10d``   36 windows per year: days 1-10, 11-20 and 21-end of each month.
* ``30d``   12 windows per year, one per calendar month.
* ``60da``  6 two-month windows starting Jan-Feb.
* ``60db``  6 two-month windows starting Dec-Jan; December readings join
            the following January, so the Dec-Jan window of panel year Y
            covers Dec of year Y and Jan of year Y+1.

The third ten-day window is labeled ``21-31`` for every month even when the
month is shorter; labels stay comparable across months and years that way.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Iterable

import numpy as np

from ._util import fmt, parse_float
from .errors import ContractError, EmptyInputError, ParseError
from .impute import MONTH_ABBR
from .ingest import TemperatureSeries, time_fields

SCALES = ("10d", "30d", "60da", "60db")

PANEL_HEADER = ("station_id", "scale", "year", "window_label", "hour", "mean_temp", "valid")


@dataclass
class WindowCalendar:
    """Maps (month, day) to a window position for one aggregation scale."""

    scale: str
    labels: list[str]
    # month (1-12) -> window index for whole-month scales; the 10d scale
    # additionally splits on day-of-month in window_index().
    _month_window: np.ndarray = field(repr=False, default=None)
    _year_offset: np.ndarray = field(repr=False, default=None)

    @property
    def n_windows(self) -> int:
        return len(self.labels)

    def window_index(self, months: np.ndarray, days: np.ndarray) -> np.ndarray:
        idx = self._month_window[months - 1]
        if self.scale == "10d":
            decade = np.minimum((days - 1) // 10, 2)
            idx = idx * 3 + decade
        return idx

    def panel_years(self, years: np.ndarray, months: np.ndarray) -> np.ndarray:
        return years - self._year_offset[months - 1]


def build_calendar(scale: str) -> WindowCalendar:
    if scale not in SCALES:
        raise ContractError(f"unknown scale {scale!r}, expected one of {SCALES}")
    offsets = np.zeros(12, dtype=np.int64)
    if scale == "10d":
        labels = []
        for abbr in MONTH_ABBR:
            labels += [f"{abbr}01-10", f"{abbr}11-20", f"{abbr}21-31"]
        month_window = np.arange(12)
    elif scale == "30d":
        labels = list(MONTH_ABBR)
        month_window = np.arange(12)
    elif scale == "60da":
        labels = [f"{MONTH_ABBR[m]}-{MONTH_ABBR[m + 1]}" for m in range(0, 12, 2)]
        month_window = np.arange(12) // 2
    else:  # 60db: Dec-Jan, Feb-Mar, ..., Oct-Nov
        labels = ["Dec-Jan"] + [f"{MONTH_ABBR[m]}-{MONTH_ABBR[m + 1]}" for m in range(1, 11, 2)]
        month_window = (np.arange(1, 13) % 12) // 2
        # January readings belong to the Dec-Jan window opened the year before.
        offsets[0] = 1
    return WindowCalendar(scale, labels, month_window, offsets)


@dataclass
class WindowHourPanel:
    """Per-station (year, window, hour-of-day) mean temperatures.

    ``means`` has shape (len(years), n_windows, 24) with NaN where no
    reading contributed; ``counts`` holds the contributing reading count.
    """

    station_id: str
    scale: str
    years: list[int]
    labels: list[str]
    means: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        shape = (len(self.years), len(self.labels), 24)
        if self.means.shape != shape or self.counts.shape != shape:
            raise ContractError(f"panel arrays must have shape {shape}")

    def cell_valid(self) -> np.ndarray:
        return self.counts > 0


def hourly_window_means(series: TemperatureSeries, calendar: WindowCalendar,
                        *, skip_missing: bool = False) -> WindowHourPanel:
    """Aggregate an hourly series into a window/hour panel.

    The series is normally expected to be gap-free (imputed first); masked
    slots raise unless ``skip_missing`` is set, in which case they are simply
    left out of the means.
    """
    if series.step != timedelta(hours=1):
        raise ContractError(f"aggregation needs an hourly series, got step {series.step}")
    if series.n == 0:
        raise EmptyInputError("cannot aggregate an empty series")
    if series.missing.any() and not skip_missing:
        raise ContractError(
            f"station {series.station_id}: series has masked slots; impute first "
            "or pass skip_missing=True")
    years, months, days, hours = time_fields(series.index64())
    widx = calendar.window_index(months, days)
    pyears = calendar.panel_years(years, months)
    uniq_years = np.unique(pyears)
    ypos = np.searchsorted(uniq_years, pyears)
    nW = calendar.n_windows
    flat = (ypos * nW + widx) * 24 + hours
    size = len(uniq_years) * nW * 24
    keep = ~series.missing
    sums = np.bincount(flat[keep], weights=series.values[keep], minlength=size)
    counts = np.bincount(flat[keep], minlength=size).astype(np.int64)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    shape = (len(uniq_years), nW, 24)
    return WindowHourPanel(series.station_id, calendar.scale,
                           [int(y) for y in uniq_years], list(calendar.labels),
                           means.reshape(shape), counts.reshape(shape))


def year_series(panel: WindowHourPanel, window_label: str, hour: int) -> tuple[np.ndarray, np.ndarray]:
    """The across-years sequence for one (window, hour) cell.

    Returns (years, means) with invalid years dropped; both arrays are in
    ascending year order.
    """
    if window_label not in panel.labels:
        raise ContractError(f"unknown window label {window_label!r} for scale {panel.scale}")
    if not 0 <= hour <= 23:
        raise ContractError(f"hour {hour} out of range 0-23")
    w = panel.labels.index(window_label)
    valid = panel.counts[:, w, hour] > 0
    years = np.asarray(panel.years, dtype=np.int64)[valid]
    return years, panel.means[valid, w, hour]


def write_panel(path: str | Path, panels: Iterable[WindowHourPanel]) -> None:
    """Write panels as CSV rows, one per (station, year, window, hour).

    Invalid cells keep their row with an empty mean and valid=0 so the grid
    shape survives the round trip.
    """
    panels = sorted(panels, key=lambda p: p.station_id)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PANEL_HEADER)
        for p in panels:
            for yi, year in enumerate(p.years):
                for w, label in enumerate(p.labels):
                    for hour in range(24):
                        ok = p.counts[yi, w, hour] > 0
                        writer.writerow((
                            p.station_id, p.scale, year, label, hour,
                            fmt(float(p.means[yi, w, hour])) if ok else "",
                            "1" if ok else "0",
                        ))


def read_panel(path: str | Path) -> dict[str, WindowHourPanel]:
    """Read a panel CSV back into per-station panels.

    Counts are reduced to the valid flag on the way out, so a re-read panel
    reports count 1 for every valid cell.
    """
    rows: dict[str, dict] = {}
    scales: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].strip() == "station_id":
                continue
            if len(row) != 7:
                raise ParseError(f"expected 7 fields, got {len(row)}", line_no)
            sid, scale, year, label, hour, mean, valid = (f.strip() for f in row)
            if scale not in SCALES:
                raise ParseError(f"unknown scale {scale!r}", line_no)
            if sid in scales and scales[sid] != scale:
                raise ParseError(f"station {sid} appears under two scales", line_no)
            scales[sid] = scale
            try:
                cell = (int(year), label, int(hour), parse_float(mean), valid == "1")
            except ValueError:
                raise ParseError("malformed year, hour or mean", line_no) from None
            rows.setdefault(sid, {})[(cell[0], cell[1], cell[2])] = cell[3:]
    if not rows:
        raise EmptyInputError(f"no panel rows found in {path}")
    out = {}
    for sid in sorted(rows):
        cal = build_calendar(scales[sid])
        cells = rows[sid]
        years = sorted({y for y, _, _ in cells})
        shape = (len(years), cal.n_windows, 24)
        means = np.full(shape, np.nan)
        counts = np.zeros(shape, dtype=np.int64)
        for (year, label, hour), (mean, ok) in cells.items():
            if label not in cal.labels:
                raise ParseError(f"label {label!r} does not belong to scale {scales[sid]}")
            if ok:
                yi = years.index(year)
                w = cal.labels.index(label)
                means[yi, w, hour] = mean
                counts[yi, w, hour] = 1
        out[sid] = WindowHourPanel(sid, scales[sid], years, list(cal.labels), means, counts)
    return out
