"""Station metadata and raw temperature record ingestion.

Raw records arrive as CSV rows ``station_id,timestamp,temp_c`` with ISO-8601
UTC timestamps; an empty temperature field marks a missing reading. Parsing
produces a dense fixed-step series: every slot between the first and last
timestamp exists, and slots without a usable reading are masked rather than
omitted. Half-hourly series are normalized to hourly means with
:func:`to_hourly`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._util import fmt
from .errors import (
    ContractError,
    DuplicateTimestampError,
    EmptyInputError,
    ParseError,
)

RECORDS_HEADER = ("station_id", "timestamp", "temp_c")
METADATA_HEADER = (
    "station_id", "name", "group", "region", "latitude", "longitude", "altitude_m",
)

HOUR = timedelta(hours=1)
HALF_HOUR = timedelta(minutes=30)


class StationGroup(str, Enum):
    UKH = "UKH"
    UKL = "UKL"
    IH = "IH"
    IL = "IL"


class Region(str, Enum):
    UK = "UK"
    PIEMONTE = "Piemonte"
    VALLE_DAOSTA = "ValleDAosta"


_GROUP_REGIONS = {
    StationGroup.UKH: {Region.UK},
    StationGroup.UKL: {Region.UK},
    StationGroup.IH: {Region.PIEMONTE, Region.VALLE_DAOSTA},
    StationGroup.IL: {Region.PIEMONTE, Region.VALLE_DAOSTA},
}


@dataclass(frozen=True)
class StationMeta:
    """One station's descriptive record."""

    station_id: str
    name: str
    group: StationGroup
    region: Region
    latitude: float
    longitude: float
    altitude_m: float

    def __post_init__(self):
        if not self.station_id:
            raise ContractError("station_id must be non-empty")
        if not -90.0 <= self.latitude <= 90.0:
            raise ContractError(
                f"station {self.station_id}: latitude {self.latitude} out of [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ContractError(
                f"station {self.station_id}: longitude {self.longitude} out of [-180, 180]")
        if self.altitude_m < 0:
            raise ContractError(
                f"station {self.station_id}: altitude {self.altitude_m} is negative")
        if self.region not in _GROUP_REGIONS[self.group]:
            raise ContractError(
                f"station {self.station_id}: group {self.group.value} is inconsistent "
                f"with region {self.region.value}")


@dataclass
class TemperatureSeries:
    """A dense fixed-step temperature series with an explicit missing mask.

    The timestamp of slot ``k`` is ``start + k * step``; gaps are masked,
    never dropped, so the index itself never has holes. Masked slots hold
    NaN in ``values``.
    """

    station_id: str
    start: datetime
    step: timedelta
    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.missing = np.asarray(self.missing, dtype=bool)
        if self.values.shape != self.missing.shape or self.values.ndim != 1:
            raise ContractError("values and missing must be equal-length 1-D arrays")
        if self.step <= timedelta(0):
            raise ContractError("step must be positive")
        observed = self.values[~self.missing]
        if observed.size and not np.all(np.isfinite(observed)):
            raise ContractError("non-missing values must be finite")
        self.values = np.where(self.missing, np.nan, self.values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> datetime:
        return self.start + (self.n - 1) * self.step

    def index64(self) -> np.ndarray:
        """Slot timestamps as a ``datetime64[s]`` array."""
        step_s = int(self.step.total_seconds())
        return np.datetime64(self.start, "s") + np.arange(self.n) * np.timedelta64(step_s, "s")

    def timestamp(self, k: int) -> datetime:
        return self.start + k * self.step


@dataclass(frozen=True)
class MissingReport:
    station_id: str
    total_slots: int
    missing_slots: int
    missing_pct: float


def time_fields(index: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a datetime64 index into (year, month, day, hour) integer arrays."""
    months64 = index.astype("datetime64[M]")
    days64 = index.astype("datetime64[D]")
    years = index.astype("datetime64[Y]").astype(np.int64) + 1970
    months = months64.astype(np.int64) % 12 + 1
    days = (days64 - months64.astype("datetime64[D]")).astype(np.int64) + 1
    hours = (index.astype("datetime64[h]") - days64.astype("datetime64[h]")).astype(np.int64)
    return years, months, days, hours


def _parse_timestamp(text: str, line_no: int) -> datetime:
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError:
        raise ParseError(f"malformed timestamp {text!r}", line_no) from None
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def _iter_record_rows(lines: Iterable[str]):
    """Yield (line_no, station_id, timestamp, value-or-None) from record CSV lines."""
    reader = csv.reader(lines)
    for line_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].strip() == "station_id":
            continue  # header
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line_no)
        sid = row[0].strip()
        if not sid:
            raise ParseError("empty station_id", line_no)
        ts = _parse_timestamp(row[1], line_no)
        raw_temp = row[2].strip()
        if raw_temp == "":
            value = None
        else:
            try:
                value = float(raw_temp)
            except ValueError:
                raise ParseError(f"malformed temperature {row[2]!r}", line_no) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite temperature {row[2]!r}", line_no)
        yield line_no, sid, ts, value


def _build_series(station_id: str,
                  recs: list[tuple[int, datetime, float | None]],
                  step: timedelta) -> TemperatureSeries:
    recs = sorted(recs, key=lambda r: r[1])
    first = recs[0][1]
    span = recs[-1][1] - first
    n = span // step + 1
    values = np.full(n, np.nan)
    missing = np.ones(n, dtype=bool)
    prev_ts = None
    for line_no, ts, value in recs:
        if ts == prev_ts:
            raise DuplicateTimestampError(
                f"station {station_id}: duplicate timestamp {ts.isoformat()}")
        prev_ts = ts
        delta = ts - first
        if delta % step:
            raise ParseError(
                f"timestamp {ts.isoformat()} not aligned to the "
                f"{int(step.total_seconds())}s step", line_no)
        k = delta // step
        if value is not None:
            values[k] = value
            missing[k] = False
    return TemperatureSeries(station_id, first, step, values, missing)


def parse_records(lines: Iterable[str], expected_step: timedelta) -> TemperatureSeries:
    """Parse record CSV lines for a single station into a dense series.

    Slots between the first and last timestamp that have no record, or whose
    temperature field is empty, come back masked. Duplicate timestamps and
    malformed lines raise; zero usable rows raises ``EmptyInputError``.
    """
    groups: dict[str, list] = {}
    for line_no, sid, ts, value in _iter_record_rows(lines):
        groups.setdefault(sid, []).append((line_no, ts, value))
    if not groups:
        raise EmptyInputError("no records found")
    if len(groups) > 1:
        raise ContractError(
            f"expected a single station, found {sorted(groups)}")
    (sid, recs), = groups.items()
    return _build_series(sid, recs, expected_step)


def infer_step(timestamps: Sequence[datetime]) -> timedelta:
    """Guess the sampling step as the smallest positive gap between records."""
    if len(timestamps) < 2:
        return HOUR
    ordered = sorted(timestamps)
    diffs = [b - a for a, b in zip(ordered, ordered[1:]) if b > a]
    return min(diffs) if diffs else HOUR


def read_records(path: str | Path,
                 expected_step: timedelta | None = None) -> dict[str, TemperatureSeries]:
    """Read a (possibly multi-station) records CSV into per-station series.

    With ``expected_step=None`` the step is inferred per station from the
    smallest gap between its records.
    """
    groups: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, sid, ts, value in _iter_record_rows(fh):
            groups.setdefault(sid, []).append((line_no, ts, value))
    if not groups:
        raise EmptyInputError(f"no records found in {path}")
    out = {}
    for sid in sorted(groups):
        recs = groups[sid]
        step = expected_step or infer_step([ts for _, ts, _ in recs])
        out[sid] = _build_series(sid, recs, step)
    return out


def write_records(path: str | Path, series: Iterable[TemperatureSeries]) -> None:
    """Write series back out in the records CSV layout (masked slots stay empty)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORDS_HEADER)
        for s in sorted(series, key=lambda s: s.station_id):
            for k in range(s.n):
                ts = s.timestamp(k)
                temp = "" if s.missing[k] else fmt(float(s.values[k]))
                writer.writerow((s.station_id, ts.isoformat() + "Z", temp))


def to_hourly(series: TemperatureSeries) -> TemperatureSeries:
    """Collapse a 30-minute series to hourly means.

    Each output hour averages its available half-hour readings; one present
    half is used as-is, and an hour with both halves missing stays masked.
    Hours are left-labeled: readings at H:00 and H:30 both feed hour H.
    """
    if series.step != HALF_HOUR:
        raise ContractError(f"to_hourly needs a 30-minute step, got {series.step}")
    first_hour = series.start.replace(minute=0, second=0, microsecond=0)
    offset_min = int((series.start - first_hour).total_seconds()) // 60
    slot_min = offset_min + 30 * np.arange(series.n)
    hour_idx = slot_min // 60
    n_out = int(hour_idx[-1]) + 1 if series.n else 0
    keep = ~series.missing
    sums = np.bincount(hour_idx[keep], weights=series.values[keep], minlength=n_out)
    counts = np.bincount(hour_idx[keep], minlength=n_out)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return TemperatureSeries(series.station_id, first_hour, HOUR, means, counts == 0)


def missing_report(series: TemperatureSeries,
                   span: tuple[datetime, datetime] | None = None) -> MissingReport:
    """Quantify missingness over the series' own dense span.

    ``span=(start, end)`` pins the denominator to a fixed period instead;
    slots outside the series count as missing. Span bounds must sit on the
    series' step grid.
    """
    if series.n == 0:
        raise EmptyInputError("cannot report missingness of an empty series")
    if span is None:
        total = series.n
        miss = int(series.missing.sum())
    else:
        start, end = span
        if end < start:
            raise ContractError("span end precedes span start")
        if (start - series.start) % series.step or (end - start) % series.step:
            raise ContractError("span bounds must align to the series step grid")
        total = (end - start) // series.step + 1
        first_k = (start - series.start) // series.step
        ks = first_k + np.arange(total)
        inside = (ks >= 0) & (ks < series.n)
        present = np.zeros(total, dtype=bool)
        present[inside] = ~series.missing[ks[inside]]
        miss = int(total - present.sum())
    return MissingReport(series.station_id, int(total), miss, 100.0 * miss / total)


def read_metadata(path: str | Path) -> dict[str, StationMeta]:
    """Read the station metadata CSV, validating every row."""
    out: dict[str, StationMeta] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].strip() == "station_id":
                continue
            if len(row) != 7:
                raise ParseError(f"expected 7 fields, got {len(row)}", line_no)
            sid = row[0].strip()
            try:
                group = StationGroup(row[2].strip())
                region = Region(row[3].strip())
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from None
            try:
                lat, lon, alt = (float(row[i]) for i in (4, 5, 6))
            except ValueError:
                raise ParseError("malformed coordinate or altitude", line_no) from None
            if sid in out:
                raise ParseError(f"duplicate station_id {sid!r}", line_no)
            out[sid] = StationMeta(sid, row[1].strip(), group, region, lat, lon, alt)
    if not out:
        raise EmptyInputError(f"no station metadata found in {path}")
    return out


def write_metadata(path: str | Path, stations: Iterable[StationMeta]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METADATA_HEADER)
        for m in sorted(stations, key=lambda m: m.station_id):
            writer.writerow((m.station_id, m.name, m.group.value, m.region.value,
                             fmt(m.latitude), fmt(m.longitude), fmt(m.altitude_m)))
