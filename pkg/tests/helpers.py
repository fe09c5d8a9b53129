"""Shared construction helpers for the test suite."""

from __future__ import annotations

from datetime import datetime, timedelta

import numpy as np

from diurnal import TemperatureSeries

HOUR = timedelta(hours=1)
HALF_HOUR = timedelta(minutes=30)


def make_series(values, missing=None, start=datetime(2000, 1, 1), step=HOUR,
                sid="T01") -> TemperatureSeries:
    vals = np.asarray(values, dtype=float)
    if missing is None:
        miss = np.zeros(vals.size, dtype=bool)
    else:
        miss = np.asarray(missing, dtype=bool)
    return TemperatureSeries(sid, start, step, vals, miss)


def hourly_year_series(year: int, value_fn, sid="T01") -> TemperatureSeries:
    """One-year hourly series with values from value_fn(slot_datetime)."""
    start = datetime(year, 1, 1)
    end = datetime(year + 1, 1, 1)
    n = int((end - start).total_seconds()) // 3600
    vals = np.array([value_fn(start + k * HOUR) for k in range(n)], dtype=float)
    return TemperatureSeries(sid, start, HOUR, vals, np.zeros(n, dtype=bool))
