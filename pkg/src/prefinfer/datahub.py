"""Hourly time-series layer: CSV ingestion, hourly averaging, and a seeded
synthetic generator for electricity price, renewable generation and
background load.

All signals are served as aligned multiples of 24 hours (DataWindow) so the
environment can replay whole days. The synthetic generator is the default
data source; real meter/price exports are ingested through parse_csv with a
(timestamp, value) column contract.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyFile,
    GapInSeries,
    IndexOutOfRange,
    MissingColumn,
    UnparseableRow,
    WindowMismatch,
)

SECONDS_PER_HOUR = 3600
HOURS_PER_DAY = 24


class SeriesPoint(NamedTuple):
    """One raw sample: epoch seconds (UTC) and a non-negative value."""

    timestamp: int
    value: float


@dataclass(frozen=True)
class HourlySeries:
    """Gap-free hourly values starting at an epoch hour index."""

    start_hour: int
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DataWindow:
    """Aligned price / renewable / background series spanning whole days."""

    price: HourlySeries
    renewable: HourlySeries
    background: HourlySeries
    days: int

    def __post_init__(self):
        n = self.days * HOURS_PER_DAY
        for name, series in (
            ("price", self.price),
            ("renewable", self.renewable),
            ("background", self.background),
        ):
            if series.start_hour != self.price.start_hour:
                raise ValueError(f"{name} series not aligned to price start hour")
            if len(series) != n:
                raise ValueError(
                    f"{name} series has {len(series)} values, expected {n}"
                )


def _mean(values: list[float]) -> float:
    """Mean anchored at the first value; exact when all values are equal."""
    first = values[0]
    return first + math.fsum(v - first for v in values) / len(values)


def _parse_timestamp(raw: str) -> int:
    """Accept integer epoch seconds or ISO-8601; naive stamps are UTC."""
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return int(float(text))
    except ValueError:
        pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def parse_csv(path: str | Path, timestamp_column: str = "timestamp",
              value_column: str = "value") -> list[SeriesPoint]:
    """Read (timestamp, value) rows from a headed CSV file.

    Points come back sorted by timestamp; rows sharing a timestamp are
    collapsed to their mean value.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise EmptyFile(f"{path} has no header row")
        for column in (timestamp_column, value_column):
            if column not in reader.fieldnames:
                raise MissingColumn(f"{path} has no column {column!r}")
        buckets: dict[int, list[float]] = {}
        rows = 0
        for line_number, row in enumerate(reader, start=2):
            rows += 1
            try:
                ts = _parse_timestamp(row[timestamp_column])
                value = float(row[value_column])
            except (TypeError, ValueError) as exc:
                raise UnparseableRow(line_number, str(exc)) from exc
            if not math.isfinite(value) or value < 0:
                raise UnparseableRow(line_number, f"value {value} out of range")
            buckets.setdefault(ts, []).append(value)
    if rows == 0:
        raise EmptyFile(f"{path} has no data rows")
    return [
        SeriesPoint(ts, _mean(vals)) for ts, vals in sorted(buckets.items())
    ]


def hourly_average(points: list[SeriesPoint]) -> HourlySeries:
    """Average samples into consecutive hour buckets.

    Every hour between the first and last sample must contain at least one
    point; a silent gap would corrupt downstream reward accounting, so gaps
    raise instead of interpolating.
    """
    if not points:
        raise EmptyFile("no points to average")
    start_hour = points[0].timestamp // SECONDS_PER_HOUR
    end_hour = points[-1].timestamp // SECONDS_PER_HOUR
    buckets: list[list[float]] = [[] for _ in range(end_hour - start_hour + 1)]
    for point in points:
        buckets[point.timestamp // SECONDS_PER_HOUR - start_hour].append(point.value)
    values = []
    for offset, bucket in enumerate(buckets):
        if not bucket:
            raise GapInSeries(start_hour + offset)
        values.append(_mean(bucket))
    return HourlySeries(start_hour=start_hour, values=tuple(values))


def _circular_hour_distance(hour: np.ndarray, center: float) -> np.ndarray:
    raw = np.abs(hour - center)
    return np.minimum(raw, HOURS_PER_DAY - raw)


def _bell(hour: np.ndarray, center: float, width: float) -> np.ndarray:
    d = _circular_hour_distance(hour, center)
    return np.exp(-0.5 * (d / width) ** 2)


# Daylight for the solar profile: strictly zero outside these hours so the
# night-time comfort window never sees renewable generation.
SOLAR_FIRST_HOUR = 7
SOLAR_LAST_HOUR = 19

PRICE_MIN, PRICE_MAX = 0.01, 0.10
RENEWABLE_MAX = 3.0
BACKGROUND_MIN, BACKGROUND_MAX = 0.1, 1.5


def synthesize(seed: int, days: int) -> DataWindow:
    """Generate a deterministic multi-day window with the structural
    cost/comfort dilemma: zero renewable at night, a cheap mid-day net-cost
    trough and an expensive evening price peak.

    Price lives in [0.01, 0.10] $/kWh, renewable in [0, 3] kW, background
    load in [0.1, 1.5] kW with morning/evening bumps.
    """
    if days < 1:
        raise ValueError("days must be >= 1")
    rng = np.random.default_rng(seed)
    hours = np.arange(days * HOURS_PER_DAY)
    hod = (hours % HOURS_PER_DAY).astype(float)

    price = (
        0.082
        - 0.067 * _bell(hod, center=13.0, width=4.0)
        + 0.034 * _bell(hod, center=19.0, width=1.8)
        + rng.uniform(-0.002, 0.002, size=hours.shape)
    )
    price = np.clip(price, PRICE_MIN, PRICE_MAX)

    solar_shape = np.where(
        (hod >= SOLAR_FIRST_HOUR) & (hod <= SOLAR_LAST_HOUR),
        np.sin(np.pi * (hod - SOLAR_FIRST_HOUR) / (SOLAR_LAST_HOUR - SOLAR_FIRST_HOUR)),
        0.0,
    )
    day_amplitude = rng.uniform(2.5, 2.9, size=days)
    amplitude = np.repeat(day_amplitude, HOURS_PER_DAY)
    # noise scales with the shape so night hours stay exactly zero
    renewable = solar_shape * (amplitude + rng.uniform(-0.1, 0.1, size=hours.shape))
    renewable = np.clip(renewable, 0.0, RENEWABLE_MAX)

    background = (
        0.35
        + 0.50 * _bell(hod, center=8.0, width=1.5)
        + 0.55 * _bell(hod, center=18.5, width=2.0)
        + rng.uniform(-0.04, 0.04, size=hours.shape)
    )
    background = np.clip(background, BACKGROUND_MIN, BACKGROUND_MAX)

    return DataWindow(
        price=HourlySeries(0, tuple(float(v) for v in price)),
        renewable=HourlySeries(0, tuple(float(v) for v in renewable)),
        background=HourlySeries(0, tuple(float(v) for v in background)),
        days=days,
    )


def slice_window(window: DataWindow, day_index: int) -> DataWindow:
    """Extract one day as a standalone 1-day window."""
    if not 0 <= day_index < window.days:
        raise IndexOutOfRange(
            f"day {day_index} outside window of {window.days} days"
        )
    lo = day_index * HOURS_PER_DAY
    hi = lo + HOURS_PER_DAY
    start = window.price.start_hour + lo

    def cut(series: HourlySeries) -> HourlySeries:
        return HourlySeries(start, series.values[lo:hi])

    return DataWindow(
        price=cut(window.price),
        renewable=cut(window.renewable),
        background=cut(window.background),
        days=1,
    )


def window_to_dict(window: DataWindow) -> dict:
    return {
        "start_hour": window.price.start_hour,
        "days": window.days,
        "price": list(window.price.values),
        "renewable": list(window.renewable.values),
        "background": list(window.background.values),
    }


def window_from_dict(payload: dict) -> DataWindow:
    start = int(payload["start_hour"])
    days = int(payload["days"])
    return DataWindow(
        price=HourlySeries(start, tuple(float(v) for v in payload["price"])),
        renewable=HourlySeries(start, tuple(float(v) for v in payload["renewable"])),
        background=HourlySeries(start, tuple(float(v) for v in payload["background"])),
        days=days,
    )


def save_window(window: DataWindow, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(window_to_dict(window), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_window(path: str | Path) -> DataWindow:
    return window_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def make_window(price: HourlySeries, renewable: HourlySeries,
                background: HourlySeries) -> DataWindow:
    """Assemble a DataWindow from three ingested series, trimming nothing:
    the caller is responsible for alignment and whole-day coverage."""
    if len(price) % HOURS_PER_DAY != 0:
        raise ValueError("series length must be a multiple of 24 hours")
    return DataWindow(
        price=price,
        renewable=renewable,
        background=background,
        days=len(price) // HOURS_PER_DAY,
    )


def align_series(price: HourlySeries, renewable: HourlySeries,
                 background: HourlySeries) -> DataWindow:
    """Trim three ingested series to their common hour range, truncated to
    whole days from the common start."""
    start = max(s.start_hour for s in (price, renewable, background))
    end = min(s.start_hour + len(s) for s in (price, renewable, background))
    days = (end - start) // HOURS_PER_DAY
    if days < 1:
        raise WindowMismatch("series overlap shorter than one day")

    def trim(series: HourlySeries) -> HourlySeries:
        lo = start - series.start_hour
        return HourlySeries(start, series.values[lo:lo + days * HOURS_PER_DAY])

    return DataWindow(
        price=trim(price),
        renewable=trim(renewable),
        background=trim(background),
        days=days,
    )
