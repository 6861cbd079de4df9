"""Hourly OHLC candles: ingestion, validation, binary labels, chronological split.

The binary label for bar t is 1 when ``close_t - close_{t-1} >= 0`` and 0
otherwise; a zero variation counts as an up move. ``LabeledSeries.labels[i]``
is the label of the movement from candle ``i`` into candle ``i+1``, so a
feature row computed at bar ``i`` is paired with ``labels[i]`` when training
a next-hour classifier.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    EmptySplit,
    MalformedRow,
    NonMonotonicTimestamp,
    NonPositivePrice,
    SeriesTooShort,
)

CSV_HEADER = ("timestamp", "open", "high", "low", "close")


def _parse_timestamp(raw: str) -> datetime:
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class Candle:
    """One hourly OHLC observation; prices are dimensionless quote ratios."""

    timestamp: datetime
    open: float
    high: float
    low: float
    close: float

    def validate(self) -> str | None:
        """Return a human-readable problem description, or None if valid."""
        prices = (self.open, self.high, self.low, self.close)
        if not all(np.isfinite(p) for p in prices):
            return "non-finite price"
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            return "open/close outside [low, high]"
        if self.low > self.high:
            return "low above high"
        return None


@dataclass(frozen=True)
class Series:
    """Ordered candles with strictly increasing timestamps, length >= 2."""

    candles: tuple[Candle, ...]

    def __post_init__(self):
        if len(self.candles) < 2:
            raise SeriesTooShort(f"need at least 2 candles, got {len(self.candles)}")
        for i, c in enumerate(self.candles):
            problem = c.validate()
            if problem is not None:
                raise ValueError(f"candle {i}: {problem}")
            if min(c.open, c.high, c.low, c.close) <= 0:
                raise ValueError(f"candle {i}: price <= 0")
            if i > 0 and c.timestamp <= self.candles[i - 1].timestamp:
                raise ValueError(f"candle {i}: timestamp not strictly increasing")

    def __len__(self) -> int:
        return len(self.candles)

    @cached_property
    def opens(self) -> np.ndarray:
        return np.array([c.open for c in self.candles])

    @cached_property
    def highs(self) -> np.ndarray:
        return np.array([c.high for c in self.candles])

    @cached_property
    def lows(self) -> np.ndarray:
        return np.array([c.low for c in self.candles])

    @cached_property
    def closes(self) -> np.ndarray:
        return np.array([c.close for c in self.candles])

    @cached_property
    def timestamps(self) -> tuple[datetime, ...]:
        return tuple(c.timestamp for c in self.candles)

    def slice(self, start: int, stop: int | None = None) -> "Series":
        return Series(self.candles[start:stop])


@dataclass(frozen=True)
class LabeledSeries:
    """A series plus next-bar direction labels (one fewer than candles)."""

    series: Series
    labels: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(self.labels) != len(self.series) - 1:
            raise ValueError("labels must have length len(series) - 1")

    def __len__(self) -> int:
        return len(self.series)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train fraction; the remainder is held-out validation."""

    train_fraction: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


class CsvLayout:
    """Canonical interchange layout: header, ISO-8601 UTC timestamps, '.' decimals."""

    header = CSV_HEADER


def ingest_csv(path: str | Path, layout: CsvLayout | None = None) -> Series:
    """Read a candle CSV, enforcing the header, candle invariants and time order.

    Raises MalformedRow / NonPositivePrice / NonMonotonicTimestamp with the
    offending 1-based line number. Input must already be sorted strictly
    ascending by timestamp; duplicates count as non-monotonic.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        return _ingest(fh)


def _ingest(fh: Iterable[str]) -> Series:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise MalformedRow(1, f"expected header {','.join(CSV_HEADER)}")

    candles: list[Candle] = []
    prev_ts: datetime | None = None
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise MalformedRow(lineno, f"expected 5 columns, got {len(row)}")
        try:
            ts = _parse_timestamp(row[0])
            o, h, l, c = (float(v) for v in row[1:])
        except ValueError as exc:
            raise MalformedRow(lineno, f"unparseable value ({exc})") from None
        candle = Candle(ts, o, h, l, c)
        if not all(np.isfinite(p) and p > 0 for p in (o, h, l, c)):
            if all(np.isfinite(p) for p in (o, h, l, c)):
                raise NonPositivePrice(lineno, "price <= 0")
            raise MalformedRow(lineno, "non-finite price")
        problem = candle.validate()
        if problem is not None:
            raise MalformedRow(lineno, problem)
        if prev_ts is not None and ts <= prev_ts:
            raise NonMonotonicTimestamp(lineno, "timestamp not strictly increasing")
        prev_ts = ts
        candles.append(candle)
    if len(candles) < 2:
        raise SeriesTooShort(f"need at least 2 rows, got {len(candles)}")
    return Series(tuple(candles))


def ingest_csv_text(text: str) -> Series:
    return _ingest(io.StringIO(text))


def export_csv(series: Series, path: str | Path) -> None:
    """Write the canonical CSV layout; ingest(export(s)) reproduces s exactly."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in series.candles:
            writer.writerow(
                [_format_timestamp(c.timestamp), repr(c.open), repr(c.high), repr(c.low), repr(c.close)]
            )


def label(series: Series) -> LabeledSeries:
    """Label every close-to-close movement: 1 for >= 0 variation, else 0."""
    if len(series) < 2:
        raise SeriesTooShort("labeling needs at least 2 candles")
    closes = series.closes
    labels = tuple(int(d >= 0) for d in np.diff(closes))
    return LabeledSeries(series, labels)


def split(labeled: LabeledSeries, spec: SplitSpec) -> tuple[LabeledSeries, LabeledSeries]:
    """Chronological split: first floor(fraction * N) candles train, rest validate.

    Each side is re-labeled within itself, so the label of the boundary
    movement (last train close to first validation close) belongs to neither.
    """
    n = len(labeled.series)
    k = int(np.floor(spec.train_fraction * n))
    if k < 2 or n - k < 2:
        raise EmptySplit(f"split of {n} rows at {spec.train_fraction} leaves a side too small")
    train = label(labeled.series.slice(0, k))
    validation = label(labeled.series.slice(k))
    return train, validation
