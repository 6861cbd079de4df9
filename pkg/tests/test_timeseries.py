from __future__ import annotations

from datetime import timedelta

import numpy as np
import pytest

from fxlab.errors import (
    EmptySplit,
    MalformedRow,
    NonMonotonicTimestamp,
    NonPositivePrice,
    SeriesTooShort,
)
from fxlab.timeseries import (
    SplitSpec,
    export_csv,
    ingest_csv,
    ingest_csv_text,
    label,
    split,
)

from conftest import EPOCH, make_series, random_series

HEADER = "timestamp,open,high,low,close"


def csv_text(rows):
    return "\n".join([HEADER] + rows) + "\n"


VALID_3 = csv_text(
    [
        "2013-01-01T00:00:00Z,1.10,1.11,1.09,1.105",
        "2013-01-01T01:00:00Z,1.105,1.12,1.10,1.11",
        "2013-01-01T02:00:00Z,1.11,1.115,1.095,1.10",
    ]
)


class TestIngest:
    def test_three_valid_rows(self):
        series = ingest_csv_text(VALID_3)
        assert len(series) == 3
        assert series.timestamps[0] < series.timestamps[1] < series.timestamps[2]
        assert series.closes.tolist() == [1.105, 1.11, 1.10]

    def test_high_below_low_is_malformed(self):
        text = csv_text(
            [
                "2013-01-01T00:00:00Z,1.10,1.11,1.09,1.105",
                "2013-01-01T01:00:00Z,1.105,1.09,1.12,1.11",
            ]
        )
        with pytest.raises(MalformedRow) as exc:
            ingest_csv_text(text)
        assert exc.value.line == 3

    def test_nonpositive_price(self):
        text = csv_text(
            [
                "2013-01-01T00:00:00Z,1.10,1.11,1.09,1.105",
                "2013-01-01T01:00:00Z,1.105,1.12,-1.0,1.11",
            ]
        )
        with pytest.raises(NonPositivePrice) as exc:
            ingest_csv_text(text)
        assert exc.value.line == 3

    def test_unsorted_timestamps_rejected(self):
        text = csv_text(
            [
                "2013-01-01T02:00:00Z,1.10,1.11,1.09,1.105",
                "2013-01-01T01:00:00Z,1.105,1.12,1.10,1.11",
            ]
        )
        with pytest.raises(NonMonotonicTimestamp) as exc:
            ingest_csv_text(text)
        assert exc.value.line == 3

    def test_duplicate_timestamps_rejected(self):
        text = csv_text(
            [
                "2013-01-01T00:00:00Z,1.10,1.11,1.09,1.105",
                "2013-01-01T00:00:00Z,1.105,1.12,1.10,1.11",
            ]
        )
        with pytest.raises(NonMonotonicTimestamp):
            ingest_csv_text(text)

    def test_bad_column_count(self):
        with pytest.raises(MalformedRow):
            ingest_csv_text(csv_text(["2013-01-01T00:00:00Z,1.1,1.2,1.0"]))

    def test_bad_header(self):
        with pytest.raises(MalformedRow) as exc:
            ingest_csv_text("time,o,h,l,c\n")
        assert exc.value.line == 1

    def test_unparseable_number(self):
        with pytest.raises(MalformedRow):
            ingest_csv_text(csv_text(["2013-01-01T00:00:00Z,1.1,1.2,1.0,abc"]))

    def test_roundtrip_bit_identical(self, tmp_path):
        series = random_series(50, seed=7)
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        export_csv(series, p1)
        again = ingest_csv(p1)
        assert again == series
        export_csv(again, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestLabel:
    def test_positive_variation(self):
        assert label(make_series([1.10, 1.11])).labels == (1,)

    def test_zero_variation_is_up(self):
        assert label(make_series([1.10, 1.10])).labels == (1,)

    def test_sign_of_difference(self):
        assert label(make_series([1.10, 1.09, 1.12])).labels == (0, 1)

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            make_series([1.10])

    def test_length_invariant(self):
        for n in (2, 5, 31):
            series = random_series(n, seed=n)
            assert len(label(series).labels) == n - 1


class TestSplit:
    def test_paper_row_counts(self):
        # 25908 hourly rows at 0.8 -> 20726 train + 5182 validation
        series = random_series(25908, seed=1)
        train, validation = split(label(series), SplitSpec(0.8))
        assert len(train.series) == 20726
        assert len(validation.series) == 5182

    def test_exact_fraction(self):
        train, validation = split(label(random_series(10, seed=2)), SplitSpec(0.8))
        assert len(train.series) == 8
        assert len(validation.series) == 2

    def test_degenerate_split(self):
        with pytest.raises(EmptySplit):
            split(label(random_series(5, seed=3)), SplitSpec(0.99))

    def test_chronology_preserved(self):
        train, validation = split(label(random_series(40, seed=4)), SplitSpec(0.7))
        assert max(train.series.timestamps) < min(validation.series.timestamps)

    def test_boundary_label_belongs_to_neither(self):
        series = random_series(20, seed=5)
        labeled = label(series)
        train, validation = split(labeled, SplitSpec(0.5))
        assert len(train.labels) + len(validation.labels) == len(labeled.labels) - 1


def test_timestamps_hourly_grid():
    series = random_series(5, seed=0)
    assert series.timestamps[1] - series.timestamps[0] == timedelta(hours=1)
    assert series.timestamps[0] == EPOCH


def test_gap_in_grid_accepted():
    base = random_series(4, seed=0)
    candles = list(base.candles)
    shifted = candles[2].__class__(
        candles[2].timestamp + timedelta(hours=50),
        candles[2].open,
        candles[2].high,
        candles[2].low,
        candles[2].close,
    )
    from fxlab.timeseries import Series

    gappy = Series((candles[0], candles[1], shifted))
    assert len(gappy) == 3
