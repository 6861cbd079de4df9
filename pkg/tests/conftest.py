from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from fxlab.timeseries import Candle, Series

EPOCH = datetime(2013, 1, 1, tzinfo=timezone.utc)


def make_series(closes, highs=None, lows=None, opens=None, start=EPOCH):
    """Build an hourly Series around a close path; halo defaults keep candles valid."""
    closes = np.asarray(closes, dtype=float)
    n = len(closes)
    opens = np.asarray(opens, dtype=float) if opens is not None else np.concatenate(([closes[0]], closes[:-1]))
    highs = np.asarray(highs, dtype=float) if highs is not None else np.maximum(opens, closes) * 1.0005
    lows = np.asarray(lows, dtype=float) if lows is not None else np.minimum(opens, closes) * 0.9995
    return Series(
        tuple(
            Candle(start + timedelta(hours=i), float(opens[i]), float(highs[i]), float(lows[i]), float(closes[i]))
            for i in range(n)
        )
    )


def random_series(n, seed=0, sigma=0.004, start_price=1.1):
    rng = np.random.default_rng(seed)
    closes = start_price * np.exp(np.cumsum(rng.normal(scale=sigma, size=n)))
    opens = np.concatenate(([closes[0]], closes[:-1]))
    body_hi = np.maximum(opens, closes)
    body_lo = np.minimum(opens, closes)
    highs = body_hi + rng.uniform(0, sigma, n) * body_hi
    lows = body_lo - rng.uniform(0, sigma, n) * body_lo
    return make_series(closes, highs=highs, lows=lows, opens=opens)


@pytest.fixture
def small_series():
    return random_series(60, seed=42)
