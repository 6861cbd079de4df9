"""Synthetic hourly candle generators for tests and demos.

`ar1_pattern_series` produces a price path whose hourly log-returns follow a
mean-reverting AR(1) plus a faint time-of-day drift pattern, so direction is
genuinely learnable from short-window indicators while still looking like FX
noise. The negative AR coefficient makes consecutive moves anti-correlated
(the textbook mean-reversion signature).
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .timeseries import Candle, Series

_EPOCH = datetime(2013, 1, 1, tzinfo=timezone.utc)


def candles_from_closes(
    closes: np.ndarray,
    spread: float = 0.0004,
    start: datetime = _EPOCH,
    rng: np.random.Generator | None = None,
) -> Series:
    """Wrap a close path into hourly candles with a small high/low halo."""
    rng = rng or np.random.default_rng(0)
    n = len(closes)
    opens = np.concatenate(([closes[0]], closes[:-1]))
    halo = spread * (1.0 + rng.random(n))
    highs = np.maximum(opens, closes) + halo * closes
    lows = np.minimum(opens, closes) - halo * closes
    return Series(
        tuple(
            Candle(start + timedelta(hours=i), float(opens[i]), float(highs[i]), float(lows[i]), float(closes[i]))
            for i in range(n)
        )
    )


def ar1_pattern_series(
    n: int,
    phi: float = -0.45,
    sigma: float = 0.0012,
    pattern_amplitude: float = 0.0003,
    start_price: float = 1.10,
    seed: int = 0,
) -> Series:
    """AR(1) hourly returns with a sinusoidal time-of-day drift pattern."""
    rng = np.random.default_rng(seed)
    eps = rng.normal(scale=sigma, size=n)
    hours = np.arange(n) % 24
    drift = pattern_amplitude * np.sin(2.0 * np.pi * hours / 24.0)
    r = np.zeros(n)
    for t in range(1, n):
        r[t] = phi * r[t - 1] + eps[t] + drift[t]
    closes = start_price * np.exp(np.cumsum(r))
    return candles_from_closes(closes, rng=rng, start=_EPOCH)


def random_walk_series(n: int, sigma: float = 0.001, start_price: float = 1.10, seed: int = 0) -> Series:
    """Pure random walk: direction carries no learnable signal."""
    rng = np.random.default_rng(seed)
    closes = start_price * np.exp(np.cumsum(rng.normal(scale=sigma, size=n)))
    return candles_from_closes(closes, rng=rng, start=_EPOCH)


def separable_features(n: int, n_features: int = 3, gap: float = 8.0, seed: int = 0):
    """Feature rows with classes separated far beyond their spread."""
    rng = np.random.default_rng(seed)
    y = (np.arange(n) % 2).astype(int)
    X = rng.normal(size=(n, n_features)) + gap * y[:, None]
    return X, y
