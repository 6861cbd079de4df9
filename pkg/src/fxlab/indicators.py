"""Windowed price transforms used as classifier inputs.

Six indicators, each returning one per-bar column over a Series with NaN
during warm-up. Variant choices (all made so columns stay scale-stationary
on a ratio price series):

- RSI and ATR use Wilder smoothing (factor 1/n, seeded with the plain mean
  of the first window).
- MACD EMAs use factor 2/(n+1), seeded with the SMA of the first window;
  the returned feature is the histogram (line minus its signal EMA).
- Stochastic returns %D, the p2-bar SMA of %K.
- ATR is divided by the close so the column is scale-free.

Degenerate windows map to neutral midpoints: RSI 50 when the window saw no
movement, %K 50 when the window range is zero, CCI 0 when the mean absolute
deviation is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

from .errors import BadWindowOrder, InsufficientHistory, WindowTooLong
from .timeseries import Series

WINDOW_MIN = 2
WINDOW_MAX = 200


class IndicatorKind(str, Enum):
    RSI = "RSI"
    CCI = "CCI"
    MACD = "MACD"
    ROC = "ROC"
    STOCH = "STOCH"
    ATR = "ATR"


@dataclass(frozen=True)
class IndicatorSpec:
    """One indicator with its window parameters.

    Which windows matter depends on the kind: RSI/CCI/ROC/ATR use p1 only,
    STOCH uses p1 (lookback) and p2 (smoothing), MACD uses p1 (fast),
    p2 (slow) and p3 (signal) and requires p1 < p2.
    """

    kind: IndicatorKind
    p1: int
    p2: int = WINDOW_MIN
    p3: int = WINDOW_MIN

    def __post_init__(self):
        for name, p in (("p1", self.p1), ("p2", self.p2), ("p3", self.p3)):
            if not WINDOW_MIN <= p <= WINDOW_MAX:
                raise ValueError(f"{name}={p} outside [{WINDOW_MIN}, {WINDOW_MAX}]")
        if self.kind is IndicatorKind.MACD and self.p1 >= self.p2:
            raise BadWindowOrder(f"MACD fast window {self.p1} must be < slow window {self.p2}")

    def warmup(self) -> int:
        """First 0-based bar index at which the column is defined."""
        k = self.kind
        if k is IndicatorKind.RSI or k is IndicatorKind.ROC:
            return self.p1
        if k is IndicatorKind.CCI or k is IndicatorKind.ATR:
            return self.p1 - 1
        if k is IndicatorKind.STOCH:
            return self.p1 + self.p2 - 2
        return self.p2 + self.p3 - 2  # MACD histogram

    def label(self) -> str:
        k = self.kind
        if k is IndicatorKind.MACD:
            return f"MACD({self.p1},{self.p2},{self.p3})"
        if k is IndicatorKind.STOCH:
            return f"STOCH({self.p1},{self.p2})"
        return f"{k.value}({self.p1})"


# Baseline parameterization: the defaults the technical-analysis literature
# attaches to each indicator.
DEFAULT_SPECS = (
    IndicatorSpec(IndicatorKind.RSI, 14),
    IndicatorSpec(IndicatorKind.CCI, 20),
    IndicatorSpec(IndicatorKind.MACD, 12, 26, 9),
    IndicatorSpec(IndicatorKind.ROC, 12),
    IndicatorSpec(IndicatorKind.STOCH, 14, 3),
    IndicatorSpec(IndicatorKind.ATR, 14),
)


def _sma_seeded_recursive(x: np.ndarray, window: int, alpha: float) -> np.ndarray:
    """EMA-style recursion y_t = a*x_t + (1-a)*y_{t-1}, seeded with the mean
    of the first `window` values. NaN before index window-1."""
    n = len(x)
    out = np.full(n, np.nan)
    if n < window:
        return out
    seed = float(np.mean(x[:window]))
    out[window - 1] = seed
    tail = x[window:]
    if tail.size:
        filtered, _ = lfilter([alpha], [1.0, alpha - 1.0], tail, zi=np.array([(1.0 - alpha) * seed]))
        out[window:] = filtered
    return out


def _rolling_mean(x: np.ndarray, window: int) -> np.ndarray:
    out = np.full(len(x), np.nan)
    if len(x) >= window:
        out[window - 1:] = sliding_window_view(x, window).mean(axis=1)
    return out


def _require_valid(column: np.ndarray, first_valid: int, what: str) -> np.ndarray:
    if first_valid >= len(column):
        raise WindowTooLong(f"{what}: warm-up {first_valid} exceeds series length {len(column)}")
    return column


def rsi(series: Series, p1: int) -> np.ndarray:
    """Wilder RSI over close-to-close changes; 50 when the window is flat."""
    closes = series.closes
    deltas = np.diff(closes)
    gains = np.where(deltas > 0, deltas, 0.0)
    losses = np.where(deltas < 0, -deltas, 0.0)
    avg_gain = _sma_seeded_recursive(gains, p1, 1.0 / p1)
    avg_loss = _sma_seeded_recursive(losses, p1, 1.0 / p1)
    out = np.full(len(closes), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        value = 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    value = np.where(avg_loss == 0.0, np.where(avg_gain == 0.0, 50.0, 100.0), value)
    value[np.isnan(avg_gain)] = np.nan
    out[1:] = value
    return _require_valid(out, p1, f"RSI({p1})")


def cci(series: Series, p1: int) -> np.ndarray:
    """Commodity Channel Index on the typical price; 0 when deviation is zero."""
    tp = (series.highs + series.lows + series.closes) / 3.0
    out = np.full(len(tp), np.nan)
    if len(tp) >= p1:
        windows = sliding_window_view(tp, p1)
        sma = windows.mean(axis=1)
        mad = np.abs(windows - sma[:, None]).mean(axis=1)
        num = tp[p1 - 1:] - sma
        with np.errstate(invalid="ignore", divide="ignore"):
            value = num / (0.015 * mad)
        out[p1 - 1:] = np.where(mad == 0.0, 0.0, value)
    return _require_valid(out, p1 - 1, f"CCI({p1})")


def macd(series: Series, p1: int, p2: int, p3: int) -> np.ndarray:
    """MACD histogram: EMA(close,p1) - EMA(close,p2), minus its p3-bar EMA."""
    if p1 >= p2:
        raise BadWindowOrder(f"MACD fast window {p1} must be < slow window {p2}")
    closes = series.closes
    line = _sma_seeded_recursive(closes, p1, 2.0 / (p1 + 1.0)) - _sma_seeded_recursive(
        closes, p2, 2.0 / (p2 + 1.0)
    )
    out = np.full(len(closes), np.nan)
    defined = line[p2 - 1:]
    if len(defined) >= p3:
        signal = _sma_seeded_recursive(defined, p3, 2.0 / (p3 + 1.0))
        out[p2 - 1:] = defined - signal
    return _require_valid(out, p2 + p3 - 2, f"MACD({p1},{p2},{p3})")


def roc(series: Series, p1: int) -> np.ndarray:
    """Rate of change: percent move of the close over p1 bars."""
    closes = series.closes
    out = np.full(len(closes), np.nan)
    if len(closes) > p1:
        out[p1:] = 100.0 * (closes[p1:] - closes[:-p1]) / closes[:-p1]
    return _require_valid(out, p1, f"ROC({p1})")


def stochastic(series: Series, p1: int, p2: int) -> np.ndarray:
    """%D: the p2-bar SMA of %K over a p1-bar high/low range; %K=50 on flat range."""
    n = len(series)
    out = np.full(n, np.nan)
    if n >= p1:
        hh = sliding_window_view(series.highs, p1).max(axis=1)
        ll = sliding_window_view(series.lows, p1).min(axis=1)
        span = hh - ll
        with np.errstate(invalid="ignore", divide="ignore"):
            k = 100.0 * (series.closes[p1 - 1:] - ll) / span
        k = np.where(span == 0.0, 50.0, k)
        d = _rolling_mean(k, p2)
        out[p1 - 1:] = d
    return _require_valid(out, p1 + p2 - 2, f"STOCH({p1},{p2})")


def atr(series: Series, p1: int) -> np.ndarray:
    """Wilder-smoothed true range, divided by the close to stay scale-free."""
    highs, lows, closes = series.highs, series.lows, series.closes
    tr = highs - lows
    if len(closes) > 1:
        prev_close = closes[:-1]
        tr = np.concatenate(
            (
                tr[:1],
                np.maximum.reduce(
                    [highs[1:] - lows[1:], np.abs(highs[1:] - prev_close), np.abs(lows[1:] - prev_close)]
                ),
            )
        )
    smoothed = _sma_seeded_recursive(tr, p1, 1.0 / p1)
    return _require_valid(smoothed / closes, p1 - 1, f"ATR({p1})")


def compute(series: Series, spec: IndicatorSpec) -> np.ndarray:
    k = spec.kind
    if k is IndicatorKind.RSI:
        return rsi(series, spec.p1)
    if k is IndicatorKind.CCI:
        return cci(series, spec.p1)
    if k is IndicatorKind.MACD:
        return macd(series, spec.p1, spec.p2, spec.p3)
    if k is IndicatorKind.ROC:
        return roc(series, spec.p1)
    if k is IndicatorKind.STOCH:
        return stochastic(series, spec.p1, spec.p2)
    return atr(series, spec.p1)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-bar indicator vectors; rows before valid_from are warm-up."""

    specs: tuple[IndicatorSpec, ...]
    values: np.ndarray  # shape (n_bars, n_specs), NaN during warm-up
    valid_from: int

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def training_arrays(self, labels: tuple[int, ...] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Pair feature rows with next-bar labels.

        Row t predicts labels[t] (the movement from bar t into bar t+1), so
        usable rows run from valid_from through the second-to-last bar.
        """
        n = self.values.shape[0]
        labels = np.asarray(labels)
        if len(labels) != n - 1:
            raise ValueError("labels must have length n_bars - 1")
        return self.values[self.valid_from : n - 1], labels[self.valid_from :]


def build_matrix(series: Series, specs: list[IndicatorSpec] | tuple[IndicatorSpec, ...]) -> FeatureMatrix:
    """Assemble columns in spec order; valid_from is the longest warm-up."""
    if not specs:
        raise ValueError("specs must be non-empty")
    try:
        columns = [compute(series, s) for s in specs]
    except WindowTooLong as exc:
        raise InsufficientHistory(str(exc)) from exc
    valid_from = max(s.warmup() for s in specs)
    if valid_from >= len(series) - 1:
        raise InsufficientHistory(
            f"warm-up {valid_from} leaves no trainable rows in {len(series)} bars"
        )
    return FeatureMatrix(tuple(specs), np.column_stack(columns), valid_from)
