"""Hourly trading simulation over a decision stream.

Every accepted signal opens one unit of notional at that bar's close and
closes it at the next bar's close; a buy earns the fractional close-to-close
move, a sell earns its negative. Returns accumulate arithmetically (no
compounding, no leverage), so equity curves and ROI are plain sums expressed
in percentage points, and the combined curve is exactly buy + sell.

Annualization is simple proration of the ROI to a one-year span, not a
geometric rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .cv import Decision
from .errors import MisalignedDecisions
from .svgplot import line_chart
from .timeseries import Series

YEAR = timedelta(days=365.25)


@dataclass(frozen=True)
class Trade:
    open_timestamp: datetime | int
    direction: str  # "buy" | "sell"
    entry: float
    exit: float
    ret: float  # signed fraction, costs already subtracted


@dataclass(frozen=True)
class EquityCurve:
    """Cumulative percentage-point returns per bar of the simulated window."""

    buy: np.ndarray
    sell: np.ndarray
    combined: np.ndarray

    def __len__(self) -> int:
        return len(self.combined)


@dataclass
class BacktestReport:
    trades: list[Trade]
    curve: EquityCurve
    roi: float                    # percentage points, == curve.combined[-1]
    annualized_roi: float
    max_drawdown: float           # percentage points, <= 0
    drawdown_peak: int            # bar index into the curve
    drawdown_trough: int
    drawdown_peak_timestamp: datetime | int | None = None
    drawdown_trough_timestamp: datetime | int | None = None
    buy_roi: float = 0.0
    sell_roi: float = 0.0
    acceptance_rate: float = 0.0
    per_class: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def ts(v):
            if isinstance(v, datetime):
                return v.isoformat().replace("+00:00", "Z")
            return v

        return {
            "n_trades": len(self.trades),
            "roi": self.roi,
            "annualized_roi": self.annualized_roi,
            "buy_roi": self.buy_roi,
            "sell_roi": self.sell_roi,
            "max_drawdown": self.max_drawdown,
            "drawdown_peak_timestamp": ts(self.drawdown_peak_timestamp),
            "drawdown_trough_timestamp": ts(self.drawdown_trough_timestamp),
            "acceptance_rate": self.acceptance_rate,
            "per_class": self.per_class,
        }


def simulate(series: Series, decisions: list[Decision], cost: float = 0.0) -> BacktestReport:
    """Run the one-bar-hold rule over the decision stream.

    Decisions must reference candle timestamps of `series`; an actionable
    decision on the final bar has no exit and is rejected as misaligned.
    `cost` is a per-trade fractional charge (e.g. 0.0001 for a pip-ish
    spread) subtracted from every trade's return.
    """
    index_of = {ts: i for i, ts in enumerate(series.timestamps)}
    if len(index_of) != len(series):
        raise MisalignedDecisions("duplicate timestamps in series")
    closes = series.closes
    n = len(series)
    buy_steps = np.zeros(n)
    sell_steps = np.zeros(n)
    trades: list[Trade] = []
    accepted = 0
    for d in decisions:
        if d.action == "none":
            continue
        if d.action not in ("buy", "sell"):
            raise MisalignedDecisions(f"unknown action {d.action!r}")
        i = index_of.get(d.timestamp)
        if i is None:
            raise MisalignedDecisions(f"decision timestamp {d.timestamp} not in series")
        if i >= n - 1:
            raise MisalignedDecisions("actionable decision on the final bar has no exit")
        accepted += 1
        move = (closes[i + 1] - closes[i]) / closes[i]
        ret = float(move if d.action == "buy" else -move) - cost
        trades.append(Trade(d.timestamp, d.action, float(closes[i]), float(closes[i + 1]), ret))
        if d.action == "buy":
            buy_steps[i + 1] += ret
        else:
            sell_steps[i + 1] += ret

    buy_curve = np.cumsum(buy_steps) * 100.0
    sell_curve = np.cumsum(sell_steps) * 100.0
    curve = EquityCurve(buy_curve, sell_curve, buy_curve + sell_curve)

    dd, peak, trough = max_drawdown(curve.combined)
    roi = float(curve.combined[-1])
    span = series.timestamps[-1] - series.timestamps[0]
    return BacktestReport(
        trades=trades,
        curve=curve,
        roi=roi,
        annualized_roi=annualize(roi, span),
        max_drawdown=dd,
        drawdown_peak=peak,
        drawdown_trough=trough,
        drawdown_peak_timestamp=series.timestamps[peak],
        drawdown_trough_timestamp=series.timestamps[trough],
        buy_roi=float(buy_curve[-1]),
        sell_roi=float(sell_curve[-1]),
        acceptance_rate=accepted / len(decisions) if decisions else 0.0,
    )


def max_drawdown(curve: np.ndarray) -> tuple[float, int, int]:
    """Most negative peak-to-subsequent-trough drop: (value, peak, trough)."""
    curve = np.asarray(curve, dtype=float)
    if curve.size == 0:
        raise ValueError("curve must be non-empty")
    best = 0.0
    best_peak = best_trough = 0
    run_peak = 0
    for j in range(len(curve)):
        if curve[j] > curve[run_peak]:
            run_peak = j
        dd = curve[j] - curve[run_peak]
        if dd < best:
            best, best_peak, best_trough = dd, run_peak, j
    return float(best), best_peak, best_trough


def annualize(roi: float, period: timedelta) -> float:
    """Prorate the ROI linearly onto a one-year span."""
    if period <= timedelta(0):
        raise ValueError("period must be positive")
    return roi * (YEAR / period)


def metrics_table(decisions: list[Decision], labels: list[int] | np.ndarray) -> dict:
    """Per-class precision/recall plus the ROI split by signal class.

    Precision is over accepted decisions of that class; recall keeps every
    row of the class in its denominator, so rejected rows count as misses.
    """
    if len(decisions) != len(labels):
        raise MisalignedDecisions(f"{len(decisions)} decisions vs {len(labels)} labels")
    y = np.asarray(labels)
    table: dict = {}
    class_of = {"sell": 0, "buy": 1}
    accepted_idx = [i for i, d in enumerate(decisions) if d.action != "none"]
    for action, c in class_of.items():
        pred_idx = [i for i in accepted_idx if decisions[i].action == action]
        tp = sum(1 for i in pred_idx if int(y[i]) == c)
        actual = int((y == c).sum())
        table[c] = {
            "precision": tp / len(pred_idx) if pred_idx else 0.0,
            "recall": tp / actual if actual else 0.0,
            "predicted": len(pred_idx),
            "hits": tp,
        }
    correct = sum(1 for i in accepted_idx if class_of[decisions[i].action] == int(y[i]))
    table["accepted"] = len(accepted_idx)
    table["accuracy"] = correct / len(accepted_idx) if accepted_idx else 0.0
    table["acceptance_rate"] = len(accepted_idx) / len(decisions) if decisions else 0.0
    return table


def attach_metrics(report: BacktestReport, decisions: list[Decision], labels) -> BacktestReport:
    table = metrics_table(decisions, labels)
    table[0]["roi"] = report.sell_roi
    table[1]["roi"] = report.buy_roi
    report.per_class = {str(k): v for k, v in table.items() if k in (0, 1)}
    report.per_class["accuracy"] = table["accuracy"]
    report.acceptance_rate = table["acceptance_rate"]
    return report


def equity_csv(series: Series, curve: EquityCurve, header_lines: list[str] | None = None) -> str:
    lines = [f"# {h}" for h in (header_lines or [])]
    lines.append("timestamp,buy,sell,combined")
    for ts, b, s, c in zip(series.timestamps, curve.buy, curve.sell, curve.combined):
        stamp = ts.isoformat().replace("+00:00", "Z") if isinstance(ts, datetime) else str(ts)
        lines.append(f"{stamp},{repr(float(b))},{repr(float(s))},{repr(float(c))}")
    return "\n".join(lines) + "\n"


def equity_svg(report: BacktestReport, title: str) -> str:
    series = {
        "combined": report.curve.combined.tolist(),
        "buy": report.curve.buy.tolist(),
        "sell": report.curve.sell.tolist(),
    }
    markers = [(report.drawdown_peak, "peak"), (report.drawdown_trough, "trough")]
    return line_chart(series, title, markers=markers)


def report_to_json_text(report: BacktestReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
