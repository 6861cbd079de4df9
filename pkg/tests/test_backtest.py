from __future__ import annotations

from datetime import timedelta

import numpy as np
import pytest

from fxlab import backtest
from fxlab.backtest import annualize, max_drawdown, metrics_table, simulate
from fxlab.cv import Decision
from fxlab.errors import MisalignedDecisions

import oracles
from conftest import make_series, random_series


def months(m: float) -> timedelta:
    return timedelta(days=365.25 * m / 12.0)


CLOSES_10 = [1.0000, 1.0100, 1.0050, 1.0200, 1.0150, 1.0100, 1.0200, 1.0150, 1.0250, 1.0300]


def ten_bar_series():
    return make_series(CLOSES_10)


def ten_bar_decisions(series):
    ts = series.timestamps
    plan = {0: "buy", 2: "buy", 4: "buy", 5: "sell", 7: "sell"}
    return [Decision(ts[i], plan.get(i, "none"), 0.8) for i in range(9)]


class TestSimulate:
    def test_buy_return_formula(self):
        series = make_series([1.1000, 1.1011])
        report = simulate(series, [Decision(series.timestamps[0], "buy", 0.9)])
        assert report.trades[0].ret == pytest.approx(0.001, abs=1e-12)

    def test_sell_return_sign_flip(self):
        series = make_series([1.1000, 1.1011])
        report = simulate(series, [Decision(series.timestamps[0], "sell", 0.1)])
        assert report.trades[0].ret == pytest.approx(-0.001, abs=1e-12)

    def test_ten_bar_hand_scenario(self):
        series = ten_bar_series()
        report = simulate(series, ten_bar_decisions(series))
        assert len(report.trades) == 5

        buy_expected = (
            (1.0100 - 1.0000) / 1.0000
            + (1.0200 - 1.0050) / 1.0050
            + (1.0100 - 1.0150) / 1.0150
        ) * 100.0
        sell_expected = (
            -(1.0200 - 1.0100) / 1.0100
            - (1.0250 - 1.0150) / 1.0150
        ) * 100.0
        assert report.buy_roi == buy_expected
        assert report.sell_roi == sell_expected
        assert report.roi == buy_expected + sell_expected
        assert report.curve.combined[-1] == report.roi

        # drawdown: peak right after the second buy credit, trough at bar 8
        assert report.drawdown_peak == 3
        assert report.drawdown_trough == 8
        expected_dd = report.curve.combined[8] - report.curve.combined[3]
        assert report.max_drawdown == expected_dd
        assert report.max_drawdown == pytest.approx(-2.4679315222162594, abs=1e-10)

    def test_decision_on_final_bar_rejected(self):
        series = ten_bar_series()
        with pytest.raises(MisalignedDecisions):
            simulate(series, [Decision(series.timestamps[-1], "buy", 0.9)])

    def test_unknown_timestamp_rejected(self):
        series = ten_bar_series()
        with pytest.raises(MisalignedDecisions):
            simulate(series, [Decision(series.timestamps[0] + timedelta(minutes=7), "buy", 0.9)])

    def test_zero_accepted_gives_flat_report(self):
        series = ten_bar_series()
        report = simulate(series, [Decision(series.timestamps[0], "none", 0.5)])
        assert report.roi == 0.0
        assert report.max_drawdown == 0.0
        assert len(report.trades) == 0

    def test_antisymmetry_under_decision_flip(self):
        series = random_series(50, seed=31)
        rng = np.random.default_rng(31)
        actions = rng.choice(["buy", "sell", "none"], size=49)
        ts = series.timestamps
        decisions = [Decision(ts[i], a, 0.5) for i, a in enumerate(actions)]
        flipped = [
            Decision(d.timestamp, {"buy": "sell", "sell": "buy", "none": "none"}[d.action], 0.5)
            for d in decisions
        ]
        a = simulate(series, decisions)
        b = simulate(series, flipped)
        assert a.roi == pytest.approx(-b.roi, abs=1e-9)
        for ta, tb in zip(a.trades, b.trades):
            assert ta.ret == pytest.approx(-tb.ret, abs=1e-12)

    def test_combined_curve_is_sum(self):
        series = random_series(60, seed=32)
        rng = np.random.default_rng(32)
        ts = series.timestamps
        decisions = [Decision(ts[i], rng.choice(["buy", "sell"]), 0.5) for i in range(59)]
        report = simulate(series, decisions)
        assert np.allclose(report.curve.combined, report.curve.buy + report.curve.sell, atol=1e-12)
        assert report.roi == pytest.approx(report.buy_roi + report.sell_roi, abs=1e-12)

    def test_cost_subtracted_per_trade(self):
        series = make_series([1.1000, 1.1011])
        report = simulate(series, [Decision(series.timestamps[0], "buy", 0.9)], cost=0.0004)
        assert report.trades[0].ret == pytest.approx(0.001 - 0.0004, abs=1e-12)


class TestMaxDrawdown:
    def test_monotone_increasing_zero(self):
        dd, peak, trough = max_drawdown(np.linspace(0, 5, 20))
        assert dd == 0.0

    def test_simple_case(self):
        dd, peak, trough = max_drawdown(np.array([0.0, 10.0, -5.0, 2.0]))
        assert (dd, peak, trough) == (-15.0, 1, 2)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_bruteforce(self, seed):
        rng = np.random.default_rng(seed)
        curve = np.cumsum(rng.normal(size=80))
        dd, peak, trough = max_drawdown(curve)
        exp_dd, exp_peak, exp_trough = oracles.oracle_max_drawdown(curve.tolist())
        assert dd == pytest.approx(exp_dd, abs=1e-12)
        assert curve[peak] - curve[trough] == pytest.approx(curve[exp_peak] - curve[exp_trough], abs=1e-12)


class TestAnnualize:
    @pytest.mark.parametrize(
        "roi,period_months,expected",
        [
            (28.53, 36, 9.51),
            (44.76, 36, 14.92),
            (0.43, 11, 0.47),
            (10.29, 11, 11.23),
        ],
    )
    def test_paper_pairs(self, roi, period_months, expected):
        assert annualize(roi, months(period_months)) == pytest.approx(expected, abs=0.01)

    def test_rejects_nonpositive_period(self):
        with pytest.raises(ValueError):
            annualize(1.0, timedelta(0))


class TestMetricsTable:
    def test_hand_built_confusion(self):
        ts = list(range(8))
        actions = ["buy", "buy", "buy", "sell", "sell", "sell", "none", "none"]
        labels = [1, 1, 0, 0, 1, 0, 1, 0]
        decisions = [Decision(t, a, 0.8) for t, a in zip(ts, actions)]
        table = metrics_table(decisions, labels)
        assert table[1]["precision"] == pytest.approx(2 / 3)
        assert table[0]["precision"] == pytest.approx(2 / 3)
        assert table[1]["recall"] == pytest.approx(0.5)
        assert table[0]["recall"] == pytest.approx(0.5)
        assert table["accuracy"] == pytest.approx(2 / 3)
        assert table["acceptance_rate"] == pytest.approx(0.75)

    def test_all_correct(self):
        decisions = [Decision(i, "buy" if l else "sell", 0.9) for i, l in enumerate([1, 0, 1, 0])]
        table = metrics_table(decisions, [1, 0, 1, 0])
        assert table[1]["hits"] == table[1]["predicted"] == 2
        assert table[0]["hits"] == table[0]["predicted"] == 2

    def test_all_rejected(self):
        decisions = [Decision(i, "none", 0.5) for i in range(4)]
        table = metrics_table(decisions, [1, 0, 1, 0])
        assert table["acceptance_rate"] == 0.0
        assert table[0]["precision"] == 0.0
        assert table[1]["recall"] == 0.0

    def test_misaligned(self):
        with pytest.raises(MisalignedDecisions):
            metrics_table([Decision(0, "buy", 0.9)], [1, 0])


class TestRejectionMonotonicity:
    def test_higher_threshold_never_more_trades(self):
        from fxlab import bayes

        rng = np.random.default_rng(33)
        X = np.concatenate(
            [rng.normal(-0.6, 1.0, size=(80, 3)), rng.normal(0.6, 1.0, size=(80, 3))]
        )
        y = np.array([0] * 80 + [1] * 80)
        model = bayes.fit(X, y)
        counts = []
        for thr in (0.5, 0.6, 0.7, 0.8, 0.9):
            preds = bayes.predict_many(bayes.RejectionModel(model, thr), X)
            counts.append(sum(p.decision.value != "rejected" for p in preds))
        assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestExports:
    def test_equity_csv_shape(self):
        series = ten_bar_series()
        report = simulate(series, ten_bar_decisions(series))
        text = backtest.equity_csv(series, report.curve, ["seed=0"])
        lines = text.strip().splitlines()
        assert lines[1] == "timestamp,buy,sell,combined"
        assert len(lines) == 2 + len(series)

    def test_equity_svg_marks_drawdown(self):
        series = ten_bar_series()
        report = simulate(series, ten_bar_decisions(series))
        svg = backtest.equity_svg(report, "test run")
        assert svg.count('fill="red"') >= 2
        assert "<svg" in svg and "</svg>" in svg

    def test_report_json_fields(self):
        series = ten_bar_series()
        report = simulate(series, ten_bar_decisions(series))
        doc = report.to_json()
        assert doc["n_trades"] == 5
        assert doc["max_drawdown"] <= 0
        assert "annualized_roi" in doc
