"""End-to-end runs: configuration, staging discipline, artifact writing.

A run is driven by one RunConfig (plain key=value text file plus overrides)
and one global seed. The validation split sits behind a staged handle that
counts accesses, so every report can prove the held-out data was read
exactly once, after all fitting and searching finished. All artifacts embed
the seed and a hash of the effective configuration, and contain nothing
non-deterministic, so a rerun with the same config is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import ClassVar

import numpy as np

from . import backtest, bayes, cv, ga, tsne
from .errors import ConfigError, EmptySplit, InsufficientHistory
from .indicators import DEFAULT_SPECS, build_matrix
from .timeseries import LabeledSeries, Series, ingest_csv, label

_ACTION = {"0": "sell", "1": "buy", "rejected": "none"}


@dataclass(frozen=True)
class RunConfig:
    data: str = ""
    out: str = "runs/out"
    seed: int = 0
    split_fraction: float = 0.8
    cv_folds: int = 7
    rejection_acceptance: float = 0.5
    trade_cost: float = 0.0
    ga_population: int = 64
    ga_generations: int = 60
    ga_crossover_rate: float = 0.9
    ga_mutation_rate: float = 0.05
    ga_hyper_mutation_rate: float = 0.25
    ga_replacement_rate: float = 0.1
    ga_slots: int = 12
    tsne_perplexity: float = 30.0
    tsne_iterations: int = 1000
    tsne_learning_rate: float = 200.0
    tsne_subsample: int = 5000

    # dotted names as they appear in config files
    _ALIASES: ClassVar[dict[str, str]] = {
        "ga.population": "ga_population",
        "ga.generations": "ga_generations",
        "ga.crossover_rate": "ga_crossover_rate",
        "ga.mutation_rate": "ga_mutation_rate",
        "ga.hyper_mutation_rate": "ga_hyper_mutation_rate",
        "ga.replacement_rate": "ga_replacement_rate",
        "ga.slots": "ga_slots",
        "tsne.perplexity": "tsne_perplexity",
        "tsne.iterations": "tsne_iterations",
        "tsne.learning_rate": "tsne_learning_rate",
        "tsne.subsample": "tsne_subsample",
    }

    def to_text(self) -> str:
        reverse = {v: k for k, v in self._ALIASES.items()}
        lines = []
        for f in fields(self):
            lines.append(f"{reverse.get(f.name, f.name)} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
        return cls().with_overrides(values)

    def with_overrides(self, overrides: dict) -> "RunConfig":
        by_name = {f.name: f for f in fields(self)}
        updates = {}
        for key, value in overrides.items():
            if value is None:
                continue
            name = self._ALIASES.get(key, key)
            f = by_name.get(name)
            if f is None:
                raise ConfigError(f"unknown config key: {key}")
            try:
                updates[name] = _coerce(f.type, value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
        cfg = replace(self, **updates)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("split_fraction must lie in (0, 1)")
        if not 0.0 < self.rejection_acceptance < 1.0:
            raise ConfigError("rejection_acceptance must lie in (0, 1)")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if self.trade_cost < 0:
            raise ConfigError("trade_cost must be >= 0")

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    def ga_config(self) -> ga.GaConfig:
        try:
            return ga.GaConfig(
                population_size=self.ga_population,
                generations=self.ga_generations,
                crossover_rate=self.ga_crossover_rate,
                mutation_rate=self.ga_mutation_rate,
                hyper_mutation_rate=self.ga_hyper_mutation_rate,
                replacement_rate=self.ga_replacement_rate,
                slots=self.ga_slots,
                rng_seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def tsne_config(self) -> tsne.EmbeddingConfig:
        try:
            return tsne.EmbeddingConfig(
                perplexity=self.tsne_perplexity,
                iterations=self.tsne_iterations,
                learning_rate=self.tsne_learning_rate,
                rng_seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def header_lines(self) -> list[str]:
        return [f"seed={self.seed}", f"config_hash={self.config_hash()}"]


def _coerce(annotation, value):
    if isinstance(value, str):
        text = value
        if annotation in ("int", int):
            return int(text)
        if annotation in ("float", float):
            return float(text)
        return text
    if annotation in ("int", int):
        return int(value)
    if annotation in ("float", float):
        return float(value)
    return str(value)


def load_config(path: str | None, overrides: dict) -> RunConfig:
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        cfg = RunConfig.from_text(p.read_text())
    else:
        cfg = RunConfig()
    return cfg.with_overrides(overrides)


class StagedData:
    """Chronological split whose validation side counts every access."""

    def __init__(self, series: Series, split_fraction: float):
        n = len(series)
        k = int(np.floor(split_fraction * n))
        if k < 2 or n - k < 2:
            raise EmptySplit(f"split of {n} rows at {split_fraction} leaves a side too small")
        self._series = series
        self.split_index = k
        self.validation_accesses = 0

    @property
    def train(self) -> LabeledSeries:
        return label(self._series.slice(0, self.split_index))

    def validation_rows(self, specs):
        """Feature rows over the validation window, labels, timestamps and the
        validation series. Indicator windows reach back into training candles
        (past data only), so no validation row is wasted on warm-up."""
        self.validation_accesses += 1
        series = self._series
        n = len(series)
        k = self.split_index
        fm = build_matrix(series, specs)
        if fm.valid_from >= k:
            raise InsufficientHistory("indicator warm-up spills past the training split")
        labels_full = label(series).labels
        X = fm.values[k : n - 1]
        y = np.asarray(labels_full[k : n - 1])
        timestamps = series.timestamps[k : n - 1]
        return X, y, timestamps, series.slice(k)


def ingest_check(data_path: str) -> dict:
    series = ingest_csv(data_path)
    labeled = label(series)
    ups = sum(labeled.labels)
    return {
        "rows": len(series),
        "first_timestamp": series.timestamps[0].isoformat().replace("+00:00", "Z"),
        "last_timestamp": series.timestamps[-1].isoformat().replace("+00:00", "Z"),
        "up_label_share": ups / len(labeled.labels),
        "mean_close": float(np.mean(series.closes)),
    }


def _evaluate_split(config: RunConfig, staged: StagedData, specs) -> dict:
    """CV on the training split, then one guarded pass over validation.

    Returns every report and decision stream the run commands share.
    """
    train_ls = staged.train
    fm = build_matrix(train_ls.series, specs)
    X, y = fm.training_arrays(train_ls.labels)
    timestamps = train_ls.series.timestamps[fm.valid_from : len(train_ls.series) - 1]

    report = cv.run_cv(
        X, y,
        k=config.cv_folds,
        rejection=True,
        acceptance=config.rejection_acceptance,
        timestamps=timestamps,
    )
    train_decisions = cv.out_of_fold_signal(report)
    bt_train = backtest.simulate(train_ls.series, train_decisions, config.trade_cost)
    backtest.attach_metrics(bt_train, train_decisions, y)

    model = bayes.fit(X, y)
    rmodel = bayes.calibrate_rejection(model, X, config.rejection_acceptance)

    Xv, yv, ts_v, val_series = staged.validation_rows(specs)
    val_preds = bayes.predict_many(rmodel, Xv)
    val_decisions = [
        cv.Decision(ts, _ACTION[p.decision.value], p.posterior) for ts, p in zip(ts_v, val_preds)
    ]
    bt_val = backtest.simulate(val_series, val_decisions, config.trade_cost)
    backtest.attach_metrics(bt_val, val_decisions, yv)

    return {
        "cv_report": report,
        "train_decisions": train_decisions,
        "bt_train": bt_train,
        "rmodel": rmodel,
        "val_decisions": val_decisions,
        "bt_val": bt_val,
        "train_series": train_ls.series,
        "val_series": val_series,
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_split_artifacts(config: RunConfig, out: Path, results: dict) -> list[str]:
    headers = config.header_lines()
    artifacts = {
        "cv_report.json": cv.report_to_json_text(results["cv_report"]),
        "train_signals.csv": cv.signals_to_csv(results["train_decisions"], headers),
        "validation_signals.csv": cv.signals_to_csv(results["val_decisions"], headers),
        "train_backtest.json": backtest.report_to_json_text(results["bt_train"]),
        "validation_backtest.json": backtest.report_to_json_text(results["bt_val"]),
        "train_equity.csv": backtest.equity_csv(
            results["train_series"], results["bt_train"].curve, headers
        ),
        "validation_equity.csv": backtest.equity_csv(
            results["val_series"], results["bt_val"].curve, headers
        ),
        "train_equity.svg": backtest.equity_svg(results["bt_train"], "market simulation: training (out-of-fold)"),
        "validation_equity.svg": backtest.equity_svg(results["bt_val"], "market simulation: held-out validation"),
        "model.json": _json_text(bayes.to_json(results["rmodel"])),
    }
    for name, text in artifacts.items():
        _write(out / name, text)
    return sorted(artifacts)


def _summary(results: dict) -> dict:
    report: cv.CvReport = results["cv_report"]
    bt_train: backtest.BacktestReport = results["bt_train"]
    bt_val: backtest.BacktestReport = results["bt_val"]
    return {
        "cv": {
            "mean_accuracy": report.mean_accuracy,
            "accuracy_dispersion": report.accuracy_dispersion,
            "acceptance_rate": report.acceptance_rate,
        },
        "train": bt_train.to_json(),
        "validation": bt_val.to_json(),
    }


def _finish(config: RunConfig, command: str, out: Path, artifacts: list[str], staged: StagedData, summary: dict, extra: dict | None = None) -> dict:
    manifest = {
        "command": command,
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "config_text": config.to_text(),
        "artifacts": sorted(artifacts),
        "validation_accesses": staged.validation_accesses,
        "train_signals_out_of_fold": True,
        "summary": summary,
    }
    if extra:
        manifest.update(extra)
    _write(out / "manifest.json", _json_text(manifest))
    return manifest


def run_baseline(config: RunConfig) -> dict:
    """Literature-default features: CV the rejection classifier on the train
    split, then score the held-out window once."""
    series = ingest_csv(config.data)
    staged = StagedData(series, config.split_fraction)
    results = _evaluate_split(config, staged, DEFAULT_SPECS)

    out = Path(config.out)
    artifacts = _write_split_artifacts(config, out, results)
    return _finish(config, "baseline", out, artifacts, staged, _summary(results))


def run_optimize(config: RunConfig) -> dict:
    """GA feature search on the train split, then a single validation pass
    with the best chromosome found."""
    series = ingest_csv(config.data)
    staged = StagedData(series, config.split_fraction)
    train_ls = staged.train

    ga_cfg = config.ga_config()
    fitness = ga.make_cv_fitness(train_ls, k=config.cv_folds, acceptance=config.rejection_acceptance)
    baseline = ga.baseline_chromosome(ga_cfg.slots)
    baseline_fitness = fitness(baseline)
    best, trace = ga.evolve(ga_cfg, fitness, seed_individuals=[baseline])

    results = _evaluate_split(config, staged, best.specs())

    out = Path(config.out)
    artifacts = _write_split_artifacts(config, out, results)
    _write(out / "ga_trace.csv", trace.to_csv(config.header_lines()))
    _write(out / "best_chromosome.json", _json_text(best.to_json()))
    artifacts += ["ga_trace.csv", "best_chromosome.json"]

    extra = {
        "baseline_fitness": baseline_fitness,
        "best_fitness": trace.max_fitness[-1],
        "generations": trace.generations() - 1,
    }
    return _finish(config, "optimize", out, artifacts, staged, _summary(results), extra)


def run_embed(config: RunConfig, chromosome_path: str) -> dict:
    """t-SNE map of the chromosome's feature rows on the training split,
    colored by out-of-fold posterior."""
    p = Path(chromosome_path)
    if not p.exists():
        raise ConfigError(f"chromosome file not found: {chromosome_path}")
    chromosome = ga.load_chromosome(p)

    series = ingest_csv(config.data)
    staged = StagedData(series, config.split_fraction)
    train_ls = staged.train
    fm = build_matrix(train_ls.series, chromosome.specs())
    X, y = fm.training_arrays(train_ls.labels)
    timestamps = train_ls.series.timestamps[fm.valid_from : len(train_ls.series) - 1]

    report = cv.run_cv(
        X, y,
        k=config.cv_folds,
        rejection=True,
        acceptance=config.rejection_acceptance,
        timestamps=timestamps,
    )
    posteriors = np.array([pred.posterior for pred in report.out_of_fold])

    tsne_cfg = config.tsne_config()
    keep, Y, kl_trace = tsne.embed(X, tsne_cfg, subsample_cap=config.tsne_subsample)
    kept_ts = [timestamps[i] for i in keep]
    headers = config.header_lines() + [
        f"perplexity={tsne_cfg.perplexity}",
        f"iterations={tsne_cfg.iterations}",
        f"learning_rate={tsne_cfg.learning_rate}",
        f"points={len(keep)}",
    ]
    out = Path(config.out)
    _write(out / "embedding.csv", tsne.export_csv(Y, posteriors[keep], kept_ts, headers))
    _write(out / "embedding.svg", tsne.export_svg(Y, posteriors[keep], "decision-surface embedding"))

    manifest = {
        "command": "embed",
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "config_text": config.to_text(),
        "artifacts": ["embedding.csv", "embedding.svg"],
        "points": len(keep),
        "final_kl": kl_trace[-1],
        "summary": {
            "points": len(keep),
            "final_kl": kl_trace[-1],
            "cv_mean_accuracy": report.mean_accuracy,
        },
    }
    _write(out / "manifest.json", _json_text(manifest))
    return manifest


def summarize(out_dir: str) -> dict:
    path = Path(out_dir) / "manifest.json"
    if not path.exists():
        raise ConfigError(f"no manifest.json under {out_dir}")
    return json.loads(path.read_text())


def render_summary(manifest: dict) -> str:
    lines = [
        f"command:        {manifest.get('command')}",
        f"seed:           {manifest.get('seed')}",
        f"config hash:    {manifest.get('config_hash')}",
    ]
    summary = manifest.get("summary", {})
    if "cv" in summary:
        cvs = summary["cv"]
        lines.append(
            f"cv accuracy:    {100 * cvs['mean_accuracy']:.1f}% +/- {100 * cvs['accuracy_dispersion']:.1f}%"
            f" (acceptance {100 * cvs['acceptance_rate']:.1f}%)"
        )
    for side in ("train", "validation"):
        if side in summary:
            s = summary[side]
            lines.append(
                f"{side:<15} roi {s['roi']:.2f}% (annualized {s['annualized_roi']:.2f}%), "
                f"max drawdown {s['max_drawdown']:.2f}%, trades {s['n_trades']}"
            )
    if "points" in summary:
        lines.append(f"embedded points: {summary['points']} (final KL {summary['final_kl']:.4f})")
    if "validation_accesses" in manifest:
        lines.append(f"validation accesses: {manifest['validation_accesses']}")
    return "\n".join(lines) + "\n"
