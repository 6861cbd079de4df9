"""Contiguous k-fold cross-validation with out-of-fold predictions.

Folds are positional blocks over the chronological row order — no shuffling,
so adjacent-bar information cannot leak across the fold boundary through the
sampling itself, and a rerun on the same data gives the same report.

Accuracy under rejection is scored over accepted rows only; recall keeps the
full class counts in its denominator (a rejected row still counts as a missed
instance of its class); precision is per predicted class over accepted rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from . import bayes
from .bayes import DecisionKind, Prediction
from .errors import FoldTooSmall, SingleClassFold

DEFAULT_FOLDS = 7


@dataclass(frozen=True)
class FoldPlan:
    """k contiguous, near-equal index ranges partitioning [0, n)."""

    n_rows: int
    k: int
    bounds: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, n_rows: int, k: int) -> "FoldPlan":
        if k < 2:
            raise ValueError("need at least 2 folds")
        if n_rows < k:
            raise FoldTooSmall(f"{n_rows} rows cannot fill {k} folds")
        base, extra = divmod(n_rows, k)
        bounds = []
        start = 0
        for i in range(k):
            size = base + (1 if i < extra else 0)
            bounds.append((start, start + size))
            start += size
        return cls(n_rows, k, tuple(bounds))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float


@dataclass(frozen=True)
class CvReport:
    k: int
    rejection: bool
    mean_accuracy: float
    accuracy_dispersion: float  # sample std over per-fold accuracies
    fold_accuracies: tuple[float, ...]
    acceptance_rate: float
    per_class: dict[int, ClassMetrics]
    out_of_fold: tuple[Prediction, ...]
    labels: tuple[int, ...]
    timestamps: tuple[datetime, ...] | None = None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "rejection": self.rejection,
            "mean_accuracy": self.mean_accuracy,
            "accuracy_dispersion": self.accuracy_dispersion,
            "fold_accuracies": list(self.fold_accuracies),
            "acceptance_rate": self.acceptance_rate,
            "per_class": {
                str(c): {"precision": m.precision, "recall": m.recall}
                for c, m in sorted(self.per_class.items())
            },
            "out_of_fold_only": True,
        }


@dataclass(frozen=True)
class Decision:
    """One actionable (or abstained) call aligned to a candle timestamp."""

    timestamp: datetime | int
    action: str  # "buy" | "sell" | "none"
    posterior: float = field(default=0.5)


_ACTION = {DecisionKind.UP: "buy", DecisionKind.DOWN: "sell", DecisionKind.REJECTED: "none"}


def run_cv(
    features: np.ndarray,
    labels: np.ndarray,
    k: int = DEFAULT_FOLDS,
    rejection: bool = True,
    acceptance: float = 0.5,
    timestamps: tuple[datetime, ...] | None = None,
) -> CvReport:
    """Fit on each fold's complement, predict the held-out fold.

    The rejection threshold, when enabled, is calibrated on the complement
    as well, so no held-out row influences the model that scores it.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    n = X.shape[0]
    plan = FoldPlan.build(n, k)

    predictions: list[Prediction | None] = [None] * n
    fold_accuracies: list[float] = []
    for lo, hi in plan.bounds:
        train_idx = np.concatenate((np.arange(0, lo), np.arange(hi, n)))
        y_train = y[train_idx]
        if int((y_train == 0).sum()) < 2 or int((y_train == 1).sum()) < 2:
            raise SingleClassFold("a fold complement lacks 2 samples of each class")
        model = bayes.fit(X[train_idx], y_train)
        threshold = (
            bayes.calibrate_rejection(model, X[train_idx], acceptance).p_rejection
            if rejection
            else None
        )
        fold_preds = []
        for p_up in bayes.posteriors(model, X[lo:hi]):
            if threshold is not None:
                fold_preds.append(bayes.decide(p_up, threshold))
            else:
                kind = DecisionKind.UP if p_up >= 0.5 else DecisionKind.DOWN
                fold_preds.append(Prediction(kind, float(p_up)))
        for offset, pred in enumerate(fold_preds):
            predictions[lo + offset] = pred
        hits, seen = 0, 0
        for offset, pred in enumerate(fold_preds):
            if pred.decision is DecisionKind.REJECTED:
                continue
            seen += 1
            hits += int(int(pred.decision.value) == int(y[lo + offset]))
        if seen:
            fold_accuracies.append(hits / seen)

    preds = tuple(predictions)  # every slot filled: folds partition [0, n)
    accepted = [i for i, p in enumerate(preds) if p.decision is not DecisionKind.REJECTED]
    acceptance_rate = len(accepted) / n
    per_class: dict[int, ClassMetrics] = {}
    for c in (0, 1):
        pred_c = [i for i in accepted if int(preds[i].decision.value) == c]
        true_c = int((y == c).sum())
        tp = sum(1 for i in pred_c if int(y[i]) == c)
        precision = tp / len(pred_c) if pred_c else 0.0
        recall = tp / true_c if true_c else 0.0
        per_class[c] = ClassMetrics(precision, recall)

    mean_acc = float(np.mean(fold_accuracies)) if fold_accuracies else 0.0
    dispersion = float(np.std(fold_accuracies, ddof=1)) if len(fold_accuracies) > 1 else 0.0
    if timestamps is not None and len(timestamps) != n:
        raise ValueError("timestamps must align with feature rows")
    return CvReport(
        k=k,
        rejection=rejection,
        mean_accuracy=mean_acc,
        accuracy_dispersion=dispersion,
        fold_accuracies=tuple(fold_accuracies),
        acceptance_rate=acceptance_rate,
        per_class=per_class,
        out_of_fold=preds,
        labels=tuple(int(v) for v in y),
        timestamps=timestamps,
    )


def out_of_fold_signal(report: CvReport) -> list[Decision]:
    """Chronological buy/sell/none stream, one entry per scored row."""
    stamps = report.timestamps if report.timestamps is not None else tuple(range(len(report.out_of_fold)))
    return [
        Decision(ts, _ACTION[p.decision], p.posterior)
        for ts, p in zip(stamps, report.out_of_fold)
    ]


def signals_to_csv(decisions: list[Decision], header_lines: list[str] | None = None) -> str:
    lines = [f"# {h}" for h in (header_lines or [])]
    lines.append("timestamp,decision,posterior")
    for d in decisions:
        ts = d.timestamp.isoformat().replace("+00:00", "Z") if isinstance(d.timestamp, datetime) else str(d.timestamp)
        lines.append(f"{ts},{d.action},{repr(d.posterior)}")
    return "\n".join(lines) + "\n"


def report_to_json_text(report: CvReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
