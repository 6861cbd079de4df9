"""Gaussian Naive Bayes binary classifier with a rejection option.

Class priors are the observed class frequencies; per-class, per-feature
Gaussians use the population moments. Posteriors are evaluated in log space
with max-subtraction, since the raw likelihood product underflows once the
feature count grows past a couple dozen.

The rejection variant abstains unless the winning class posterior strictly
exceeds the threshold; the threshold is calibrated as a quantile of the
winning posteriors so that a target fraction of samples is accepted
(median for the default 50%).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyInput, SingleClassData

MODEL_FORMAT = "fxlab-naive-bayes"
MODEL_VERSION = 1


@dataclass(frozen=True)
class ClassConditionalStats:
    priors: np.ndarray      # shape (2,), sums to 1
    means: np.ndarray       # shape (2, n_features)
    variances: np.ndarray   # shape (2, n_features), floored above 0

    def __post_init__(self):
        if not np.isclose(self.priors.sum(), 1.0) or np.any(self.priors <= 0):
            raise ValueError("priors must be positive and sum to 1")
        if np.any(self.variances <= 0):
            raise ValueError("variances must be strictly positive")


@dataclass(frozen=True)
class FittedNaiveBayes:
    stats: ClassConditionalStats

    @property
    def n_features(self) -> int:
        return self.stats.means.shape[1]


@dataclass(frozen=True)
class RejectionModel:
    model: FittedNaiveBayes
    p_rejection: float

    def __post_init__(self):
        if not 0.5 <= self.p_rejection < 1.0:
            raise ValueError("p_rejection must lie in [0.5, 1)")


class DecisionKind(str, Enum):
    DOWN = "0"
    UP = "1"
    REJECTED = "rejected"


@dataclass(frozen=True)
class Prediction:
    decision: DecisionKind
    posterior: float  # P(y=1 | x)


def fit(features: np.ndarray, labels: np.ndarray) -> FittedNaiveBayes:
    """Estimate priors and per-class Gaussian moments from training rows.

    Variances are floored at 1e-9 * (per-feature global variance + 1e-12) so
    constant columns (which the GA can produce) keep the densities finite.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("need a non-empty 2-d feature matrix")
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} rows vs {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")

    masks = [y == 0, y == 1]
    counts = np.array([int(m.sum()) for m in masks])
    if np.any(counts < 2):
        raise SingleClassData(f"need >= 2 samples of each class, got counts {counts.tolist()}")

    var_floor = 1e-9 * (X.var(axis=0) + 1e-12)
    priors = counts / counts.sum()
    means = np.stack([X[m].mean(axis=0) for m in masks])
    variances = np.stack([np.maximum(X[m].var(axis=0), var_floor) for m in masks])
    return FittedNaiveBayes(ClassConditionalStats(priors, means, variances))


def log_joint(model: FittedNaiveBayes, features: np.ndarray) -> np.ndarray:
    """log P(y) + sum_i log N(x_i; mu_y, var_y) for each row and class; (n, 2)."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {X.shape[1]}")
    s = model.stats
    # broadcast rows (n, 1, d) against class stats (2, d)
    z = (X[:, None, :] - s.means) ** 2 / s.variances
    log_pdf = -0.5 * (z + np.log(2.0 * np.pi * s.variances))
    return np.log(s.priors) + log_pdf.sum(axis=2)


def posteriors(model: FittedNaiveBayes, features: np.ndarray) -> np.ndarray:
    """P(y=1 | x) per row, computed with max-subtracted log joints."""
    lj = log_joint(model, features)
    m = lj.max(axis=1, keepdims=True)
    w = np.exp(lj - m)
    return w[:, 1] / w.sum(axis=1)


def posterior(model: FittedNaiveBayes, x: np.ndarray) -> float:
    return float(posteriors(model, np.atleast_2d(x))[0])


def predict_with_rejection(rmodel: RejectionModel, x: np.ndarray) -> Prediction:
    """Argmax class when its posterior strictly beats the threshold, else reject."""
    p_up = posterior(rmodel.model, x)
    return decide(p_up, rmodel.p_rejection)


def predict_many(rmodel: RejectionModel, features: np.ndarray) -> list[Prediction]:
    return [decide(p, rmodel.p_rejection) for p in posteriors(rmodel.model, features)]


def decide(p_up: float, threshold: float) -> Prediction:
    winning = max(p_up, 1.0 - p_up)
    if winning <= threshold:
        return Prediction(DecisionKind.REJECTED, p_up)
    return Prediction(DecisionKind.UP if p_up >= 0.5 else DecisionKind.DOWN, p_up)


def calibrate_rejection(
    model: FittedNaiveBayes, features: np.ndarray, acceptance: float = 0.5
) -> RejectionModel:
    """Pick the threshold as the (1 - acceptance) quantile of winning posteriors.

    The default 0.5 acceptance makes it the median, so half the calibration
    rows fall strictly above the threshold and get classified.
    """
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if X.shape[0] < 2:
        raise EmptyInput("calibration needs at least 2 rows")
    if not 0.0 < acceptance < 1.0:
        raise ValueError("acceptance must lie in (0, 1)")
    p = posteriors(model, X)
    winning = np.maximum(p, 1.0 - p)
    threshold = float(np.quantile(winning, 1.0 - acceptance))
    threshold = min(max(threshold, 0.5), 1.0 - 1e-12)
    accepted = float(np.mean(winning > threshold))
    if abs(accepted - acceptance) > 0.25:
        warnings.warn(
            f"degenerate rejection calibration: acceptance {accepted:.3f} "
            f"far from target {acceptance:.3f}",
            stacklevel=2,
        )
    return RejectionModel(model, threshold)


def to_json(rmodel: RejectionModel) -> dict:
    s = rmodel.model.stats
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "priors": s.priors.tolist(),
        "means": s.means.tolist(),
        "variances": s.variances.tolist(),
        "p_rejection": rmodel.p_rejection,
    }


def from_json(doc: dict) -> RejectionModel:
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model document: {doc.get('format')}/{doc.get('version')}")
    stats = ClassConditionalStats(
        np.array(doc["priors"], dtype=float),
        np.array(doc["means"], dtype=float),
        np.array(doc["variances"], dtype=float),
    )
    return RejectionModel(FittedNaiveBayes(stats), float(doc["p_rejection"]))


def save(rmodel: RejectionModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json(rmodel), indent=2, sort_keys=True) + "\n")


def load(path: str | Path) -> RejectionModel:
    return from_json(json.loads(Path(path).read_text()))
