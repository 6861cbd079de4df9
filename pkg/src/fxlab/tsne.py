"""Exact t-SNE for desk-scale point sets.

High-dimensional affinities come from per-point Gaussian kernels whose
bandwidths are binary-searched until each conditional distribution's entropy
hits log2(perplexity); the symmetrized, normalized matrix is then matched by
Student-t (1 dof) similarities in 2-d via gradient descent with momentum and
an early-exaggeration phase. Everything is dense O(n^2), which stays
tractable and oracle-testable at the few-thousand-point scale this pipeline
produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import LengthMismatch, PerplexityTooLarge
from .svgplot import color_gradient, scatter_chart

EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250


@dataclass(frozen=True)
class EmbeddingConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    momentum_start: float = 0.5
    momentum_late: float = 0.8
    rng_seed: int = 0

    def __post_init__(self):
        if self.iterations < 250:
            raise ValueError("iterations must be >= 250")
        if self.perplexity <= 1:
            raise ValueError("perplexity must be > 1")


def standardize(rows: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance columns; constant columns collapse to zero."""
    X = np.asarray(rows, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (X - mean) / std


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def conditionals(rows: np.ndarray, perplexity: float, tol: float = 1e-6, max_steps: int = 200) -> np.ndarray:
    """Per-point conditional distributions with bandwidths binary-searched
    until each row's entropy is log2(perplexity) within `tol` bits."""
    X = standardize(rows)
    n = X.shape[0]
    if n < 4:
        raise PerplexityTooLarge(f"need at least 4 points, got {n}")
    if perplexity >= (n - 1) / 3:
        raise PerplexityTooLarge(f"perplexity {perplexity} too large for {n} points")

    sq = (X**2).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    target = np.log2(perplexity)

    cond = np.zeros((n, n))
    for i in range(n):
        di = np.delete(d2[i], i)
        beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
        p = np.exp(-di * beta)
        for _ in range(max_steps):
            total = p.sum()
            if total <= 0:
                # all mass underflowed: bandwidth far too small
                beta_hi = beta
                beta = (beta_lo + beta) / 2.0
                p = np.exp(-di * beta)
                continue
            h = _entropy_bits(p / total)
            if abs(h - target) <= tol:
                break
            if h > target:  # too flat: tighten the kernel
                beta_lo = beta
                beta = beta * 2.0 if beta_hi == np.inf else (beta + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = (beta + beta_lo) / 2.0
            p = np.exp(-di * beta)
        row = p / p.sum()
        cond[i, :i] = row[:i]
        cond[i, i + 1:] = row[i:]
    return cond


def affinities(rows: np.ndarray, perplexity: float, tol: float = 1e-6, max_steps: int = 200) -> np.ndarray:
    """Symmetric affinity matrix P with per-point entropy log2(perplexity).

    Rows are standardized before distances so indicator columns on wildly
    different scales (RSI in [0,100], MACD histogram near 0) weigh equally.
    """
    cond = conditionals(rows, perplexity, tol, max_steps)
    n = cond.shape[0]
    P = (cond + cond.T) / (2.0 * n)
    return P / P.sum()


def _q_matrix(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sq = (Y**2).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * Y @ Y.T, 0.0)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    Q = num / num.sum()
    return Q, num


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    Q, _ = _q_matrix(Y)
    mask = P > 0
    return float((P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))).sum())


def gradient(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Analytic KL gradient: 4 * sum_j (p_ij - q_ij) num_ij (y_i - y_j)."""
    Q, num = _q_matrix(Y)
    W = (P - Q) * num
    return 4.0 * ((np.diag(W.sum(axis=1)) - W) @ Y)


def optimize(
    P: np.ndarray,
    config: EmbeddingConfig,
    y0: np.ndarray | None = None,
) -> tuple[np.ndarray, list[float]]:
    """Gradient descent on the embedding; returns (coordinates, KL per iteration).

    The KL trace always measures against the true P even while the first
    250 iterations optimize the exaggerated objective.
    """
    n = P.shape[0]
    rng = np.random.default_rng(config.rng_seed)
    Y = np.array(y0, dtype=float) if y0 is not None else rng.normal(scale=1e-4, size=(n, 2))
    velocity = np.zeros_like(Y)
    kl_trace: list[float] = []

    for it in range(1, config.iterations + 1):
        P_eff = P * config.early_exaggeration if it <= EXAGGERATION_ITERS else P
        momentum = config.momentum_start if it <= MOMENTUM_SWITCH_ITER else config.momentum_late
        grad = gradient(P_eff, Y)
        velocity = momentum * velocity - config.learning_rate * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)
        kl_trace.append(kl_divergence(P, Y))
    return Y, kl_trace


def embed(
    rows: np.ndarray,
    config: EmbeddingConfig,
    subsample_cap: int = 5000,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Full pipeline: optional seeded subsample, affinities, optimization.

    Returns (kept row indices, coordinates, kl trace); indices are sorted so
    chronological ordering survives the subsampling.
    """
    X = np.asarray(rows, dtype=float)
    n = X.shape[0]
    if subsample_cap and n > subsample_cap:
        rng = np.random.default_rng(config.rng_seed)
        keep = np.sort(rng.choice(n, size=subsample_cap, replace=False))
    else:
        keep = np.arange(n)
    P = affinities(X[keep], config.perplexity)
    Y, trace = optimize(P, config)
    return keep, Y, trace


def export_csv(
    Y: np.ndarray,
    posteriors: np.ndarray,
    timestamps: list,
    header_lines: list[str] | None = None,
) -> str:
    if not (len(Y) == len(posteriors) == len(timestamps)):
        raise LengthMismatch(
            f"coords {len(Y)}, posteriors {len(posteriors)}, timestamps {len(timestamps)}"
        )
    lines = [f"# {h}" for h in (header_lines or [])]
    lines.append("timestamp,y1,y2,posterior")
    for ts, (y1, y2), p in zip(timestamps, Y, posteriors):
        stamp = ts.isoformat().replace("+00:00", "Z") if isinstance(ts, datetime) else str(ts)
        lines.append(f"{stamp},{repr(float(y1))},{repr(float(y2))},{repr(float(p))}")
    return "\n".join(lines) + "\n"


def export_svg(Y: np.ndarray, posteriors: np.ndarray, title: str) -> str:
    if len(Y) != len(posteriors):
        raise LengthMismatch(f"coords {len(Y)} vs posteriors {len(posteriors)}")
    return scatter_chart(Y[:, 0].tolist(), Y[:, 1].tolist(), list(posteriors), title)


def point_color(posterior: float) -> str:
    return color_gradient(posterior)
