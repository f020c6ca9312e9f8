"""Confidence, accuracy, binned ECE, Brier score and reliability bins.

All functions take a :class:`LabeledLogits` and a temperature ``T``; the
logits are divided by ``T`` before the softmax.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax

DEFAULT_BINS = 15


class InvalidInputError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledLogits:
    """Raw scores ``logits`` (n x K) with integer ``labels`` in ``[0, K)``."""

    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=float)
        labels = np.asarray(self.labels)
        if logits.ndim != 2:
            raise InvalidInputError("logits must be a 2-d array")
        n, K = logits.shape
        if n < 1:
            raise InvalidInputError("need at least one sample")
        if K < 2:
            raise InvalidInputError("need at least two classes")
        if labels.shape != (n,):
            raise InvalidInputError(f"labels must have shape ({n},), got {labels.shape}")
        if not np.all(np.isfinite(logits)):
            raise InvalidInputError("logits must be finite")
        if labels.dtype.kind == "f":
            if not np.all(labels == np.round(labels)):
                raise InvalidInputError("labels must be integers")
        elif labels.dtype.kind not in "iu":
            raise InvalidInputError("labels must be integers")
        labels = labels.astype(np.int64)
        if np.any((labels < 0) | (labels >= K)):
            raise InvalidInputError(f"labels must lie in [0, {K})")
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.logits.shape[0]

    @property
    def K(self) -> int:
        return self.logits.shape[1]


@dataclass(frozen=True)
class ReliabilityBins:
    """Equal-width confidence bins. Empty bins hold NaN confidence/accuracy."""

    edges: np.ndarray
    counts: np.ndarray
    confidence: np.ndarray
    accuracy: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        """Per-bin ``confidence - accuracy`` (positive means overconfident)."""
        return self.confidence - self.accuracy

    def to_dict(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(v) else float(v) for v in a]

        return {
            "edges": [float(e) for e in self.edges],
            "counts": [int(c) for c in self.counts],
            "confidence": clean(self.confidence),
            "accuracy": clean(self.accuracy),
        }


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    ece: float
    brier: float
    bins: ReliabilityBins
    temperature: float = 1.0

    def to_dict(self) -> dict:
        return {
            "accuracy": float(self.accuracy),
            "ece": float(self.ece),
            "brier": float(self.brier),
            "temperature": float(self.temperature),
            "bins": self.bins.to_dict(),
        }


def _check_temperature(T):
    if not (np.isfinite(T) and T > 0):
        raise InvalidInputError(f"temperature must be a positive finite number, got {T!r}")


def probabilities(logits, T: float = 1.0) -> np.ndarray:
    """Row-wise softmax of ``logits / T``."""
    _check_temperature(T)
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise InvalidInputError("logits must be finite")
    return softmax(logits / T, axis=-1)


def softmax_confidence(logits_row, T: float = 1.0):
    """Return ``(probs, prediction, confidence)`` for a single logit vector.

    ``np.argmax`` picks the smallest index on exact ties.

    >>> probs, k, c = softmax_confidence([np.log(3.0), 0.0])
    >>> k, round(c, 4)
    (0, 0.75)
    """
    probs = probabilities(np.asarray(logits_row, dtype=float), T)
    k = int(np.argmax(probs))
    return probs, k, float(probs[k])


def predictions(data: LabeledLogits, T: float = 1.0) -> np.ndarray:
    _check_temperature(T)
    return np.argmax(data.logits / T, axis=1)


def confidences(data: LabeledLogits, T: float = 1.0) -> np.ndarray:
    """Max softmax probability per row."""
    return probabilities(data.logits, T).max(axis=1)


def accuracy(data: LabeledLogits, T: float = 1.0) -> float:
    return float(np.mean(predictions(data, T) == data.labels))


def _bin_index(conf: np.ndarray, edges: np.ndarray) -> np.ndarray:
    # bins [e_b, e_{b+1}); the last bin also holds confidence 1
    idx = np.searchsorted(edges, conf, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def reliability_curve(data: LabeledLogits, T: float = 1.0, n_bins: int = DEFAULT_BINS) -> ReliabilityBins:
    """Bin samples by confidence and report per-bin accuracy and mean confidence."""
    if n_bins < 1:
        raise InvalidInputError("need at least one bin")
    conf = confidences(data, T)
    correct = (predictions(data, T) == data.labels).astype(float)
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    idx = _bin_index(conf, edges)
    counts = np.bincount(idx, minlength=n_bins)
    conf_sum = np.bincount(idx, weights=conf, minlength=n_bins)
    acc_sum = np.bincount(idx, weights=correct, minlength=n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_conf = np.where(counts > 0, conf_sum / counts, np.nan)
        mean_acc = np.where(counts > 0, acc_sum / counts, np.nan)
    return ReliabilityBins(edges, counts, mean_conf, mean_acc)


def binned_ece(data: LabeledLogits, T: float = 1.0, n_bins: int = DEFAULT_BINS):
    """Equal-width binned expected calibration error.

    Returns
    -------
    ece : float
        ``sum_b (n_b / n) |acc_b - conf_b|`` over non-empty bins.
    bins : ReliabilityBins
    """
    bins = reliability_curve(data, T, n_bins)
    filled = bins.counts > 0
    ece = np.sum(bins.counts[filled] * np.abs(bins.gap[filled])) / data.n
    return float(ece), bins


def brier(data: LabeledLogits, T: float = 1.0) -> float:
    """Brier score summed over all K classes, averaged over samples."""
    p = probabilities(data.logits, T)
    onehot = np.zeros_like(p)
    onehot[np.arange(data.n), data.labels] = 1.0
    return float(np.mean(np.sum((p - onehot) ** 2, axis=1)))


def nll(data: LabeledLogits, T: float = 1.0) -> float:
    """Mean negative log-likelihood of the labels (cross-entropy)."""
    _check_temperature(T)
    logp = log_softmax(data.logits / T, axis=1)
    return float(-np.mean(logp[np.arange(data.n), data.labels]))


def report(data: LabeledLogits, T: float = 1.0, n_bins: int = DEFAULT_BINS) -> MetricsReport:
    ece, bins = binned_ece(data, T, n_bins)
    return MetricsReport(accuracy(data, T), ece, brier(data, T), bins, float(T))
