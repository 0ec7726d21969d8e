"""Domain types, statistical fairness metrics, metric slicing and scoring.

Rates are compared as exact integer ratios (``fractions.Fraction``) so that
feasibility questions never depend on floating-point summation order.  The
float slack ``SLACK`` applies only to the real-valued reporting surface.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import EmptySlice, EmptyVector, LengthMismatch, NegativeConfidence

#: Numeric slack applied by :func:`satisfies` on top of the exact comparison.
SLACK = 1e-9


class FairnessMetric(str, Enum):
    """Closed enumeration of the supported statistical fairness metrics."""

    SP = "sp"
    PE = "pe"
    EO = "eo"
    EODDS = "eodds"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def as_binary_array(values: Sequence[int], name: str = "vector") -> np.ndarray:
    """Validate and convert a 0/1 sequence to a read-only int64 array."""
    arr = np.asarray(values, dtype=np.int64).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"{name} must contain only 0 and 1")
    arr.setflags(write=False)
    return arr


def as_sensitive_array(
    values: Sequence[int], cardinality: int = 2, name: str = "sensitive"
) -> np.ndarray:
    """Validate a sensitive-value sequence against its declared cardinality."""
    if cardinality < 2:
        raise ValueError("cardinality must be at least 2")
    arr = np.asarray(values, dtype=np.int64).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() >= cardinality):
        raise ValueError(f"{name} values must lie in [0, {cardinality})")
    arr.setflags(write=False)
    return arr


def as_confidence_array(values: Sequence[float], name: str = "confidence") -> np.ndarray:
    """Validate a non-negative, finite confidence sequence."""
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0):
        raise NegativeConfidence(f"{name} must be finite and non-negative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FairnessSpec:
    """A fairness metric together with its unfairness tolerance.

    ``epsilon_lower``, when set, additionally requires the measured unfairness
    to be at least that value (exact-unfairness knowledge instead of a plain
    upper bound).
    """

    metric: FairnessMetric
    epsilon: float
    epsilon_lower: float | None = None

    def __post_init__(self) -> None:
        metric = FairnessMetric(self.metric)
        object.__setattr__(self, "metric", metric)
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.epsilon_lower is not None and not 0.0 <= self.epsilon_lower <= self.epsilon:
            raise ValueError("epsilon_lower must lie in [0, epsilon]")


@dataclass(frozen=True, eq=False)
class AttackInstance:
    """One correction problem: model predictions, labels, guess, confidences.

    ``truth`` is carried for scoring only; no correction operation reads it.
    """

    predictions: Sequence[int]
    labels: Sequence[int]
    guess: Sequence[int]
    confidence: Sequence[float]
    truth: Sequence[int] | None = None
    cardinality: int = 2

    def __post_init__(self) -> None:
        predictions = as_binary_array(self.predictions, "predictions")
        labels = as_binary_array(self.labels, "labels")
        guess = as_sensitive_array(self.guess, self.cardinality, "guess")
        confidence = as_confidence_array(self.confidence)
        truth = None
        if self.truth is not None:
            truth = as_sensitive_array(self.truth, self.cardinality, "truth")
        lengths = {predictions.size, labels.size, guess.size, confidence.size}
        if truth is not None:
            lengths.add(truth.size)
        if len(lengths) > 1:
            raise LengthMismatch("instance vectors must share one length")
        for attr, value in (
            ("predictions", predictions),
            ("labels", labels),
            ("guess", guess),
            ("confidence", confidence),
            ("truth", truth),
        ):
            object.__setattr__(self, attr, value)

    @property
    def n(self) -> int:
        return self.predictions.size


def slice_for_metric(metric: FairnessMetric, y: Sequence[int]) -> tuple[np.ndarray, ...]:
    """Index set(s) a metric constrains: all, y=0, y=1, or the ordered pair.

    Empty sets are permitted; callers treat an empty slice as a no-op.
    """
    labels = as_binary_array(y, "labels")
    metric = FairnessMetric(metric)
    if metric is FairnessMetric.SP:
        return (np.arange(labels.size),)
    if metric is FairnessMetric.PE:
        return (np.flatnonzero(labels == 0),)
    if metric is FairnessMetric.EO:
        return (np.flatnonzero(labels == 1),)
    return (np.flatnonzero(labels == 0), np.flatnonzero(labels == 1))


def _group_rate_gap(s: np.ndarray, yhat: np.ndarray) -> Fraction:
    """Largest |overall positive rate - group positive rate| on one slice.

    Groups absent from the slice contribute no term.
    """
    n = int(s.size)
    if n == 0:
        raise EmptySlice("metric slice contains zero examples")
    pos_total = int(yhat.sum())
    overall = Fraction(pos_total, n)
    counts = np.bincount(s)
    if pos_total:
        positives = np.bincount(s[yhat == 1], minlength=counts.size)
    else:
        positives = np.zeros_like(counts)
    worst = Fraction(0)
    for count, pos in zip(counts.tolist(), positives.tolist()):
        if count == 0:
            continue
        gap = abs(overall - Fraction(pos, count))
        if gap > worst:
            worst = gap
    return worst


def unfairness_exact(
    metric: FairnessMetric,
    s: Sequence[int],
    yhat: Sequence[int],
    y: Sequence[int] | None = None,
) -> Fraction:
    """Exact rational unfairness of predictions ``yhat`` w.r.t. groups ``s``."""
    metric = FairnessMetric(metric)
    s_arr = np.asarray(s, dtype=np.int64)
    if s_arr.size and s_arr.min() < 0:
        raise ValueError("sensitive values must be non-negative")
    yhat_arr = as_binary_array(yhat, "predictions")
    if s_arr.size != yhat_arr.size:
        raise LengthMismatch("sensitive and prediction vectors differ in length")
    if metric is FairnessMetric.SP:
        return _group_rate_gap(s_arr, yhat_arr)
    if y is None:
        raise ValueError(f"{metric.value} requires the label vector")
    y_arr = as_binary_array(y, "labels")
    if y_arr.size != yhat_arr.size:
        raise LengthMismatch("label vector differs in length")
    if metric is FairnessMetric.PE:
        mask = y_arr == 0
        return _group_rate_gap(s_arr[mask], yhat_arr[mask])
    if metric is FairnessMetric.EO:
        mask = y_arr == 1
        return _group_rate_gap(s_arr[mask], yhat_arr[mask])
    # EOdds: conjunction of PE and EO; an empty side is skipped so one-sided
    # label vectors degrade gracefully.
    gaps = []
    for mask in (y_arr == 0, y_arr == 1):
        if mask.any():
            gaps.append(_group_rate_gap(s_arr[mask], yhat_arr[mask]))
    if not gaps:
        raise EmptySlice("metric slice contains zero examples")
    return max(gaps)


def unfairness(
    metric: FairnessMetric,
    s: Sequence[int],
    yhat: Sequence[int],
    y: Sequence[int] | None = None,
) -> float:
    """Float-valued unfairness in [0, 1]; see :func:`unfairness_exact`."""
    return float(unfairness_exact(metric, s, yhat, y))


def satisfies(
    spec: FairnessSpec,
    s: Sequence[int],
    yhat: Sequence[int],
    y: Sequence[int] | None = None,
) -> bool:
    """Whether ``s`` meets the spec, with slack ``SLACK`` on both bounds."""
    value = unfairness_exact(spec.metric, s, yhat, y)
    if value > Fraction(spec.epsilon) + Fraction(SLACK):
        return False
    if spec.epsilon_lower is not None:
        return value >= Fraction(spec.epsilon_lower) - Fraction(SLACK)
    return True


def reconstruction_accuracy(guess: Sequence[int], truth: Sequence[int]) -> float:
    """Fraction of positions where two sensitive vectors agree."""
    g = np.asarray(guess, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if g.size != t.size:
        raise LengthMismatch("guess and truth differ in length")
    if g.size == 0:
        raise EmptyVector("reconstruction accuracy needs at least one element")
    return float(np.count_nonzero(g == t) / g.size)
