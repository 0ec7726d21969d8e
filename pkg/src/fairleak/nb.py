"""Categorical naive Bayes with Laplace smoothing.

Inputs are integer-coded categorical columns.  Codes unseen at fit time fall
into a reserved bucket whose likelihood is the bare smoothing mass, so
prediction is defined for any input.  Everything is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CategoricalNaiveBayes:
    """Fitted model; build with :func:`fit_naive_bayes`."""

    feature_names: tuple[str, ...]
    log_likelihood: dict[str, np.ndarray]  # name -> (n_classes, n_values + 1)
    log_prior: np.ndarray
    n_classes: int

    def predict_log_joint(self, columns: dict[str, np.ndarray]) -> np.ndarray:
        if set(columns) < set(self.feature_names):
            missing = set(self.feature_names) - set(columns)
            raise KeyError(f"missing feature columns: {sorted(missing)}")
        n = next(iter(columns.values())).size if columns else 0
        scores = np.tile(self.log_prior, (n, 1))
        for name in self.feature_names:
            table = self.log_likelihood[name]
            codes = np.asarray(columns[name], dtype=np.int64)
            seen = table.shape[1] - 1
            codes = np.where((codes < 0) | (codes >= seen), seen, codes)
            scores += table[:, codes].T
        return scores

    def predict_proba(self, columns: dict[str, np.ndarray]) -> np.ndarray:
        scores = self.predict_log_joint(columns)
        shift = scores.max(axis=1, keepdims=True)
        shifted = np.where(np.isfinite(shift), scores - shift, 0.0)
        weights = np.exp(shifted)
        return weights / weights.sum(axis=1, keepdims=True)

    def predict(self, columns: dict[str, np.ndarray]) -> np.ndarray:
        return np.argmax(self.predict_log_joint(columns), axis=1)


def fit_naive_bayes(
    columns: dict[str, np.ndarray],
    target: np.ndarray,
    n_classes: int,
    alpha: float = 1.0,
    class_prior: str = "uniform",
) -> CategoricalNaiveBayes:
    """Fit the model.

    ``class_prior="uniform"`` balances the classes regardless of their
    empirical frequency; ``"empirical"`` uses the observed frequencies.
    """
    target = np.asarray(target, dtype=np.int64)
    class_counts = np.bincount(target, minlength=n_classes).astype(np.float64)
    if class_prior == "uniform":
        log_prior = np.full(n_classes, -np.log(n_classes))
    elif class_prior == "empirical":
        with np.errstate(divide="ignore"):
            log_prior = np.log(class_counts / max(target.size, 1))
    else:
        raise ValueError(f"unknown class prior: {class_prior!r}")

    tables: dict[str, np.ndarray] = {}
    for name, values in columns.items():
        codes = np.asarray(values, dtype=np.int64)
        n_values = int(codes.max()) + 1 if codes.size else 1
        counts = np.zeros((n_classes, n_values + 1))
        np.add.at(counts, (target, codes), 1.0)
        denom = (class_counts + alpha * n_values)[:, None]
        tables[name] = np.log((counts + alpha) / denom)
    return CategoricalNaiveBayes(
        feature_names=tuple(columns),
        log_likelihood=tables,
        log_prior=log_prior,
        n_classes=n_classes,
    )
