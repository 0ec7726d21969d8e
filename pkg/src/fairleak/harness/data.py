"""Dataset tables, schema declarations, CSV ingestion and splitting."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import (
    BadFractions,
    DuplicateId,
    LengthMismatch,
    ParseError,
    SchemaError,
)

CATEGORICAL = "categorical"
NUMERIC = "numeric"


@dataclass(frozen=True, eq=False)
class FeatureColumn:
    """One feature column: integer codes or raw numeric values."""

    kind: str
    values: np.ndarray
    categories: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise SchemaError(f"unknown feature kind: {self.kind!r}")
        dtype = np.int64 if self.kind == CATEGORICAL else np.float64
        object.__setattr__(self, "values", np.asarray(self.values, dtype=dtype))

    def take(self, indices: np.ndarray) -> "FeatureColumn":
        return FeatureColumn(self.kind, self.values[indices], self.categories)


@dataclass(frozen=True, eq=False)
class DatasetTable:
    """A dataset with ids, features, a sensitive column and labels."""

    ids: np.ndarray
    features: dict[str, FeatureColumn]
    sensitive: np.ndarray
    labels: np.ndarray
    predictions: np.ndarray | None = None
    sensitive_cardinality: int = 2

    def __post_init__(self) -> None:
        ids = np.asarray(self.ids, dtype=np.int64)
        sensitive = np.asarray(self.sensitive, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        predictions = self.predictions
        if predictions is not None:
            predictions = np.asarray(predictions, dtype=np.int64)
        lengths = {ids.size, sensitive.size, labels.size}
        lengths |= {col.values.size for col in self.features.values()}
        if predictions is not None:
            lengths.add(predictions.size)
        if len(lengths) > 1:
            raise LengthMismatch("dataset columns differ in length")
        if ids.size != np.unique(ids).size:
            raise DuplicateId("dataset ids are not unique")
        if sensitive.size and (
            sensitive.min() < 0 or sensitive.max() >= self.sensitive_cardinality
        ):
            raise SchemaError(
                "sensitive values exceed the declared cardinality "
                f"{self.sensitive_cardinality}"
            )
        if labels.size and (labels.min() < 0 or labels.max() > 1):
            raise SchemaError("labels must be 0 or 1")
        if predictions is not None and predictions.size and (
            predictions.min() < 0 or predictions.max() > 1
        ):
            raise SchemaError("predictions must be 0 or 1")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "sensitive", sensitive)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "predictions", predictions)

    @property
    def n(self) -> int:
        return self.ids.size

    def subset(self, indices: np.ndarray) -> "DatasetTable":
        indices = np.asarray(indices, dtype=np.int64)
        return DatasetTable(
            ids=self.ids[indices],
            features={k: col.take(indices) for k, col in self.features.items()},
            sensitive=self.sensitive[indices],
            labels=self.labels[indices],
            predictions=None if self.predictions is None else self.predictions[indices],
            sensitive_cardinality=self.sensitive_cardinality,
        )


@dataclass(frozen=True)
class DatasetSchema:
    """Column roles for a dataset CSV, normally read from a JSON sidecar."""

    features: dict[str, str]
    id_column: str = "id"
    sensitive_column: str = "s"
    label_column: str = "y"
    prediction_column: str | None = "yhat"
    sensitive_cardinality: int = 2

    def __post_init__(self) -> None:
        for name, kind in self.features.items():
            if kind not in (CATEGORICAL, NUMERIC):
                raise SchemaError(f"feature {name!r} has unknown kind {kind!r}")
        if self.sensitive_cardinality < 2:
            raise SchemaError("sensitive cardinality must be at least 2")

    @classmethod
    def from_json(cls, path: str | Path) -> "DatasetSchema":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read schema file {path}: {exc}") from exc
        try:
            return cls(
                features=dict(payload["features"]),
                id_column=payload.get("id", "id"),
                sensitive_column=payload.get("sensitive", "s"),
                label_column=payload.get("label", "y"),
                prediction_column=payload.get("prediction", "yhat"),
                sensitive_cardinality=int(payload.get("sensitive_cardinality", 2)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed schema file {path}: {exc}") from exc

    def to_json(self, path: str | Path) -> None:
        payload = {
            "id": self.id_column,
            "sensitive": self.sensitive_column,
            "label": self.label_column,
            "prediction": self.prediction_column,
            "sensitive_cardinality": self.sensitive_cardinality,
            "features": self.features,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _parse_int(raw: str, row: int, column: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"row {row}, column {column!r}: {raw!r} is not an integer") from exc


def _parse_float(raw: str, row: int, column: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"row {row}, column {column!r}: {raw!r} is not a number") from exc


def ingest_csv(path: str | Path, schema: DatasetSchema) -> DatasetTable:
    """Parse and validate a dataset CSV against its schema declaration."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        required = [schema.id_column, schema.sensitive_column, schema.label_column]
        required.extend(schema.features)
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"missing columns: {missing}")
        has_predictions = (
            schema.prediction_column is not None and schema.prediction_column in header
        )

        ids: list[int] = []
        seen: set[int] = set()
        sensitive: list[int] = []
        labels: list[int] = []
        predictions: list[int] = []
        raw_features: dict[str, list] = {name: [] for name in schema.features}
        for row_no, row in enumerate(reader, start=2):
            rid = _parse_int(row[schema.id_column], row_no, schema.id_column)
            if rid in seen:
                raise DuplicateId(f"row {row_no}: duplicate id {rid}")
            seen.add(rid)
            ids.append(rid)
            sensitive.append(
                _parse_int(row[schema.sensitive_column], row_no, schema.sensitive_column)
            )
            labels.append(_parse_int(row[schema.label_column], row_no, schema.label_column))
            if has_predictions:
                predictions.append(
                    _parse_int(row[schema.prediction_column], row_no, schema.prediction_column)
                )
            for name, kind in schema.features.items():
                if kind == NUMERIC:
                    raw_features[name].append(_parse_float(row[name], row_no, name))
                else:
                    raw_features[name].append(row[name])

    features: dict[str, FeatureColumn] = {}
    for name, kind in schema.features.items():
        if kind == NUMERIC:
            features[name] = FeatureColumn(NUMERIC, np.asarray(raw_features[name]))
        else:
            categories = tuple(sorted(set(raw_features[name])))
            mapping = {c: i for i, c in enumerate(categories)}
            codes = np.asarray([mapping[v] for v in raw_features[name]], dtype=np.int64)
            features[name] = FeatureColumn(CATEGORICAL, codes, categories)

    return DatasetTable(
        ids=np.asarray(ids, dtype=np.int64),
        features=features,
        sensitive=np.asarray(sensitive, dtype=np.int64),
        labels=np.asarray(labels, dtype=np.int64),
        predictions=np.asarray(predictions, dtype=np.int64) if has_predictions else None,
        sensitive_cardinality=schema.sensitive_cardinality,
    )


def write_dataset_csv(table: DatasetTable, path: str | Path) -> DatasetSchema:
    """Write a dataset CSV plus its JSON schema sidecar (``<path>.schema.json``).

    Categorical features are written as their integer codes."""
    path = Path(path)
    feature_names = list(table.features)
    header = ["id"] + feature_names + ["s", "y"]
    if table.predictions is not None:
        header.append("yhat")
    lines = [",".join(header)]
    for i in range(table.n):
        cells = [str(int(table.ids[i]))]
        for name in feature_names:
            col = table.features[name]
            if col.kind == CATEGORICAL:
                cells.append(str(int(col.values[i])))
            else:
                cells.append(f"{float(col.values[i]):.12g}")
        cells.append(str(int(table.sensitive[i])))
        cells.append(str(int(table.labels[i])))
        if table.predictions is not None:
            cells.append(str(int(table.predictions[i])))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    schema = DatasetSchema(
        features={name: table.features[name].kind for name in feature_names},
        sensitive_cardinality=table.sensitive_cardinality,
        prediction_column="yhat" if table.predictions is not None else None,
    )
    schema.to_json(path.with_name(path.name + ".schema.json"))
    return schema


def largest_remainder_sizes(n: int, fractions: tuple[float, ...]) -> tuple[int, ...]:
    """Integer split sizes summing to n; remainders go to the largest shares,
    earlier splits first on ties."""
    quotas = [f * n for f in fractions]
    sizes = [math.floor(q) for q in quotas]
    leftover = n - sum(sizes)
    order = sorted(range(len(fractions)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[:leftover]:
        sizes[i] += 1
    return tuple(sizes)


def split_dataset(
    table: DatasetTable,
    fractions: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    seed: int = 0,
) -> tuple[DatasetTable, DatasetTable, DatasetTable]:
    """Disjoint, exhaustive, seed-deterministic (train, test, attack) split."""
    if any(f <= 0 for f in fractions):
        raise BadFractions("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise BadFractions("fractions must sum to 1")
    sizes = largest_remainder_sizes(table.n, tuple(fractions))
    perm = np.random.default_rng(seed).permutation(table.n)
    bounds = np.cumsum(sizes)[:-1]
    parts = np.split(perm, bounds)
    return tuple(table.subset(np.sort(part)) for part in parts)
