"""Simplified fair target model: naive Bayes labels plus an exact repair.

The repair flips minimum-margin predictions, group by group, until the
requested rate constraint holds on the training data.  It rides the same
net-move sweep as the guess corrector: with fixed group memberships the
constraint depends only on the net number of prediction flips inside each
sensitive group, the per-group flip costs are prefix sums of sorted margins,
and the feasible rows of a column are integer intervals obtained by exact
cross-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import FairnessMetric, FairnessSpec, slice_for_metric, unfairness_exact
from ..corrector import _SideCosts, sweep_net_moves
from ..errors import Infeasible
from ..nb import CategoricalNaiveBayes, fit_naive_bayes
from ..adversary import Discretizer
from .data import CATEGORICAL, DatasetTable


def _encode(
    table: DatasetTable, kinds: dict[str, str], disc: Discretizer
) -> dict[str, np.ndarray]:
    columns = {}
    for name, kind in kinds.items():
        col = table.features[name]
        if kind == CATEGORICAL:
            columns[name] = col.values
        else:
            columns[name] = disc.transform_column(name, col.values)
    return columns


@dataclass(frozen=True, eq=False)
class LabelPredictor:
    """Naive Bayes label model with the discretizer fitted alongside it."""

    nb: CategoricalNaiveBayes
    discretizer: Discretizer
    feature_kinds: dict[str, str]

    def raw_predictions(self, table: DatasetTable) -> tuple[np.ndarray, np.ndarray]:
        """Predicted labels and the posterior margin of each prediction."""
        proba = self.nb.predict_proba(
            _encode(table, self.feature_kinds, self.discretizer)
        )
        yhat = np.argmax(proba, axis=1).astype(np.int64)
        margins = np.abs(proba[:, 1] - proba[:, 0])
        return yhat, margins


def fit_label_predictor(train: DatasetTable) -> LabelPredictor:
    if train.n == 0:
        raise ValueError("training table is empty")
    kinds = {name: col.kind for name, col in train.features.items()}
    numeric = {
        name: train.features[name].values
        for name, kind in kinds.items()
        if kind != CATEGORICAL
    }
    disc = Discretizer().fit(numeric)
    columns = _encode(train, kinds, disc)
    nb = fit_naive_bayes(columns, train.labels, n_classes=2, class_prior="empirical")
    return LabelPredictor(nb=nb, discretizer=disc, feature_kinds=kinds)


def _tighten(a: int, b: int, lo: int, hi: int, strict: bool = False) -> tuple[int, int]:
    """Tighten [lo, hi] with the constraint a*v + b >= 0 (> 0 when strict)."""
    if a > 0:
        lo = max(lo, (-b) // a + 1 if strict else -(b // a))
    elif a < 0:
        hi = min(hi, -((-b) // (-a)) - 1 if strict else (-b) // a)
    elif (b < 0) or (strict and b == 0):
        return 1, 0
    return lo, hi


@dataclass(frozen=True, eq=False)
class _RepairSlice:
    yhat: np.ndarray
    flipped: np.ndarray
    cost: float


def _prefix(margins: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = idx[np.argsort(margins[idx], kind="stable")]
    return np.concatenate(([0.0], np.cumsum(margins[order]))), order


def _repair_slice(
    yhat: np.ndarray,
    margins: np.ndarray,
    sensitive: np.ndarray,
    idx: np.ndarray,
    epsilon: Fraction,
    lower: Fraction | None,
) -> _RepairSlice:
    sub_y = yhat[idx]
    sub_s = sensitive[idx]
    n = idx.size
    n1 = int(np.count_nonzero(sub_s == 1))
    n0 = n - n1
    if n1 == 0 or n0 == 0:
        # a single group carries the whole slice, so its rate is the overall
        # rate and the constraint already holds
        return _RepairSlice(sub_y.copy(), np.zeros(0, dtype=np.int64), 0.0)
    pos1 = int(np.count_nonzero(sub_y[sub_s == 1]))
    pos0 = int(np.count_nonzero(sub_y[sub_s == 0]))
    tot = pos1 + pos0
    en, ed = epsilon.numerator, epsilon.denominator
    if lower is not None and lower > 0:
        ln, ld = lower.numerator, lower.denominator
    else:
        ln = ld = 0

    local = np.arange(n)
    up1, up1_order = _prefix(margins[idx], local[(sub_s == 1) & (sub_y == 0)])
    down1, down1_order = _prefix(margins[idx], local[(sub_s == 1) & (sub_y == 1)])
    up0, up0_order = _prefix(margins[idx], local[(sub_s == 0) & (sub_y == 0)])
    down0, down0_order = _prefix(margins[idx], local[(sub_s == 0) & (sub_y == 1)])

    def window(u: int, num: int, den: int, strict: bool) -> tuple[int, int]:
        """Feasible net group-0 flips for net group-1 flips ``u``."""
        t = tot + u
        p1 = pos1 + u
        lo, hi = -pos0, n0 - pos0
        # group 1 gap: ((t + v) * n1 - p1 * n) * den vs num * n * n1
        c1 = (t * n1 - p1 * n) * den
        lo, hi = _tighten(n1 * den, num * n * n1 + c1, lo, hi, strict)
        lo, hi = _tighten(-n1 * den, num * n * n1 - c1, lo, hi, strict)
        # group 0 gap: ((t + v) * n0 - (pos0 + v) * n) * den vs num * n * n0
        c0 = (t * n0 - pos0 * n) * den
        slope = (n0 - n) * den
        lo, hi = _tighten(slope, num * n * n0 + c0, lo, hi, strict)
        lo, hi = _tighten(-slope, num * n * n0 - c0, lo, hi, strict)
        return lo, hi

    def feasible_rows(u: int) -> tuple[tuple[int, int], ...]:
        lo, hi = window(u, en, ed, strict=False)
        if lo > hi:
            return ()
        if ld == 0:
            return ((lo, hi),)
        ilo, ihi = window(u, ln, ld, strict=True)
        if ilo > ihi:
            return ((lo, hi),)
        pieces = []
        if lo <= min(hi, ilo - 1):
            pieces.append((lo, min(hi, ilo - 1)))
        if max(lo, ihi + 1) <= hi:
            pieces.append((max(lo, ihi + 1), hi))
        return tuple(pieces)

    if any(lo <= 0 <= hi for lo, hi in feasible_rows(0)):
        return _RepairSlice(sub_y.copy(), np.zeros(0, dtype=np.int64), 0.0)

    col = _SideCosts(pos=up1, neg=down1)
    row = _SideCosts(pos=up0, neg=down0)
    state, _ = sweep_net_moves(col, row, feasible_rows)
    if state is None:
        raise Infeasible("no prediction repair satisfies the constraint")
    k1, k0 = state
    repaired = sub_y.copy()
    flips: list[np.ndarray] = []
    for k, order_up, order_down in ((k1, up1_order, down1_order), (k0, up0_order, down0_order)):
        if k > 0:
            sel = order_up[:k]
            repaired[sel] = 1
        elif k < 0:
            sel = order_down[:-k]
            repaired[sel] = 0
        else:
            continue
        flips.append(sel)
    flipped = np.sort(np.concatenate(flips)) if flips else np.zeros(0, dtype=np.int64)
    cost = float(margins[idx][flipped].sum()) if flipped.size else 0.0
    return _RepairSlice(repaired, flipped, cost)


def repair_predictions(
    yhat: np.ndarray,
    margins: np.ndarray,
    sensitive: np.ndarray,
    labels: np.ndarray,
    spec: FairnessSpec,
) -> np.ndarray:
    """Minimally flip predictions so that ``spec`` holds, groups held fixed."""
    metric = FairnessMetric(spec.metric)
    epsilon = Fraction(spec.epsilon)
    lower = Fraction(spec.epsilon_lower) if spec.epsilon_lower else None
    slices = [idx for idx in slice_for_metric(metric, labels) if idx.size]
    repaired = np.array(yhat)
    if metric is FairnessMetric.EODDS and lower is not None and len(slices) == 2:
        parts = _repair_eodds_with_lower(yhat, margins, sensitive, slices, epsilon, lower)
    else:
        parts = [
            _repair_slice(yhat, margins, sensitive, idx, epsilon, lower)
            for idx in slices
        ]
    for idx, part in zip(slices, parts):
        repaired[idx] = part.yhat
    return repaired


def _repair_eodds_with_lower(
    yhat: np.ndarray,
    margins: np.ndarray,
    sensitive: np.ndarray,
    slices: list[np.ndarray],
    epsilon: Fraction,
    lower: Fraction,
) -> list[_RepairSlice]:
    base = [
        _repair_slice(yhat, margins, sensitive, idx, epsilon, None) for idx in slices
    ]
    gaps = [
        unfairness_exact(FairnessMetric.SP, sensitive[idx], part.yhat)
        for idx, part in zip(slices, base)
    ]
    if max(gaps) >= lower:
        return base
    candidates = []
    for carrier in (0, 1):
        try:
            forced = _repair_slice(
                yhat, margins, sensitive, slices[carrier], epsilon, lower
            )
        except Infeasible:
            continue
        combo = [forced if i == carrier else base[i] for i in (0, 1)]
        candidates.append((sum(p.cost for p in combo), carrier, combo))
    if not candidates:
        raise Infeasible("no slice can reach the required lower unfairness bound")
    candidates.sort(key=lambda item: (item[0], item[1]))
    return candidates[0][2]


def make_fair_predictions(
    train: DatasetTable, spec: FairnessSpec, seed: int = 0
) -> np.ndarray:
    """Training-set predictions of the simulated fair target model.

    ``seed`` is accepted for interface stability; the shipped predictor is
    fully deterministic.
    """
    del seed
    if train.n == 0:
        raise ValueError("training table is empty")
    if np.unique(train.sensitive).size < 2:
        raise ValueError("training table must contain both sensitive groups")
    predictor = fit_label_predictor(train)
    yhat, margins = predictor.raw_predictions(train)
    return repair_predictions(yhat, margins, train.sensitive, train.labels, spec)
