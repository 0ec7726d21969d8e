"""Exact solvers for minimum confidence-weighted guess correction.

Two routes are provided.  ``correct`` runs the efficient path: the group-rate
constraint only depends on the *net* number of guess flips among positively
and among negatively predicted examples, so the search collapses onto a 2-D
integer lattice whose per-axis costs are prefix sums of ascending-sorted
confidences.  Columns are visited best-first by cost; inside a column the
feasible rows form at most two integer intervals (computed with exact integer
cross-multiplication) and the cheapest row is the one nearest zero.  The scan
stops once an unexplored column alone costs more than the best complete
candidate, which proves optimality.

``solve_general_bruteforce`` enumerates every assignment on the active slice
and is the correctness oracle as well as the only multi-valued solver.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .core import (
    AttackInstance,
    FairnessMetric,
    FairnessSpec,
    as_binary_array,
    as_confidence_array,
    slice_for_metric,
    unfairness_exact,
)
from .errors import (
    BudgetExceeded,
    Infeasible,
    InvalidTallies,
    LengthMismatch,
    MoveOutOfBounds,
)

DEFAULT_BRUTEFORCE_BUDGET = 2**20


@dataclass(frozen=True)
class GroupTallies:
    """Cardinalities of the four (guess value x prediction) example groups."""

    n1_pos: int
    n0_pos: int
    n1_neg: int
    n0_neg: int

    @property
    def n(self) -> int:
        return self.n1_pos + self.n0_pos + self.n1_neg + self.n0_neg

    @property
    def total_positive(self) -> int:
        return self.n1_pos + self.n0_pos


@dataclass(frozen=True, eq=False)
class CostArrays:
    """Sorted-and-cumulated confidence costs per move group.

    ``t_X[i]`` is the minimum cost of flipping ``i`` members of group ``X``;
    each array starts at 0 and its increments are non-decreasing.  The
    ``order_X`` companions hold the original indices sorted by ascending
    confidence with ascending index as tie-breaker.
    """

    t1_pos: np.ndarray
    t0_pos: np.ndarray
    t1_neg: np.ndarray
    t0_neg: np.ndarray
    order_1_pos: np.ndarray
    order_0_pos: np.ndarray
    order_1_neg: np.ndarray
    order_0_neg: np.ndarray


@dataclass(frozen=True)
class MoveCounts:
    """The four decision variables: guess flips per (direction x prediction)."""

    s01_pos: int
    s10_pos: int
    s01_neg: int
    s10_neg: int

    @property
    def total(self) -> int:
        return self.s01_pos + self.s10_pos + self.s01_neg + self.s10_neg

    def __add__(self, other: "MoveCounts") -> "MoveCounts":
        return MoveCounts(
            self.s01_pos + other.s01_pos,
            self.s10_pos + other.s10_pos,
            self.s01_neg + other.s01_neg,
            self.s10_neg + other.s10_neg,
        )


@dataclass(frozen=True)
class SolverStats:
    nodes: int
    wall_time: float
    proven_optimal: bool


@dataclass(frozen=True, eq=False)
class CorrectionResult:
    """A corrected sensitive vector with its cost and solve diagnostics."""

    corrected: np.ndarray
    objective: float
    moves: "MoveCounts | dict[tuple[int, int], int]"
    changed_indices: tuple[int, ...]
    stats: SolverStats


def tally_groups(guess: Sequence[int], yhat: Sequence[int]) -> GroupTallies:
    """Count the four (guess value x prediction) groups."""
    g = as_binary_array(guess, "guess")
    yh = as_binary_array(yhat, "predictions")
    if g.size != yh.size:
        raise LengthMismatch("guess and predictions differ in length")
    gb = g.astype(bool)
    yb = yh.astype(bool)
    return GroupTallies(
        n1_pos=int(np.count_nonzero(gb & yb)),
        n0_pos=int(np.count_nonzero(~gb & yb)),
        n1_neg=int(np.count_nonzero(gb & ~yb)),
        n0_neg=int(np.count_nonzero(~gb & ~yb)),
    )


def _sorted_group(conf: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    idx = np.flatnonzero(mask)
    order = idx[np.argsort(conf[idx], kind="stable")]
    totals = np.concatenate(([0.0], np.cumsum(conf[order])))
    return totals, order


def build_cost_arrays(
    guess: Sequence[int], yhat: Sequence[int], confidence: Sequence[float]
) -> CostArrays:
    """Prefix sums of each group's ascending-sorted confidences."""
    g = as_binary_array(guess, "guess")
    yh = as_binary_array(yhat, "predictions")
    p = as_confidence_array(confidence)
    if not g.size == yh.size == p.size:
        raise LengthMismatch("guess, predictions and confidence differ in length")
    gb = g.astype(bool)
    yb = yh.astype(bool)
    t1p, o1p = _sorted_group(p, gb & yb)
    t0p, o0p = _sorted_group(p, ~gb & yb)
    t1n, o1n = _sorted_group(p, gb & ~yb)
    t0n, o0n = _sorted_group(p, ~gb & ~yb)
    return CostArrays(t1p, t0p, t1n, t0n, o1p, o0p, o1n, o0n)


def move_cost(costs: CostArrays, moves: MoveCounts) -> float:
    """Objective value of a move assignment under the given cost arrays."""
    try:
        return float(
            costs.t0_pos[moves.s01_pos]
            + costs.t1_pos[moves.s10_pos]
            + costs.t0_neg[moves.s01_neg]
            + costs.t1_neg[moves.s10_neg]
        )
    except IndexError as exc:
        raise MoveOutOfBounds("move count exceeds its group size") from exc


def _ceil_div(a: int, b: int) -> int:
    # b > 0
    return -((-a) // b)


def _sp_g1_window(
    p1: int, p0: int, n: int, pos_total: int, num: int, den: int
) -> tuple[int, int] | None:
    """Integer range of group-1 sizes keeping both group rates within num/den
    of the overall rate; None when empty.  p1/p0 are the group positives,
    which are fixed along a column."""
    a = pos_total * den + num * n
    b = pos_total * den - num * n
    lo, hi = 1, n - 1
    t1 = p1 * n * den
    t0 = p0 * n * den
    if a > 0:
        lo = max(lo, _ceil_div(t1, a))
        hi = min(hi, n - _ceil_div(t0, a))
    elif t1 > 0 or t0 > 0:
        # no positives allowed anywhere, yet a group holds some
        return None
    if b > 0:
        hi = min(hi, t1 // b)
        lo = max(lo, n - t0 // b)
    if lo > hi:
        return None
    return lo, hi


def _sp_g1_strict_inside(
    p1: int, p0: int, n: int, pos_total: int, num: int, den: int
) -> tuple[int, int] | None:
    """Integer range of group-1 sizes where BOTH group gaps fall strictly
    below num/den (num > 0); None when no size does."""
    a = pos_total * den + num * n  # > 0 since num > 0
    b = pos_total * den - num * n
    t1 = p1 * n * den
    t0 = p0 * n * den
    lo = max(1, t1 // a + 1)
    hi = min(n - 1, n - (t0 // a + 1))
    if b > 0:
        hi = min(hi, _ceil_div(t1, b) - 1)
        lo = max(lo, n - (_ceil_div(t0, b) - 1))
    elif b == 0 and (t1 == 0 or t0 == 0):
        return None
    if lo > hi:
        return None
    return lo, hi


@dataclass(frozen=True, eq=False)
class _SideCosts:
    """V-shaped cost of a signed move count, held as two prefix arrays."""

    pos: np.ndarray
    neg: np.ndarray

    @property
    def lo(self) -> int:
        return -(self.neg.size - 1)

    @property
    def hi(self) -> int:
        return self.pos.size - 1

    def cost(self, v: int) -> float:
        return float(self.pos[v]) if v >= 0 else float(self.neg[-v])

    def ascending(self) -> Iterator[tuple[int, float]]:
        """Yield (value, cost) over the full signed domain, cheapest first."""
        i, j = 0, 1
        while i < self.pos.size or j < self.neg.size:
            if j >= self.neg.size or (i < self.pos.size and self.pos[i] <= self.neg[j]):
                yield i, float(self.pos[i])
                i += 1
            else:
                yield -j, float(self.neg[j])
                j += 1


IntervalFn = Callable[[int], tuple[tuple[int, int], ...]]


def sweep_net_moves(
    col: _SideCosts, row: _SideCosts, feasible_rows: IntervalFn
) -> tuple[tuple[int, int], int] | tuple[None, int]:
    """Best-first scan over net-move columns.

    Visits columns in ascending column cost.  Row costs are V-shaped with
    minimum zero, so within a feasible interval the cheapest row is the one
    nearest zero.  Stops when the next column alone costs more than the best
    complete candidate; ties on cost break on fewest total moves, then on the
    (column, row) pair, keeping the result deterministic and invariant under
    positive rescaling of all confidences.
    """
    best_key: tuple[float, int, int, int] | None = None
    columns = 0
    for u, cu in col.ascending():
        if best_key is not None and cu > best_key[0]:
            break
        columns += 1
        for lo, hi in feasible_rows(u):
            lo = max(lo, row.lo)
            hi = min(hi, row.hi)
            if lo > hi:
                continue
            v = min(max(lo, 0), hi)
            key = (cu + row.cost(v), abs(u) + abs(v), u, v)
            if best_key is None or key < best_key:
                best_key = key
    if best_key is None:
        return None, columns
    return (best_key[2], best_key[3]), columns


def _check_inputs(
    tallies: GroupTallies, costs: CostArrays, total_positive: int, n: int
) -> None:
    if min(tallies.n1_pos, tallies.n0_pos, tallies.n1_neg, tallies.n0_neg) < 0:
        raise InvalidTallies("negative group cardinality")
    if tallies.n != n:
        raise InvalidTallies("tallies do not sum to n")
    if tallies.total_positive != total_positive:
        raise InvalidTallies("tallies disagree with the positive total")
    for arr, size in (
        (costs.t1_pos, tallies.n1_pos),
        (costs.t0_pos, tallies.n0_pos),
        (costs.t1_neg, tallies.n1_neg),
        (costs.t0_neg, tallies.n0_neg),
    ):
        if arr.size != size + 1:
            raise InvalidTallies("cost array length does not match its group")


def _solve_sp_form(
    tallies: GroupTallies,
    costs: CostArrays,
    total_positive: int,
    n: int,
    epsilon: Fraction,
    lower: Fraction | None,
) -> tuple[MoveCounts, int]:
    if n < 2:
        raise Infeasible("both groups must be nonempty, impossible with n < 2")
    n1 = tallies.n1_pos + tallies.n1_neg
    en, ed = epsilon.numerator, epsilon.denominator
    if lower is not None and lower > 0:
        ln, ld = lower.numerator, lower.denominator
    else:
        ln = ld = 0

    def feasible_rows(u: int) -> tuple[tuple[int, int], ...]:
        p1 = tallies.n1_pos + u
        p0 = tallies.n0_pos - u
        window = _sp_g1_window(p1, p0, n, total_positive, en, ed)
        if window is None:
            return ()
        vlo = window[0] - n1 - u
        vhi = window[1] - n1 - u
        if ld == 0:
            return ((vlo, vhi),)
        inside = _sp_g1_strict_inside(p1, p0, n, total_positive, ln, ld)
        if inside is None:
            return ((vlo, vhi),)
        ilo = inside[0] - n1 - u
        ihi = inside[1] - n1 - u
        pieces = []
        if vlo <= min(vhi, ilo - 1):
            pieces.append((vlo, min(vhi, ilo - 1)))
        if max(vlo, ihi + 1) <= vhi:
            pieces.append((max(vlo, ihi + 1), vhi))
        return tuple(pieces)

    col = _SideCosts(pos=costs.t0_pos, neg=costs.t1_pos)
    row = _SideCosts(pos=costs.t0_neg, neg=costs.t1_neg)

    # a feasible baseline needs no search at all
    if any(lo <= 0 <= hi for lo, hi in feasible_rows(0)):
        return MoveCounts(0, 0, 0, 0), 0

    state, columns = sweep_net_moves(col, row, feasible_rows)
    if state is None:
        raise Infeasible("no move assignment satisfies the rate constraints")
    u, v = state
    return MoveCounts(max(u, 0), max(-u, 0), max(v, 0), max(-v, 0)), columns


def solve_efficient(
    tallies: GroupTallies,
    costs: CostArrays,
    total_positive: int,
    n: int,
    spec: FairnessSpec,
) -> MoveCounts:
    """Provably optimal move counts for the SP-form constraint.

    Callers handle other metrics by reducing them to this form on the
    appropriate label slice.
    """
    if FairnessMetric(spec.metric) is not FairnessMetric.SP:
        raise ValueError("solve_efficient expects the SP-form constraint")
    _check_inputs(tallies, costs, total_positive, n)
    lower = Fraction(spec.epsilon_lower) if spec.epsilon_lower else None
    moves, _ = _solve_sp_form(tallies, costs, total_positive, n, Fraction(spec.epsilon), lower)
    return moves


def apply_moves(
    guess: Sequence[int],
    yhat: Sequence[int],
    confidence: Sequence[float],
    moves: MoveCounts,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Flip the cheapest members of each move group.

    Ties break on the lowest original index, so the flipped cost equals the
    solver objective exactly.
    """
    g = as_binary_array(guess, "guess")
    yh = as_binary_array(yhat, "predictions")
    p = as_confidence_array(confidence)
    if not g.size == yh.size == p.size:
        raise LengthMismatch("guess, predictions and confidence differ in length")
    gb = g.astype(bool)
    yb = yh.astype(bool)
    plan = (
        (gb & yb, moves.s10_pos, 0),
        (~gb & yb, moves.s01_pos, 1),
        (gb & ~yb, moves.s10_neg, 0),
        (~gb & ~yb, moves.s01_neg, 1),
    )
    corrected = np.array(g)
    changed: list[np.ndarray] = []
    for mask, count, value in plan:
        if count < 0 or count > int(np.count_nonzero(mask)):
            raise MoveOutOfBounds("move count exceeds its group size")
        if count == 0:
            continue
        _, order = _sorted_group(p, mask)
        sel = order[:count]
        corrected[sel] = value
        changed.append(sel)
    if changed:
        flipped = tuple(int(i) for i in np.sort(np.concatenate(changed)))
    else:
        flipped = ()
    return corrected, flipped


@dataclass(frozen=True, eq=False)
class _SliceSolution:
    moves: MoveCounts
    corrected_slice: np.ndarray
    changed: np.ndarray
    objective: float
    columns: int


def _solve_slice(
    guess: np.ndarray,
    yhat: np.ndarray,
    conf: np.ndarray,
    idx: np.ndarray,
    epsilon: Fraction,
    lower: Fraction | None,
) -> _SliceSolution:
    sub_g = guess[idx]
    sub_y = yhat[idx]
    sub_p = conf[idx]
    tallies = tally_groups(sub_g, sub_y)
    costs = build_cost_arrays(sub_g, sub_y, sub_p)
    moves, columns = _solve_sp_form(
        tallies, costs, tallies.total_positive, tallies.n, epsilon, lower
    )
    corrected_slice, changed_local = apply_moves(sub_g, sub_y, sub_p, moves)
    changed = idx[np.asarray(changed_local, dtype=np.int64)]
    return _SliceSolution(moves, corrected_slice, changed, move_cost(costs, moves), columns)


def correct(instance: AttackInstance, spec: FairnessSpec) -> CorrectionResult:
    """Correct a binary guess to satisfy ``spec`` at minimum weighted cost.

    SP solves on the full set; PE and EO solve the SP form on their label
    slice and leave the complement untouched; EOdds corrects both disjoint
    slices.  Empty slices are no-ops.
    """
    start = time.perf_counter()
    if instance.cardinality != 2:
        raise ValueError("correct() handles binary guesses; use the general model")
    metric = FairnessMetric(spec.metric)
    guess = instance.guess
    yhat = instance.predictions
    conf = instance.confidence
    epsilon = Fraction(spec.epsilon)
    lower = Fraction(spec.epsilon_lower) if spec.epsilon_lower else None
    slices = [idx for idx in slice_for_metric(metric, instance.labels) if idx.size]

    solutions: list[_SliceSolution | None]
    if metric is FairnessMetric.EODDS and lower is not None and len(slices) == 2:
        solutions = _solve_eodds_with_lower(guess, yhat, conf, slices, epsilon, lower)
    else:
        # for single-slice metrics the lower bound applies to the slice gap
        solutions = [_solve_slice(guess, yhat, conf, idx, epsilon, lower) for idx in slices]

    corrected = np.array(guess)
    moves = MoveCounts(0, 0, 0, 0)
    objective = 0.0
    changed: list[np.ndarray] = []
    columns = 0
    for idx, sol in zip(slices, solutions):
        corrected[idx] = sol.corrected_slice
        moves = moves + sol.moves
        objective += sol.objective
        columns += sol.columns
        if sol.changed.size:
            changed.append(sol.changed)
    changed_indices = (
        tuple(int(i) for i in np.sort(np.concatenate(changed))) if changed else ()
    )
    stats = SolverStats(
        nodes=columns, wall_time=time.perf_counter() - start, proven_optimal=True
    )
    corrected.setflags(write=False)
    return CorrectionResult(corrected, objective, moves, changed_indices, stats)


def _solve_eodds_with_lower(
    guess: np.ndarray,
    yhat: np.ndarray,
    conf: np.ndarray,
    slices: list[np.ndarray],
    epsilon: Fraction,
    lower: Fraction,
) -> list[_SliceSolution]:
    """EOdds with a lower bound couples the slices: the max of the two slice
    gaps must reach the bound, so at most one slice has to carry it.  Solve
    both slices upper-only, and only if the bound is missed re-solve each
    slice with the bound attached, keeping the cheaper combination."""
    base = [
        _solve_slice(guess, yhat, conf, idx, epsilon, None) for idx in slices
    ]
    gaps = [
        unfairness_exact(FairnessMetric.SP, sol.corrected_slice, yhat[idx])
        for idx, sol in zip(slices, base)
    ]
    if max(gaps) >= lower:
        return base
    candidates: list[tuple[float, int, list[_SliceSolution]]] = []
    for carrier in (0, 1):
        try:
            forced = _solve_slice(
                guess, yhat, conf, slices[carrier], epsilon, lower
            )
        except Infeasible:
            continue
        combo = [forced if i == carrier else base[i] for i in (0, 1)]
        candidates.append((sum(s.objective for s in combo), carrier, combo))
    if not candidates:
        raise Infeasible("no slice can reach the required lower unfairness bound")
    candidates.sort(key=lambda item: (item[0], item[1]))
    return candidates[0][2]


def _enumeration_positions(
    metric: FairnessMetric, labels: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Positions the general model enumerates, plus the constrained slices
    expressed locally to those positions."""
    n = labels.size
    if metric is FairnessMetric.SP:
        return np.arange(n), [np.arange(n)]
    if metric is FairnessMetric.PE:
        idx = np.flatnonzero(labels == 0)
        return idx, [np.arange(idx.size)]
    if metric is FairnessMetric.EO:
        idx = np.flatnonzero(labels == 1)
        return idx, [np.arange(idx.size)]
    idx = np.arange(n)
    local = [np.flatnonzero(labels == 0), np.flatnonzero(labels == 1)]
    return idx, [sl for sl in local if sl.size]


def _class_feasible(
    row: Sequence[int],
    slice_meta: list[tuple[int, int]],
    k: int,
    epsilon: Fraction,
    lower: Fraction | None,
) -> bool:
    """Exact feasibility of one (counts, positives) signature.

    ``row`` holds 2k interleaved entries per slice; ``slice_meta`` carries
    (slice size, slice positive total)."""
    worst = Fraction(0)
    offset = 0
    for size, pos_total in slice_meta:
        overall = Fraction(pos_total, size)
        for g in range(k):
            count = int(row[offset + 2 * g])
            pos = int(row[offset + 2 * g + 1])
            if count == 0:
                return False
            gap = abs(overall - Fraction(pos, count))
            if gap > epsilon:
                return False
            if gap > worst:
                worst = gap
        offset += 2 * k
    if lower is not None and lower > 0 and worst < lower:
        return False
    return True


def solve_general_bruteforce(
    instance: AttackInstance,
    spec: FairnessSpec,
    cardinality: int | None = None,
    budget: int = DEFAULT_BRUTEFORCE_BUDGET,
) -> CorrectionResult:
    """Exhaustive minimum-cost correction over the active slice.

    Serves as the correctness oracle for the efficient path and as the only
    solver for multi-valued sensitive attributes.
    """
    start = time.perf_counter()
    k = instance.cardinality if cardinality is None else cardinality
    if k < 2:
        raise ValueError("cardinality must be at least 2")
    if instance.guess.size and int(instance.guess.max()) >= k:
        raise ValueError("guess values exceed the requested cardinality")
    metric = FairnessMetric(spec.metric)
    guess = instance.guess
    yhat = instance.predictions
    conf = instance.confidence
    enum_idx, local_slices = _enumeration_positions(metric, instance.labels)
    m = int(enum_idx.size)

    if m == 0:
        corrected = np.array(guess)
        corrected.setflags(write=False)
        moves = MoveCounts(0, 0, 0, 0) if k == 2 else {}
        stats = SolverStats(0, time.perf_counter() - start, True)
        return CorrectionResult(corrected, 0.0, moves, (), stats)

    states = k**m
    if states > budget:
        raise BudgetExceeded(f"{k}**{m} states exceed the budget of {budget}")

    digits = ((np.arange(states)[:, None] // k ** np.arange(m)) % k).astype(np.int8)
    sub_guess = guess[enum_idx].astype(np.int8)
    sub_conf = conf[enum_idx]
    cost = ((digits != sub_guess) * sub_conf).sum(axis=1)

    sub_yhat = yhat[enum_idx]
    stats_cols: list[np.ndarray] = []
    slice_meta: list[tuple[int, int]] = []
    for sl in local_slices:
        pos_mask = sub_yhat[sl] == 1
        slice_meta.append((int(sl.size), int(np.count_nonzero(pos_mask))))
        block = digits[:, sl]
        for g in range(k):
            eq = block == g
            stats_cols.append(eq.sum(axis=1))
            stats_cols.append(eq[:, pos_mask].sum(axis=1))
    signature = np.stack(stats_cols, axis=1)
    uniq, inverse = np.unique(signature, axis=0, return_inverse=True)

    epsilon = Fraction(spec.epsilon)
    lower = Fraction(spec.epsilon_lower) if spec.epsilon_lower else None
    uniq_ok = np.array(
        [_class_feasible(row, slice_meta, k, epsilon, lower) for row in uniq.tolist()],
        dtype=bool,
    )
    feasible = uniq_ok[inverse]
    if not feasible.any():
        raise Infeasible("exhaustive search found no feasible assignment")

    cand = np.flatnonzero(feasible)
    best = int(cand[np.argmin(cost[cand])])
    assignment = digits[best].astype(np.int64)

    corrected = np.array(guess)
    corrected[enum_idx] = assignment
    corrected.setflags(write=False)
    changed_mask = assignment != guess[enum_idx]
    changed_indices = tuple(int(i) for i in enum_idx[changed_mask])

    moves: MoveCounts | dict[tuple[int, int], int]
    if k == 2:
        pos = sub_yhat == 1
        old = guess[enum_idx]
        moves = MoveCounts(
            s01_pos=int(np.count_nonzero((old == 0) & (assignment == 1) & pos)),
            s10_pos=int(np.count_nonzero((old == 1) & (assignment == 0) & pos)),
            s01_neg=int(np.count_nonzero((old == 0) & (assignment == 1) & ~pos)),
            s10_neg=int(np.count_nonzero((old == 1) & (assignment == 0) & ~pos)),
        )
    else:
        moves = {}
        old = guess[enum_idx]
        for a, b in zip(old[changed_mask].tolist(), assignment[changed_mask].tolist()):
            moves[(a, b)] = moves.get((a, b), 0) + 1

    stats = SolverStats(states, time.perf_counter() - start, True)
    return CorrectionResult(
        corrected, float(cost[best]), moves, changed_indices, stats
    )
