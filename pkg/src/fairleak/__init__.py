"""Correct a sensitive-attribute reconstruction to match a model's released
statistical-fairness guarantee, and benchmark the surrounding attack pipeline.
"""

from . import errors, harness
from .adversary import (
    DEFAULT_K_GRID,
    MODE_A,
    MODE_A_PRIME,
    AttackModel,
    AttackSet,
    BaselineGuess,
    predict_guess,
    process_confidences,
    shape_confidences,
    train_baseline,
)
from .core import (
    SLACK,
    AttackInstance,
    FairnessMetric,
    FairnessSpec,
    reconstruction_accuracy,
    satisfies,
    slice_for_metric,
    unfairness,
    unfairness_exact,
)
from .corrector import (
    DEFAULT_BRUTEFORCE_BUDGET,
    CorrectionResult,
    CostArrays,
    GroupTallies,
    MoveCounts,
    SolverStats,
    apply_moves,
    build_cost_arrays,
    correct,
    move_cost,
    solve_efficient,
    solve_general_bruteforce,
    tally_groups,
)
from .estimator import EstimatedConstraint, estimate_constraint

__version__ = "0.1.0"

__all__ = [
    "AttackInstance",
    "AttackModel",
    "AttackSet",
    "BaselineGuess",
    "CorrectionResult",
    "CostArrays",
    "DEFAULT_BRUTEFORCE_BUDGET",
    "DEFAULT_K_GRID",
    "EstimatedConstraint",
    "FairnessMetric",
    "FairnessSpec",
    "GroupTallies",
    "MODE_A",
    "MODE_A_PRIME",
    "MoveCounts",
    "SLACK",
    "SolverStats",
    "apply_moves",
    "build_cost_arrays",
    "correct",
    "errors",
    "estimate_constraint",
    "harness",
    "move_cost",
    "predict_guess",
    "process_confidences",
    "reconstruction_accuracy",
    "satisfies",
    "shape_confidences",
    "slice_for_metric",
    "solve_efficient",
    "solve_general_bruteforce",
    "tally_groups",
    "train_baseline",
    "unfairness",
    "unfairness_exact",
]
