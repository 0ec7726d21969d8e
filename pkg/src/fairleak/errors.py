"""Exception hierarchy shared by every module of the package."""


class FairleakError(Exception):
    """Base class for all domain errors raised by this package."""


class LengthMismatch(FairleakError):
    """Input vectors that must share a length do not."""


class EmptyVector(FairleakError):
    """An operation that needs at least one element received none."""


class EmptySlice(FairleakError):
    """The data slice a fairness metric is evaluated on contains no examples."""


class NegativeConfidence(FairleakError):
    """A confidence score is negative or not finite."""


class InvalidTallies(FairleakError):
    """Group tallies, cost arrays and totals are mutually inconsistent."""


class MoveOutOfBounds(FairleakError):
    """A move count exceeds the size of its group."""


class Infeasible(FairleakError):
    """No assignment satisfies the requested constraints."""


class BudgetExceeded(FairleakError):
    """Exhaustive search would enumerate more states than the configured budget."""


class EmptyAttackSet(FairleakError):
    """The attack set has no rows."""


class DegenerateClasses(EmptyAttackSet):
    """The attack set's sensitive column holds a single class."""


class MissingPredictions(FairleakError):
    """Prediction-aware mode requested but no target predictions supplied."""


class SchemaMismatch(FairleakError):
    """Prediction-time columns do not match the columns seen at training."""


class ScoreOutOfRange(FairleakError):
    """A raw attack-model score falls outside [0.5, 1.0]."""


class ParseError(FairleakError):
    """A CSV cell could not be parsed; the message carries row and column."""


class SchemaError(FairleakError):
    """Declared columns or value ranges do not match the file contents."""


class DuplicateId(FairleakError):
    """Two rows share an id."""


class BadFractions(FairleakError):
    """Split fractions are not positive or do not sum to one."""


class BadParameters(FairleakError):
    """Generator parameters are outside their allowed ranges."""


class IoError(FairleakError):
    """A report or dataset file could not be written or read."""
