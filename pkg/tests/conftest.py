import numpy as np
import pytest

from fairleak.core import AttackInstance


def random_instance(
    rng: np.random.Generator,
    n: int | None = None,
    cardinality: int = 2,
    confidence_style: str | None = None,
    max_n: int = 14,
) -> AttackInstance:
    """A random instance; confidence styles rotate through uniform reals,
    the identity vector and coarse ties."""
    if n is None:
        n = int(rng.integers(2, max_n + 1))
    style = confidence_style or rng.choice(["uniform", "identity", "ties"])
    if style == "identity":
        conf = np.ones(n)
    elif style == "ties":
        conf = rng.integers(0, 4, n) / 2.0
    else:
        conf = rng.random(n)
    return AttackInstance(
        predictions=rng.integers(0, 2, n),
        labels=rng.integers(0, 2, n),
        guess=rng.integers(0, cardinality, n),
        confidence=conf,
        truth=rng.integers(0, cardinality, n),
        cardinality=cardinality,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
