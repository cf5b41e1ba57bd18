import numpy as np

from app.core.errors import EmptySampleError
from app.core.models import LabeledExample, RealizableDistribution, Sample
from app.core.random_source import RandomSource


def draw_sample(distribution: RealizableDistribution, n: int, rng: RandomSource) -> Sample:
    """n i.i.d. points from the pmf, each labeled by the target."""
    if n < 1:
        raise EmptySampleError(f"sample size must be >= 1, got {n}")
    weights = np.asarray([float(w) for w in distribution.pmf], dtype=np.float64)
    points = rng.generator.choice(len(weights), size=n, p=weights / weights.sum())
    target = distribution.target
    return Sample(tuple(LabeledExample(int(x), target(int(x))) for x in points))


def draw_samples(distribution: RealizableDistribution, n: int, k: int, rng: RandomSource) -> list[Sample]:
    """k independent samples of size n, sample i drawn from stream i of rng."""
    return [draw_sample(distribution, n, rng.derive(i)) for i in range(k)]
