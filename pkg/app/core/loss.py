from fractions import Fraction

from app.core.errors import DomainMismatchError, EmptySampleError
from app.core.models import Hypothesis, RealizableDistribution, Sample, Weight


def empirical_error(h: Hypothesis, sample: Sample) -> Fraction:
    """L_S(h): fraction of examples in the sample that h mislabels."""
    if not len(sample):
        raise EmptySampleError("empirical error of an empty sample is undefined")
    for example in sample:
        if example.x >= h.domain_size:
            raise DomainMismatchError(f"example point {example.x} outside domain of size {h.domain_size}")
    mistakes = sum(1 for example in sample if h(example.x) != example.y)
    return Fraction(mistakes, len(sample))


def true_error(h: Hypothesis, distribution: RealizableDistribution) -> Weight:
    """L_D(h): exact sum of the mass on which h and the target disagree."""
    if h.domain_size != distribution.domain_size:
        raise DomainMismatchError(
            f"hypothesis over {h.domain_size} points, distribution over {distribution.domain_size}"
        )
    target = distribution.target
    return sum(
        (w for x, w in enumerate(distribution.pmf) if h(x) != target(x)),
        Fraction(0) if distribution.is_exact else 0.0,
    )
