from typing import Protocol

from app.core.models import Hypothesis, Sample
from app.core.random_source import CoinSource


class SampleLearner(Protocol):
    """A possibly randomized batch learner that reads the first ``sample_size`` examples it is given."""

    sample_size: int

    def __call__(self, sample: Sample, coins: CoinSource) -> Hypothesis: ...
