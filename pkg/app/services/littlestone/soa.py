from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from app.core.errors import NonRealizableError, PreconditionError
from app.core.models import Hypothesis, HypothesisClass, LabeledExample, Sample
from app.core.random_source import CoinSource
from app.services.littlestone.dimension import ldim_of_masks, split

logger = logging.getLogger(__name__)


def predict_from_masks(masks: frozenset[int], domain_size: int, x: int) -> int:
    """SOA vote: the label whose restriction keeps the larger Littlestone dimension; ties go to 1."""
    zeros, ones = split(masks, domain_size, x)
    if not ones:
        return 0
    if not zeros:
        return 1
    return 1 if ldim_of_masks(ones, domain_size) >= ldim_of_masks(zeros, domain_size) else 0


@lru_cache(maxsize=65536)
def output_from_masks(masks: frozenset[int], domain_size: int) -> int:
    """Canonical id of the SOA output function for a final version space."""
    value = 0
    for x in range(domain_size):
        value = (value << 1) | predict_from_masks(masks, domain_size, x)
    return value


def consistent_masks(masks: frozenset[int], domain_size: int, example: LabeledExample) -> frozenset[int]:
    bit = 1 << (domain_size - 1 - example.x)
    want = bit if example.y else 0
    return frozenset(h for h in masks if h & bit == want)


@dataclass(frozen=True)
class SoaState:
    version_space: HypothesisClass
    mistakes: int = 0
    history: Sample = field(default_factory=Sample)

    def update(self, example: LabeledExample) -> "SoaState":
        prediction = soa_predict(self, example.x)
        masks = consistent_masks(self.version_space.masks, self.version_space.domain_size, example)
        if not masks:
            raise NonRealizableError(len(self.history) + 1)
        return SoaState(
            HypothesisClass.from_masks(self.version_space.domain_size, masks),
            self.mistakes + (prediction != example.y),
            self.history + Sample((example,)),
        )


def soa_predict(state: SoaState, x: int) -> int:
    if state.version_space.is_empty:
        raise NonRealizableError(len(state.history), "SOA cannot predict from an empty version space")
    state.version_space.check_point(x)
    return predict_from_masks(state.version_space.masks, state.version_space.domain_size, x)


class SoaResult(NamedTuple):
    hypothesis: Hypothesis
    mistakes: int


def soa_run(hypothesis_class: HypothesisClass, sequence: Sample) -> SoaResult:
    """Predict, reveal, restrict over the sequence; return the final SOA output and the mistake count."""
    m = hypothesis_class.domain_size
    masks = hypothesis_class.masks
    mistakes = 0
    for i, example in enumerate(sequence):
        if not 0 <= example.x < m:
            raise PreconditionError(f"example point {example.x} outside domain of size {m}")
        if predict_from_masks(masks, m, example.x) != example.y:
            mistakes += 1
        masks = consistent_masks(masks, m, example)
        if not masks:
            raise NonRealizableError(i + 1)
    return SoaResult(Hypothesis.from_canonical_id(output_from_masks(masks, m), m), mistakes)


class SoaLearner:
    """SOA run on the first ``sample_size`` examples of its input, as a batch learner."""

    def __init__(self, hypothesis_class: HypothesisClass, sample_size: int):
        if sample_size < 1:
            raise PreconditionError(f"sample_size must be >= 1, got {sample_size}")
        self.hypothesis_class = hypothesis_class
        self.sample_size = sample_size

    def __call__(self, sample: Sample, coins: CoinSource | None = None) -> Hypothesis:
        return soa_run(self.hypothesis_class, sample[: self.sample_size]).hypothesis
