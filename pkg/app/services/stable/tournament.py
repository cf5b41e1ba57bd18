"""
Tournament of SOA outputs.

Level 0 runs the SOA on a leaf sample. Level t runs two level t-1 tournaments;
if their outputs agree the left result is kept, otherwise a disagreement point
x is labeled against one side (a hallucinated example the SOA must err on) and
a fair coin picks which side continues.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

from app.core.errors import PreconditionError
from app.core.models import Hypothesis, HypothesisClass, LabeledExample, RealizableDistribution, Sample
from app.core.random_source import COIN_STREAM, DATA_STREAM, CoinSource, RandomSource
from app.core.sampling import draw_sample
from app.services.littlestone.soa import consistent_masks, soa_run

logger = logging.getLogger(__name__)


class EntryKind(str, Enum):
    REAL = "real"
    HALLUCINATED = "hallucinated"
    # appended with a label known to be the target's
    INFERRED = "inferred"


@dataclass(frozen=True)
class AugmentedEntry:
    example: LabeledExample
    kind: EntryKind


@dataclass(frozen=True)
class AugmentedSequence:
    entries: tuple[AugmentedEntry, ...] = ()

    @classmethod
    def from_real(cls, sample: Sample) -> "AugmentedSequence":
        return cls(tuple(AugmentedEntry(e, EntryKind.REAL) for e in sample))

    @property
    def forced_mistakes(self) -> int:
        return sum(1 for e in self.entries if e.kind is EntryKind.HALLUCINATED)

    @property
    def sample(self) -> Sample:
        return Sample(tuple(e.example for e in self.entries))

    @property
    def real_sample(self) -> Sample:
        return Sample(tuple(e.example for e in self.entries if e.kind is not EntryKind.HALLUCINATED))

    def append(self, example: LabeledExample, kind: EntryKind) -> "AugmentedSequence":
        return AugmentedSequence(self.entries + (AugmentedEntry(example, kind),))

    def __add__(self, other: "AugmentedSequence") -> "AugmentedSequence":
        return AugmentedSequence(self.entries + other.entries)

    def __len__(self) -> int:
        return len(self.entries)


class Resolution(str, Enum):
    LEAF = "leaf"
    AGREEMENT = "agreement"
    DISAGREEMENT = "disagreement"
    # no disagreement point admitted a realizable continuation
    FALLBACK = "fallback"


@dataclass(frozen=True)
class TournamentResult:
    sequence: AugmentedSequence
    hypothesis: Hypothesis
    resolution: Resolution

    @property
    def agreed(self) -> bool:
        return self.resolution is Resolution.AGREEMENT


def is_realizable(hypothesis_class: HypothesisClass, sample: Sample) -> bool:
    masks = hypothesis_class.masks
    for example in sample:
        masks = consistent_masks(masks, hypothesis_class.domain_size, example)
        if not masks:
            return False
    return True


def split_leaves(sample: Sample, leaf_size: int, count: int) -> list[Sample]:
    if len(sample) < leaf_size * count:
        raise PreconditionError(f"need {leaf_size * count} examples for {count} leaves, got {len(sample)}")
    return [sample[i * leaf_size : (i + 1) * leaf_size] for i in range(count)]


def _play(
    level: int,
    hypothesis_class: HypothesisClass,
    leaves: Iterator[Sample],
    coins: CoinSource,
) -> TournamentResult:
    if level == 0:
        leaf = next(leaves)
        return TournamentResult(
            AugmentedSequence.from_real(leaf), soa_run(hypothesis_class, leaf).hypothesis, Resolution.LEAF
        )

    left = _play(level - 1, hypothesis_class, leaves, coins)
    right = _play(level - 1, hypothesis_class, leaves, coins)
    if left.hypothesis == right.hypothesis:
        return TournamentResult(left.sequence, left.hypothesis, Resolution.AGREEMENT)

    f, g = left.hypothesis, right.hypothesis
    for x in range(hypothesis_class.domain_size):
        if f(x) == g(x):
            continue
        options = [
            continuation
            for continuation in (
                left.sequence.append(LabeledExample(x, g(x)), EntryKind.HALLUCINATED),
                right.sequence.append(LabeledExample(x, f(x)), EntryKind.HALLUCINATED),
            )
            if is_realizable(hypothesis_class, continuation.sample)
        ]
        if not options:
            continue
        chosen = options[coins.coin()] if len(options) == 2 else options[0]
        return TournamentResult(
            chosen, soa_run(hypothesis_class, chosen.sample).hypothesis, Resolution.DISAGREEMENT
        )

    logger.debug("tournament: level %d found no realizable disagreement continuation", level)
    return TournamentResult(left.sequence, left.hypothesis, Resolution.FALLBACK)


def play_tournament(
    level: int,
    hypothesis_class: HypothesisClass,
    leaves: Sequence[Sample],
    coins: CoinSource,
) -> TournamentResult:
    """Run a level-``level`` tournament over 2^level leaf samples, consumed left to right."""
    if level < 0:
        raise PreconditionError(f"tournament level must be >= 0, got {level}")
    if len(leaves) < 2**level:
        raise PreconditionError(f"level {level} needs {2**level} leaves, got {len(leaves)}")
    return _play(level, hypothesis_class, iter(leaves), coins)


def tournament(
    t: int,
    hypothesis_class: HypothesisClass,
    distribution: RealizableDistribution,
    leaf_size: int,
    rng: RandomSource,
) -> TournamentResult:
    """Draw 2^t fresh leaves of ``leaf_size`` examples and play the tournament."""
    if t < 0:
        raise PreconditionError(f"tournament level must be >= 0, got {t}")
    if distribution.target not in hypothesis_class:
        raise PreconditionError("the class does not realize the distribution")
    sample = draw_sample(distribution, 2**t * leaf_size, rng.derive(DATA_STREAM))
    return play_tournament(t, hypothesis_class, split_leaves(sample, leaf_size, 2**t), rng.derive(COIN_STREAM))
