"""
Hull-of-positives SOA for affine subspaces and the coin-free stable learner.

The SOA for indicators of affine subspaces keeps the affine hull of the
positives seen so far. In the modified tournament two disagreeing hull
predictors differ at a point lying in one of the hulls, hence inside the
target's subspace, so the disagreement point is appended with label 1 and both
branches continue together.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

from app.core.errors import InvariantViolation, NonRealizableError, PreconditionError
from app.core.models import Hypothesis, LabeledExample, RealizableDistribution, Sample
from app.core.random_source import COIN_STREAM, DATA_STREAM, LEVEL_STREAM, CoinSource, RandomSource
from app.core.sampling import draw_sample
from app.services.affine.field import AffineClassParams, AffineDomain, AffineSubspace
from app.services.stable.tournament import AugmentedSequence, EntryKind, Resolution, split_leaves

logger = logging.getLogger(__name__)


class AffineSoaResult(NamedTuple):
    subspace: AffineSubspace
    hypothesis: Hypothesis
    mistakes: int


def soa_affine(params: AffineClassParams, sequence: Sample) -> AffineSoaResult:
    """Online pass over ``sequence`` (points are indices into F_q^l in lexicographic order)."""
    domain = AffineDomain.of(params)
    hull = AffineSubspace.empty(params.q, params.l)
    mistakes = 0
    for i, example in enumerate(sequence):
        x = domain.vector(example.x)
        prediction = hull.member(x)
        if prediction == example.y:
            continue
        if example.y == 0:
            raise NonRealizableError(i + 1, f"negative example {x} lies inside the hull of earlier positives")
        mistakes += 1
        hull = hull.join(x)
        if hull.dim > params.d:
            raise NonRealizableError(i + 1, f"positives span a subspace of dimension {hull.dim} > d={params.d}")
    return AffineSoaResult(hull, hull.indicator(domain), mistakes)


@dataclass(frozen=True)
class AffineTournamentResult:
    sequence: AugmentedSequence
    subspace: AffineSubspace
    resolution: Resolution


@dataclass(frozen=True)
class AffineRun:
    hypothesis: Hypothesis
    subspace: AffineSubspace
    level: int
    tournament: AffineTournamentResult
    prefix: Sample


def first_disagreement(f: Hypothesis, g: Hypothesis) -> int | None:
    return next((x for x in range(f.domain_size) if f(x) != g(x)), None)


class AffineStableLearner:
    """
    The modified G for affine subspaces of dimension at most d.

    Reads ``prefix_size`` consistency examples followed by 2^{d+1} leaves of
    ``leaf_size`` examples; the level is uniform on {0..d+1}. When ``target`` is
    given, every inferred label is checked against it.
    """

    def __init__(
        self,
        params: AffineClassParams,
        leaf_size: int,
        prefix_size: int,
        target: Hypothesis | None = None,
    ):
        if leaf_size < 1 or prefix_size < 0:
            raise PreconditionError(f"need leaf_size >= 1 and prefix_size >= 0, got {leaf_size}, {prefix_size}")
        self.params = params
        self.domain = AffineDomain.of(params)
        self.leaf_size = leaf_size
        self.prefix_size = prefix_size
        self.target = target
        self.max_level = params.d + 1
        self.sample_size = prefix_size + 2**self.max_level * leaf_size

    def _play(self, level: int, leaves: Iterator[Sample]) -> AffineTournamentResult:
        if level == 0:
            leaf = next(leaves)
            return AffineTournamentResult(
                AugmentedSequence.from_real(leaf), soa_affine(self.params, leaf).subspace, Resolution.LEAF
            )
        left = self._play(level - 1, leaves)
        right = self._play(level - 1, leaves)
        if left.subspace == right.subspace:
            return AffineTournamentResult(left.sequence, left.subspace, Resolution.AGREEMENT)

        x = first_disagreement(left.subspace.indicator(self.domain), right.subspace.indicator(self.domain))
        if self.target is not None and self.target(x) != 1:
            raise InvariantViolation(f"disagreement point {self.domain.vector(x)} is labeled 0 by the target")
        merged = (left.sequence + right.sequence).append(LabeledExample(x, 1), EntryKind.INFERRED)
        return AffineTournamentResult(merged, soa_affine(self.params, merged.sample).subspace, Resolution.DISAGREEMENT)

    def run(self, sample: Sample, coins: CoinSource) -> AffineRun:
        if len(sample) < self.sample_size:
            raise PreconditionError(f"affine G reads {self.sample_size} examples, got {len(sample)}")
        level = coins.derive(LEVEL_STREAM).randbelow(self.max_level + 1)
        prefix = sample[: self.prefix_size]
        leaves = split_leaves(sample[self.prefix_size :], self.leaf_size, 2**level)
        result = self._play(level, iter(leaves))
        final = soa_affine(self.params, result.sequence.sample + prefix)
        return AffineRun(final.hypothesis, final.subspace, level, result, prefix)

    def __call__(self, sample: Sample, coins: CoinSource) -> Hypothesis:
        return self.run(sample, coins).hypothesis


def stable_affine_learn(
    params: AffineClassParams,
    distribution: RealizableDistribution,
    leaf_size: int,
    rng: RandomSource,
    prefix_size: int | None = None,
) -> Hypothesis:
    learner = AffineStableLearner(
        params, leaf_size, leaf_size if prefix_size is None else prefix_size, target=distribution.target
    )
    sample = draw_sample(distribution, learner.sample_size, rng.derive(DATA_STREAM))
    return learner(sample, rng.derive(COIN_STREAM))


def affine_distribution(
    params: AffineClassParams,
    target: AffineSubspace,
    pmf: Sequence[float] | None = None,
) -> RealizableDistribution:
    """Distribution over F_q^l labeled by ``target``; uniform unless a pmf is given."""
    domain = AffineDomain.of(params)
    if target.dim > params.d:
        raise PreconditionError(f"target has dimension {target.dim} > d={params.d}")
    weights = tuple(pmf) if pmf is not None else tuple([1.0 / domain.size] * domain.size)
    return RealizableDistribution(weights, target.indicator(domain))
