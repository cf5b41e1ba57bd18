from __future__ import annotations

import logging
from dataclasses import dataclass

from app.core.errors import PreconditionError, NonRealizableError
from app.core.models import Hypothesis, HypothesisClass, RealizableDistribution, Sample
from app.core.random_source import COIN_STREAM, DATA_STREAM, LEVEL_STREAM, CoinSource, RandomSource
from app.core.sampling import draw_sample
from app.services.littlestone.dimension import ldim
from app.services.littlestone.soa import soa_run
from app.services.stable.params import StabilityParams
from app.services.stable.tournament import TournamentResult, play_tournament, split_leaves

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StableRun:
    hypothesis: Hypothesis
    level: int
    tournament: TournamentResult
    prefix: Sample
    # hallucinated entries contradicted the prefix and were dropped
    dropped_hallucinations: bool


class GloballyStableLearner:
    """
    G over a sample of ``params.sample_size`` examples.

    The first ``prefix_size`` examples form the consistency prefix P; the rest are
    cut into 2^d leaves. A level T is drawn uniformly from {0..d}, the level-T
    tournament is played on the first 2^T leaves, and the SOA is rerun on the
    tournament sequence followed by P, so the output never errs on P.
    """

    def __init__(self, hypothesis_class: HypothesisClass, params: StabilityParams):
        dimension = ldim(hypothesis_class)
        if dimension > params.d:
            raise PreconditionError(f"class has Littlestone dimension {dimension} > params.d={params.d}")
        self.hypothesis_class = hypothesis_class
        self.params = params
        self.sample_size = params.sample_size

    def run(self, sample: Sample, coins: CoinSource) -> StableRun:
        if len(sample) < self.sample_size:
            raise PreconditionError(f"G reads {self.sample_size} examples, got {len(sample)}")
        params = self.params
        level = coins.derive(LEVEL_STREAM).randbelow(params.d + 1)
        prefix = sample[: params.prefix_size]
        leaves = split_leaves(sample[params.prefix_size :], params.leaf_size, 2**level)
        result = play_tournament(level, self.hypothesis_class, leaves, coins.derive(COIN_STREAM))
        try:
            output = soa_run(self.hypothesis_class, result.sequence.sample + prefix).hypothesis
            dropped = False
        except NonRealizableError:
            output = soa_run(self.hypothesis_class, result.sequence.real_sample + prefix).hypothesis
            dropped = True
        return StableRun(output, level, result, prefix, dropped)

    def __call__(self, sample: Sample, coins: CoinSource) -> Hypothesis:
        return self.run(sample, coins).hypothesis


def globally_stable_learn(
    hypothesis_class: HypothesisClass,
    distribution: RealizableDistribution,
    params: StabilityParams,
    rng: RandomSource,
) -> Hypothesis:
    learner = GloballyStableLearner(hypothesis_class, params)
    sample = draw_sample(distribution, learner.sample_size, rng.derive(DATA_STREAM))
    return learner(sample, rng.derive(COIN_STREAM))
