from __future__ import annotations

import logging
from collections import Counter

from app.core.errors import PreconditionError
from app.core.models import RealizableDistribution
from app.core.parallel import map_trials
from app.core.random_source import COIN_STREAM, DATA_STREAM, RandomSource
from app.core.sampling import draw_samples
from app.services.info.entropy import MIEstimate, entropy_confidence_radius, miller_madow, plugin_entropy
from app.services.info.exact import OutcomeKey, OutputAlgorithm, OutputDistribution, outcome_key

logger = logging.getLogger(__name__)

MIN_MC_TRIALS = 100


def outcome_sequence(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    trials: int,
    rng: RandomSource,
    threads: int = 1,
) -> list[OutcomeKey]:
    """Outcome of each independent run in trial order; trial i draws S^k and coins from stream i of rng."""
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")

    def trial(i: int) -> OutcomeKey:
        trial_rng = rng.derive(i)
        samples = draw_samples(distribution, n, k, trial_rng.derive(DATA_STREAM))
        return outcome_key(algorithm(samples, trial_rng.derive(COIN_STREAM)))

    return map_trials(trial, trials, threads)


def sample_outcomes(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    trials: int,
    rng: RandomSource,
    threads: int = 1,
) -> Counter[OutcomeKey]:
    return Counter(outcome_sequence(algorithm, distribution, n, k, trials, rng, threads))


def estimate_output_distribution_mc(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    trials: int,
    rng: RandomSource,
    threads: int = 1,
) -> OutputDistribution:
    return OutputDistribution.from_counts(sample_outcomes(algorithm, distribution, n, k, trials, rng, threads))


def entropy_estimate(counts: Counter[OutcomeKey]) -> MIEstimate:
    trials = sum(counts.values())
    value = plugin_entropy(counts)
    return MIEstimate(
        value=value,
        method="plug-in",
        trials=trials,
        support_size=len(counts),
        bias_correction=miller_madow(len(counts), trials),
        confidence_radius=entropy_confidence_radius(counts),
        marginal_entropy=value,
        note="entropy of the output; upper-bounds the mutual information",
    )


def estimate_entropy_mc(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    trials: int,
    rng: RandomSource,
    threads: int = 1,
) -> MIEstimate:
    if trials < MIN_MC_TRIALS:
        raise PreconditionError(f"Monte Carlo entropy needs >= {MIN_MC_TRIALS} trials, got {trials}")
    logger.info("estimate_entropy_mc: %d trials (n=%d, k=%d) on %d thread(s)", trials, n, k, threads)
    estimate = entropy_estimate(sample_outcomes(algorithm, distribution, n, k, trials, rng, threads))
    logger.info("estimate_entropy_mc: H=%.4f bits over %d outcomes", estimate.value, estimate.support_size)
    return estimate
