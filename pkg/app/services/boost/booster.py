"""
Frequency boosting of a globally stable learner.

G is run on k independent samples; the most frequent output is returned when
its count reaches ceil(eta*k/2), otherwise the run is a Failure. Failure is an
ordinary outcome value.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from app.core.errors import ConfigError, PreconditionError
from app.core.models import Hypothesis, RealizableDistribution, Sample
from app.core.numbers import as_fraction
from app.core.parallel import map_trials
from app.core.protocols import SampleLearner
from app.core.random_source import COIN_STREAM, DATA_STREAM, CoinSource, RandomSource
from app.core.sampling import draw_samples

logger = logging.getLogger(__name__)

FAILURE = "failure"
FUNCTION = "function"


@dataclass(frozen=True)
class FrequencyTable:
    counts: dict[int, int]
    k: int
    hypotheses: dict[int, Hypothesis]

    @property
    def max_count(self) -> int:
        return max(self.counts.values())

    @property
    def plurality_id(self) -> int:
        """Id with the largest count; ties go to the smallest canonical id."""
        return min(self.counts, key=lambda cid: (-self.counts[cid], cid))


def frequency_table(outputs: Sequence[Hypothesis]) -> FrequencyTable:
    if not outputs:
        raise PreconditionError("frequency table needs at least one output")
    counts = Counter(h.canonical_id for h in outputs)
    hypotheses = {h.canonical_id: h for h in outputs}
    return FrequencyTable(dict(sorted(counts.items())), len(outputs), hypotheses)


def boost_threshold(eta: float | Fraction, k: int) -> int:
    return math.ceil(as_fraction(eta) * k / 2)


@dataclass(frozen=True)
class BoostConfig:
    k: int
    eta: float | Fraction
    n: int

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ConfigError(f"k and n must be >= 1, got k={self.k}, n={self.n}")
        eta = as_fraction(self.eta)
        if not 0 < eta <= 1:
            raise ConfigError(f"eta must lie in (0, 1], got {self.eta}")
        if eta * self.k / 2 < 2:
            raise ConfigError(f"eta*k/2 must be >= 2, got {float(eta * self.k / 2):.4f}")

    @property
    def threshold(self) -> int:
        return boost_threshold(self.eta, self.k)


@dataclass(frozen=True)
class BoostOutcome:
    hypothesis: Hypothesis | None
    table: FrequencyTable
    threshold: int

    @property
    def is_failure(self) -> bool:
        return self.hypothesis is None

    @property
    def outcome(self) -> str:
        return FAILURE if self.is_failure else FUNCTION

    @property
    def key(self) -> int | str:
        return FAILURE if self.hypothesis is None else self.hypothesis.canonical_id

    def to_json(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome,
            "g_maj_id": None if self.hypothesis is None else self.hypothesis.canonical_id,
            "counts": {str(cid): count for cid, count in self.table.counts.items()},
            "threshold": self.threshold,
        }


def decide(outputs: Sequence[Hypothesis], threshold: int) -> BoostOutcome:
    table = frequency_table(outputs)
    if table.max_count >= threshold:
        return BoostOutcome(table.hypotheses[table.plurality_id], table, threshold)
    return BoostOutcome(None, table, threshold)


class BoostedLearner:
    """A_G as an algorithm over k samples and coins; run i gets coin stream i."""

    def __init__(self, learner: SampleLearner, eta: float | Fraction, k: int):
        self.learner = learner
        self.eta = eta
        self.k = k
        self.threshold = boost_threshold(eta, k)

    def __call__(self, samples: Sequence[Sample], coins: CoinSource) -> BoostOutcome:
        if len(samples) != self.k:
            raise PreconditionError(f"A_G expects {self.k} samples, got {len(samples)}")
        outputs = [self.learner(sample, coins.derive(i)) for i, sample in enumerate(samples)]
        return decide(outputs, self.threshold)


def run_boost(
    learner: SampleLearner,
    distribution: RealizableDistribution,
    cfg: BoostConfig,
    rng: RandomSource,
) -> BoostOutcome:
    if cfg.n < learner.sample_size:
        raise ConfigError(f"per-run sample size n={cfg.n} is below what G reads ({learner.sample_size})")
    samples = draw_samples(distribution, cfg.n, cfg.k, rng.derive(DATA_STREAM))
    return BoostedLearner(learner, cfg.eta, cfg.k)(samples, rng.derive(COIN_STREAM))


def run_boost_trials(
    learner: SampleLearner,
    distribution: RealizableDistribution,
    cfg: BoostConfig,
    trials: int,
    rng: RandomSource,
    threads: int = 1,
) -> list[BoostOutcome]:
    logger.info("run_boost_trials: %d boost runs of k=%d on %d thread(s)", trials, cfg.k, threads)
    return map_trials(lambda i: run_boost(learner, distribution, cfg, rng.derive(i)), trials, threads)


def failure_rate(outcomes: Sequence[BoostOutcome]) -> tuple[float, float]:
    """(empirical failure frequency, its binomial standard error)."""
    if not outcomes:
        raise PreconditionError("failure rate of zero boost runs is undefined")
    p = sum(o.is_failure for o in outcomes) / len(outcomes)
    return p, math.sqrt(p * (1 - p) / len(outcomes))


def k_choice(delta: float, eta: float | Fraction) -> int:
    """k = ceil(max(4 ln(1/delta)/eta, 10/eta)); the 10/eta branch is exact in rationals."""
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    if not 0 < eta <= 1:
        raise PreconditionError(f"eta must lie in (0, 1], got {eta}")
    exact_eta = as_fraction(eta)
    k_floor = math.ceil(Fraction(10) / exact_eta)
    log_branch = 4 * math.log(1 / delta) / float(exact_eta)
    nearest = round(log_branch)
    # only a value within rounding error of an integer snaps to it
    k_log = nearest if math.isclose(log_branch, nearest, rel_tol=1e-12) else math.ceil(log_branch)
    return max(k_floor, k_log)
