from __future__ import annotations

import logging
import math
from collections import Counter
from statistics import NormalDist
from typing import Any

from pydantic import BaseModel

from app.core.errors import PreconditionError
from app.core.models import Hypothesis, RealizableDistribution
from app.core.parallel import map_trials
from app.core.protocols import SampleLearner
from app.core.random_source import COIN_STREAM, DATA_STREAM, RandomSource
from app.core.sampling import draw_sample

logger = logging.getLogger(__name__)

CONFIDENCE = 0.99


def z_score(confidence: float = CONFIDENCE) -> float:
    return NormalDist().inv_cdf(1 - (1 - confidence) / 2)


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if trials < 1:
        raise PreconditionError("Wilson interval needs at least one trial")
    z = z_score(confidence)
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


class StabilityReport(BaseModel):
    domain_size: int
    trials: int
    counts: dict[int, int]
    f0_id: int
    eta_hat: float
    confidence_radius: float
    wilson_lower: float
    wilson_upper: float
    confidence: float = CONFIDENCE
    regime: str | None = None

    @classmethod
    def from_counts(
        cls, counts: dict[int, int], domain_size: int, regime: str | None = None
    ) -> "StabilityReport":
        trials = sum(counts.values())
        f0_id, top = min(counts.items(), key=lambda item: (-item[1], item[0]))
        lower, upper = wilson_interval(top, trials)
        return cls(
            domain_size=domain_size,
            trials=trials,
            counts=dict(sorted(counts.items())),
            f0_id=f0_id,
            eta_hat=top / trials,
            confidence_radius=(upper - lower) / 2,
            wilson_lower=lower,
            wilson_upper=upper,
            regime=regime,
        )

    def merge(self, other: "StabilityReport") -> "StabilityReport":
        if other.domain_size != self.domain_size:
            raise PreconditionError("cannot merge stability reports over different domains")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return StabilityReport.from_counts(dict(merged), self.domain_size, self.regime or other.regime)

    def frequencies(self) -> dict[int, float]:
        return {cid: count / self.trials for cid, count in self.counts.items()}

    def hypothesis(self, canonical_id: int) -> Hypothesis:
        return Hypothesis.from_canonical_id(canonical_id, self.domain_size)

    @property
    def f0(self) -> Hypothesis:
        return self.hypothesis(self.f0_id)

    def to_records(self) -> list[dict[str, Any]]:
        rows: list[dict[str, Any]] = [
            {"record": "hypothesis", "id": cid, "bits": self.hypothesis(cid).bitstring, "count": count, "freq": count / self.trials}
            for cid, count in self.counts.items()
        ]
        rows.append(
            {
                "record": "summary",
                "trials": self.trials,
                "f0_id": self.f0_id,
                "eta_hat": self.eta_hat,
                "confidence_radius": self.confidence_radius,
                "wilson_lower": self.wilson_lower,
                "regime": self.regime,
            }
        )
        return rows


def empirical_stability(
    learner: SampleLearner,
    distribution: RealizableDistribution,
    trials: int,
    rng: RandomSource,
    threads: int = 1,
    regime: str | None = None,
) -> StabilityReport:
    """Frequency of each output of ``learner`` over independent samples; trial i uses stream i of rng."""
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")

    def trial(i: int) -> int:
        trial_rng = rng.derive(i)
        sample = draw_sample(distribution, learner.sample_size, trial_rng.derive(DATA_STREAM))
        return learner(sample, trial_rng.derive(COIN_STREAM)).canonical_id

    logger.info("empirical_stability: %d trials on %d thread(s)", trials, threads)
    counts = Counter(map_trials(trial, trials, threads))
    report = StabilityReport.from_counts(dict(counts), distribution.domain_size, regime)
    logger.info("empirical_stability: eta_hat=%.4f (f0=%d)", report.eta_hat, report.f0_id)
    return report
