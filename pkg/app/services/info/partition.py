from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from app.core.errors import PreconditionError
from app.core.loss import true_error
from app.core.models import Hypothesis, RealizableDistribution, Weight
from app.core.numbers import as_fraction
from app.services.boost.booster import FAILURE
from app.services.info.bounds import failure_and_lemma_bounds
from app.services.info.exact import OutcomeKey, OutputDistribution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OutputPartition:
    eta: Fraction
    failure: Weight
    # light outputs: probability <= eta/4
    f1: dict[int, Weight]
    f2: dict[int, Weight]
    # lambda -> ids with eta/2^{lambda+1} < P_f <= eta/2^lambda, lambda >= 2
    buckets: dict[int, list[int]]

    @property
    def heavy_count_ok(self) -> bool:
        """|F2| < 4/eta."""
        return len(self.f2) < 4 / self.eta

    def to_json(self) -> dict[str, Any]:
        return {
            "eta": float(self.eta),
            "failure": float(self.failure),
            "f1": sorted(self.f1),
            "f2": sorted(self.f2),
            "f2_size": len(self.f2),
            "f2_size_ok": self.heavy_count_ok,
            "buckets": {str(lam): ids for lam, ids in sorted(self.buckets.items())},
        }


def bucket_index(probability: Weight, eta: Fraction) -> int:
    """floor(log2(eta / p)), evaluated exactly."""
    ratio = eta / as_fraction(probability)
    return (ratio.numerator // ratio.denominator).bit_length() - 1


def partition_outputs(distribution: OutputDistribution, eta: int | float | Fraction) -> OutputPartition:
    exact_eta = as_fraction(eta)
    if not 0 < exact_eta <= 1:
        raise PreconditionError(f"eta must lie in (0, 1], got {eta}")
    threshold = exact_eta / 4
    failure: Weight = 0
    f1: dict[int, Weight] = {}
    f2: dict[int, Weight] = {}
    buckets: dict[int, list[int]] = {}
    for key, p in distribution.support.items():
        if key == FAILURE:
            failure = p
        elif p <= 0:
            continue
        elif as_fraction(p) <= threshold:
            f1[key] = p
            buckets.setdefault(bucket_index(p, exact_eta), []).append(key)
        else:
            f2[key] = p
    partition = OutputPartition(exact_eta, failure, f1, f2, buckets)
    if not partition.heavy_count_ok:
        logger.warning("partition_outputs: |F2|=%d violates |F2| < 4/eta", len(f2))
    return partition


@dataclass(frozen=True)
class LossCheck:
    id: int
    frequency: float
    true_error: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.true_error <= self.bound


def lemma3_loss_check(
    frequencies: Mapping[OutcomeKey, float],
    distribution: RealizableDistribution,
    eta: int | float | Fraction,
    n1: int,
) -> list[LossCheck]:
    """True error of every output seen more often than eta/4 against log2(4/eta)/n1."""
    bound = failure_and_lemma_bounds(1, eta, n1).lemma3_loss
    threshold = float(eta) / 4
    checks = []
    for key, frequency in frequencies.items():
        if key == FAILURE or frequency <= threshold:
            continue
        h = Hypothesis.from_canonical_id(key, distribution.domain_size)
        checks.append(LossCheck(key, float(frequency), float(true_error(h, distribution)), bound))
    return checks
