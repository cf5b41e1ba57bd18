"""
Exact output distribution and mutual information of a randomized algorithm.

Every data sequence over the support of D (weighted by D^{nk}) is crossed with
every coin path of the algorithm (weighted by its probability), so both the
marginal of the output and its conditional given S^k come out exactly. With a
rational pmf all weights stay Fractions.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal, Mapping, Protocol, Sequence

from app.core.errors import InvariantViolation, PreconditionError, ResourceGuardError
from app.core.models import Hypothesis, RealizableDistribution, Sample, Weight
from app.core.protocols import SampleLearner
from app.core.random_source import CoinSource, enumerate_coin_paths
from app.services.boost.booster import FAILURE, BoostOutcome
from app.services.info.entropy import MIEstimate, entropy_bits

logger = logging.getLogger(__name__)

MAX_ATOMS = 10**7
SUM_TOLERANCE = 1e-9

OutcomeKey = int | str


class OutputAlgorithm(Protocol):
    """A randomized map from k samples to an output (a hypothesis or a boost outcome)."""

    def __call__(self, samples: Sequence[Sample], coins: CoinSource) -> Hypothesis | BoostOutcome: ...


class SingleRun:
    """Adapts a sample learner to an OutputAlgorithm over k = 1 sample."""

    def __init__(self, learner: SampleLearner):
        self.learner = learner

    def __call__(self, samples: Sequence[Sample], coins: CoinSource) -> Hypothesis:
        if len(samples) != 1:
            raise PreconditionError(f"a single run reads one sample, got {len(samples)}")
        return self.learner(samples[0], coins)


def outcome_key(output: Hypothesis | BoostOutcome) -> OutcomeKey:
    """Canonical id of the output function, or ``"failure"``."""
    if isinstance(output, BoostOutcome):
        return output.key
    return output.canonical_id


@dataclass(frozen=True)
class OutputDistribution:
    support: dict[OutcomeKey, Weight]
    provenance: Literal["exact", "monte-carlo"]
    trials: int | None = None
    # sum over S^k of Pr(S^k) * H(output | S^k); exact enumeration only
    conditional_entropy: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.support:
            raise PreconditionError("output distribution has empty support")
        total = float(sum(self.support.values()))
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvariantViolation(f"output probabilities sum to {total!r}")

    @classmethod
    def from_counts(cls, counts: Mapping[OutcomeKey, int]) -> "OutputDistribution":
        trials = sum(counts.values())
        if trials < 1:
            raise PreconditionError("cannot build a distribution from zero trials")
        support = {key: counts[key] / trials for key in _ordered(counts)}
        return cls(support, "monte-carlo", trials)

    def probability(self, key: OutcomeKey) -> Weight:
        return self.support.get(key, 0)

    def entropy(self) -> float:
        return entropy_bits(self.support.values())

    @property
    def failure_probability(self) -> Weight:
        return self.probability(FAILURE)

    def to_json(self) -> dict[str, Any]:
        return {
            "provenance": self.provenance,
            "trials": self.trials,
            "support": {str(key): float(p) for key, p in self.support.items()},
        }


def _ordered(keys) -> list[OutcomeKey]:
    # function ids ascending, failure last
    return sorted(keys, key=lambda key: (isinstance(key, str), key if isinstance(key, int) else 0))


def _atom_count(distribution: RealizableDistribution, n: int, k: int) -> int:
    return len(distribution.support) ** (n * k)


def _enumerate(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    max_atoms: int,
) -> tuple[dict[OutcomeKey, Weight], float]:
    if n < 1 or k < 1:
        raise PreconditionError(f"n and k must be >= 1, got n={n}, k={k}")
    sequences = _atom_count(distribution, n, k)
    if sequences > max_atoms:
        raise ResourceGuardError("exact enumeration atoms", max_atoms, sequences)

    support = distribution.support
    pmf = distribution.pmf
    examples = {x: distribution.example(x) for x in support}
    zero: Weight = Fraction(0) if distribution.is_exact else 0.0
    marginal: dict[OutcomeKey, Weight] = defaultdict(lambda: zero)
    conditional_entropy = 0.0
    atoms = 0

    logger.info("exact enumeration: %d data sequences (|supp D|=%d, n=%d, k=%d)", sequences, len(support), n, k)
    for points in itertools.product(support, repeat=n * k):
        weight: Weight = Fraction(1) if distribution.is_exact else 1.0
        for x in points:
            weight *= pmf[x]
        samples = [
            Sample(tuple(examples[x] for x in points[i * n : (i + 1) * n]))
            for i in range(k)
        ]
        conditional: dict[OutcomeKey, Fraction] = defaultdict(Fraction)
        for output, p in enumerate_coin_paths(lambda coins: algorithm(samples, coins), max_paths=max_atoms):
            atoms += 1
            if atoms > max_atoms:
                raise ResourceGuardError("exact enumeration atoms", max_atoms, atoms)
            conditional[outcome_key(output)] += p
        for key, p in conditional.items():
            marginal[key] += weight * p
        conditional_entropy += float(weight) * entropy_bits(conditional.values())

    logger.info("exact enumeration: %d atoms, %d distinct outputs", atoms, len(marginal))
    return {key: marginal[key] for key in _ordered(marginal)}, conditional_entropy


def exact_output_distribution(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    max_atoms: int = MAX_ATOMS,
) -> OutputDistribution:
    marginal, conditional_entropy = _enumerate(algorithm, distribution, n, k, max_atoms)
    return OutputDistribution(marginal, "exact", conditional_entropy=conditional_entropy)


def exact_mutual_information(
    algorithm: OutputAlgorithm,
    distribution: RealizableDistribution,
    n: int,
    k: int,
    max_atoms: int = MAX_ATOMS,
) -> MIEstimate:
    """I(S^k; A(S^k)) = H(marginal) - E_S[H(output | S)]."""
    output = exact_output_distribution(algorithm, distribution, n, k, max_atoms)
    marginal_entropy = output.entropy()
    value = marginal_entropy - output.conditional_entropy
    if value < -SUM_TOLERANCE:
        raise InvariantViolation(f"negative mutual information {value!r}")
    return MIEstimate(
        value=max(value, 0.0),
        method="exact",
        support_size=len(output.support),
        marginal_entropy=marginal_entropy,
        conditional_entropy=output.conditional_entropy,
    )


def total_variation(p: OutputDistribution, q: OutputDistribution) -> float:
    keys = set(p.support) | set(q.support)
    return 0.5 * math.fsum(abs(float(p.probability(key)) - float(q.probability(key))) for key in keys)
