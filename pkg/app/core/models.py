"""
Finite-domain substrate: hypotheses, classes, samples and realizable distributions.

Hypotheses are extensional bit-rows over the domain {0, ..., m-1}. A row's
canonical id is the integer spelled by its bits read left to right, which is
also its rank among all 2^m rows; classes keep these ids as bitmasks so
restriction and the Littlestone recursion work on plain ints.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Iterator, Sequence

from app.core.errors import ConstructionError, DomainMismatchError, PreconditionError

PMF_TOLERANCE = 1e-12

DomainPoint = int
Weight = float | Fraction


def _bit(domain_size: int, x: DomainPoint) -> int:
    return 1 << (domain_size - 1 - x)


@dataclass(frozen=True)
class Hypothesis:
    labels: tuple[int, ...]
    id: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.labels:
            raise ConstructionError("hypothesis needs at least one label")
        if any(b not in (0, 1) for b in self.labels):
            raise ConstructionError(f"labels must be bits, got {self.labels}")

    @classmethod
    def from_canonical_id(cls, canonical_id: int, domain_size: int, id: int | None = None) -> "Hypothesis":
        if not 0 <= canonical_id < 2**domain_size:
            raise ConstructionError(f"canonical id {canonical_id} out of range for domain size {domain_size}")
        labels = tuple((canonical_id >> (domain_size - 1 - i)) & 1 for i in range(domain_size))
        return cls(labels, id)

    @property
    def domain_size(self) -> int:
        return len(self.labels)

    @cached_property
    def canonical_id(self) -> int:
        value = 0
        for bit in self.labels:
            value = (value << 1) | bit
        return value

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in self.labels)

    def __call__(self, x: DomainPoint) -> int:
        return self.labels[x]

    def __repr__(self) -> str:
        return f"Hypothesis({self.bitstring}, id={self.id})"


@dataclass(frozen=True)
class HypothesisClass:
    domain_size: int
    rows: tuple[Hypothesis, ...]

    @classmethod
    def from_masks(cls, domain_size: int, masks: Iterable[int]) -> "HypothesisClass":
        ordered = sorted(set(masks))
        rows = tuple(Hypothesis.from_canonical_id(m, domain_size, id=i) for i, m in enumerate(ordered))
        return cls(domain_size, rows)

    @cached_property
    def masks(self) -> frozenset[int]:
        return frozenset(h.canonical_id for h in self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self.rows)

    def __contains__(self, h: object) -> bool:
        return isinstance(h, Hypothesis) and h.domain_size == self.domain_size and h.canonical_id in self.masks

    @property
    def is_empty(self) -> bool:
        return not self.rows

    def check_point(self, x: DomainPoint) -> None:
        if not 0 <= x < self.domain_size:
            raise PreconditionError(f"domain point {x} outside [0, {self.domain_size})")

    def by_id(self, id: int) -> Hypothesis:
        if not 0 <= id < len(self.rows):
            raise ConstructionError(f"hypothesis id {id} not in class of size {len(self.rows)}")
        return self.rows[id]

    def to_json(self) -> dict[str, Any]:
        return {"domain_size": self.domain_size, "rows": [h.bitstring for h in self.rows]}


@dataclass(frozen=True)
class LabeledExample:
    x: DomainPoint
    y: int

    def __post_init__(self):
        if self.y not in (0, 1):
            raise ConstructionError(f"label must be a bit, got {self.y}")
        if self.x < 0:
            raise ConstructionError(f"domain point must be >= 0, got {self.x}")


@dataclass(frozen=True)
class Sample:
    examples: tuple[LabeledExample, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Sample":
        return cls(tuple(LabeledExample(x, y) for x, y in pairs))

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[LabeledExample]:
        return iter(self.examples)

    def __getitem__(self, item: slice) -> "Sample":
        return Sample(self.examples[item])

    def __add__(self, other: "Sample") -> "Sample":
        return Sample(self.examples + other.examples)


@dataclass(frozen=True)
class RealizableDistribution:
    pmf: tuple[Weight, ...]
    target: Hypothesis
    hypothesis_class: HypothesisClass | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.pmf) != self.target.domain_size:
            raise DomainMismatchError(
                f"pmf has {len(self.pmf)} weights but target is over {self.target.domain_size} points"
            )
        if any(w < 0 for w in self.pmf):
            raise ConstructionError("pmf weights must be nonnegative")
        total = sum(self.pmf)
        if self.is_exact:
            if total != 1:
                raise ConstructionError(f"rational pmf sums to {total}, not 1")
        elif abs(float(total) - 1.0) > PMF_TOLERANCE:
            raise ConstructionError(f"pmf sums to {float(total)!r}, not 1 within {PMF_TOLERANCE}")
        if self.hypothesis_class is not None and self.target not in self.hypothesis_class:
            raise ConstructionError("target hypothesis does not belong to the class")

    @property
    def domain_size(self) -> int:
        return len(self.pmf)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(w, (Fraction, int)) for w in self.pmf)

    @property
    def support(self) -> tuple[DomainPoint, ...]:
        return tuple(x for x, w in enumerate(self.pmf) if w > 0)

    def example(self, x: DomainPoint) -> LabeledExample:
        return LabeledExample(x, self.target(x))


def make_class(label_matrix: Sequence[Sequence[int] | str]) -> HypothesisClass:
    if not label_matrix:
        raise ConstructionError("label matrix is empty")
    rows = [tuple(int(b) for b in row) for row in label_matrix]
    width = len(rows[0])
    if width < 1:
        raise ConstructionError("rows must have at least one label")
    if any(len(row) != width for row in rows):
        raise ConstructionError("ragged label matrix: rows differ in length")
    hypotheses = [Hypothesis(row) for row in rows]
    return HypothesisClass.from_masks(width, (h.canonical_id for h in hypotheses))


def restrict(hypothesis_class: HypothesisClass, x: DomainPoint, y: int) -> HypothesisClass:
    """Version space {h in class : h(x) = y}; empty when nothing agrees."""
    hypothesis_class.check_point(x)
    bit = _bit(hypothesis_class.domain_size, x)
    want = bit if y else 0
    kept = (m for m in hypothesis_class.masks if m & bit == want)
    return HypothesisClass.from_masks(hypothesis_class.domain_size, kept)


def threshold_class(n: int) -> HypothesisClass:
    """Thresholds 1[x >= a] for a in {1..n+1} over the points {1..n} (index i is the value i+1)."""
    if n < 1:
        raise ConstructionError(f"threshold family needs n >= 1, got {n}")
    return make_class([[1 if i + 1 >= a else 0 for i in range(n)] for a in range(1, n + 2)])


def uniform_distribution(hypothesis_class: HypothesisClass, target_id: int, exact: bool = False) -> RealizableDistribution:
    m = hypothesis_class.domain_size
    weight: Weight = Fraction(1, m) if exact else 1.0 / m
    return RealizableDistribution(tuple([weight] * m), hypothesis_class.by_id(target_id), hypothesis_class)


def class_from_json(data: dict[str, Any]) -> HypothesisClass:
    try:
        rows = data["rows"]
        domain_size = int(data["domain_size"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConstructionError(f"malformed class file: {e!s}") from e
    hypothesis_class = make_class(rows)
    if hypothesis_class.domain_size != domain_size:
        raise ConstructionError(
            f"class file declares domain_size={domain_size} but rows have length {hypothesis_class.domain_size}"
        )
    return hypothesis_class


def distribution_from_json(data: dict[str, Any], hypothesis_class: HypothesisClass) -> RealizableDistribution:
    try:
        target_id = int(data["target_id"])
        pmf = tuple(float(w) for w in data["pmf"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConstructionError(f"malformed distribution file: {e!s}") from e
    return RealizableDistribution(pmf, hypothesis_class.by_id(target_id), hypothesis_class)
