"""
Affine subspaces of F_q^l with exact arithmetic mod a prime q.

A subspace is kept in canonical form: the direction basis in reduced row
echelon form and the basepoint reduced to zero on every pivot column, which is
its lexicographically smallest member. Two subspaces are equal iff their
canonical forms are.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from app.core.errors import ConstructionError, DomainMismatchError, PreconditionError
from app.core.models import Hypothesis

Vector = tuple[int, ...]


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % p for p in range(2, int(q**0.5) + 1))


@dataclass(frozen=True)
class AffineClassParams:
    q: int
    l: int
    d: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise ConstructionError(f"q must be prime, got {self.q}")
        if not 0 <= self.d < self.l:
            raise ConstructionError(f"need 0 <= d < l, got d={self.d}, l={self.l}")

    @property
    def domain_size(self) -> int:
        return self.q**self.l


@dataclass(frozen=True)
class AffineDomain:
    """F_q^l with points indexed in lexicographic order (index = base-q digits, most significant first)."""

    q: int
    l: int

    @classmethod
    def of(cls, params: AffineClassParams) -> "AffineDomain":
        return cls(params.q, params.l)

    @property
    def size(self) -> int:
        return self.q**self.l

    @cached_property
    def points(self) -> np.ndarray:
        return np.array(list(itertools.product(range(self.q), repeat=self.l)), dtype=np.int64).reshape(self.size, self.l)

    def vector(self, index: int) -> Vector:
        if not 0 <= index < self.size:
            raise PreconditionError(f"point index {index} outside [0, {self.size})")
        return tuple(int(c) for c in self.points[index])

    def index(self, vector: Sequence[int]) -> int:
        self.check(vector)
        value = 0
        for c in vector:
            value = value * self.q + int(c)
        return value

    def check(self, vector: Sequence[int]) -> None:
        if len(vector) != self.l:
            raise DomainMismatchError(f"vector has {len(vector)} coordinates, ambient dimension is {self.l}")
        if any(not 0 <= int(c) < self.q for c in vector):
            raise ConstructionError(f"coordinates of {tuple(vector)} must lie in [0, {self.q})")


def rref_mod(rows: np.ndarray, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_q; zero rows dropped. Returns (rows, pivot columns)."""
    A = np.mod(np.asarray(rows, dtype=np.int64), q)
    if A.ndim != 2 or A.shape[0] == 0:
        return A.reshape(0, A.shape[-1] if A.ndim == 2 else 0), []
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r >= m:
            break
        nonzero = np.where(A[r:, c] != 0)[0]
        if nonzero.size == 0:
            continue
        p = r + int(nonzero[0])
        if p != r:
            A[[r, p], :] = A[[p, r], :]
        A[r] = np.mod(A[r] * pow(int(A[r, c]), -1, q), q)
        # eliminate column c in all other rows
        others = np.where(A[:, c] != 0)[0]
        others = others[others != r]
        if others.size:
            A[others, :] = np.mod(A[others, :] - np.outer(A[others, c], A[r]), q)
        pivots.append(c)
        r += 1
    return A[:r], pivots


@dataclass(frozen=True)
class AffineSubspace:
    q: int
    l: int
    # None encodes the empty subspace (dim -1)
    basepoint: Vector | None
    basis: tuple[Vector, ...] = ()

    @classmethod
    def empty(cls, q: int, l: int) -> "AffineSubspace":
        return cls(q, l, None)

    @classmethod
    def canonical(cls, q: int, point: Sequence[int], directions: Iterable[Sequence[int]] = ()) -> "AffineSubspace":
        l = len(point)
        rows = [tuple(int(c) for c in v) for v in directions]
        if any(len(v) != l for v in rows):
            raise DomainMismatchError("direction vectors must match the basepoint's dimension")
        basis, pivots = rref_mod(np.array(rows, dtype=np.int64).reshape(len(rows), l), q)
        base = np.mod(np.asarray(point, dtype=np.int64), q)
        for row, c in zip(basis, pivots):
            base = np.mod(base - base[c] * row, q)
        return cls(q, l, tuple(int(c) for c in base), tuple(tuple(int(c) for c in row) for row in basis))

    @property
    def dim(self) -> int:
        return -1 if self.basepoint is None else len(self.basis)

    @property
    def is_empty(self) -> bool:
        return self.basepoint is None

    @cached_property
    def _reduction(self) -> tuple[np.ndarray, list[int]]:
        basis = np.array(self.basis, dtype=np.int64).reshape(len(self.basis), self.l)
        return basis, [int(np.flatnonzero(row)[0]) for row in basis]

    def member(self, x: Sequence[int]) -> int:
        """1 iff x - basepoint lies in the span of the basis."""
        if len(x) != self.l:
            raise DomainMismatchError(f"point has {len(x)} coordinates, subspace lives in dimension {self.l}")
        if self.basepoint is None:
            return 0
        v = np.mod(np.asarray(x, dtype=np.int64) - np.asarray(self.basepoint, dtype=np.int64), self.q)
        basis, pivots = self._reduction
        for row, c in zip(basis, pivots):
            v = np.mod(v - v[c] * row, self.q)
        return int(not v.any())

    def join(self, x: Sequence[int]) -> "AffineSubspace":
        """Smallest subspace containing this one and x."""
        if self.basepoint is None:
            return AffineSubspace.canonical(self.q, x)
        if self.member(x):
            return self
        direction = [(int(a) - b) % self.q for a, b in zip(x, self.basepoint)]
        return AffineSubspace.canonical(self.q, self.basepoint, [*self.basis, direction])

    def members(self) -> list[Vector]:
        if self.basepoint is None:
            return []
        base = np.asarray(self.basepoint, dtype=np.int64)
        basis = np.array(self.basis, dtype=np.int64).reshape(len(self.basis), self.l)
        coefficients = np.array(list(itertools.product(range(self.q), repeat=self.dim)), dtype=np.int64)
        points = np.mod(base + coefficients.reshape(self.q**self.dim, self.dim) @ basis, self.q)
        return sorted(tuple(int(c) for c in p) for p in points)

    def indicator(self, domain: AffineDomain) -> Hypothesis:
        if (domain.q, domain.l) != (self.q, self.l):
            raise DomainMismatchError(f"subspace over F_{self.q}^{self.l}, domain is F_{domain.q}^{domain.l}")
        return Hypothesis(tuple(self.member(p) for p in domain.points))

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": self.q,
            "l": self.l,
            "basepoint": None if self.basepoint is None else list(self.basepoint),
            "basis": [list(row) for row in self.basis],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AffineSubspace":
        try:
            q, l = int(data["q"]), int(data["l"])
            basepoint = data["basepoint"]
            basis = data.get("basis", [])
        except (KeyError, TypeError, ValueError) as e:
            raise ConstructionError(f"malformed subspace: {e!s}") from e
        if basepoint is None:
            return cls.empty(q, l)
        if len(basepoint) != l:
            raise DomainMismatchError(f"basepoint has {len(basepoint)} coordinates, expected {l}")
        return cls.canonical(q, basepoint, basis)


def affine_hull(points: Iterable[Sequence[int]], q: int) -> AffineSubspace:
    points = [tuple(int(c) for c in p) for p in points]
    if not points:
        raise PreconditionError("affine hull of an empty point set is undefined")
    first = points[0]
    if any(len(p) != len(first) for p in points):
        raise DomainMismatchError("points differ in dimension")
    directions = [[(a - b) % q for a, b in zip(p, first)] for p in points[1:]]
    return AffineSubspace.canonical(q, first, directions)


def member(subspace: AffineSubspace, x: Sequence[int]) -> int:
    return subspace.member(x)
