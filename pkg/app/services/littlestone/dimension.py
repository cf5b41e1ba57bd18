"""
Littlestone dimension: the memoized recursion and an exhaustive mistake-tree oracle.

The recursion works on version spaces given as frozensets of row bitmasks;
``functools.lru_cache`` is the memo table (thread-safe reads, serialized inserts).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from app.core.errors import PreconditionError, ResourceGuardError
from app.core.models import HypothesisClass, LabeledExample, Sample

logger = logging.getLogger(__name__)

BRUTEFORCE_MAX_NODES = 2_000_000


def split(masks: frozenset[int], domain_size: int, x: int) -> tuple[frozenset[int], frozenset[int]]:
    """(rows labeling x with 0, rows labeling x with 1)."""
    bit = 1 << (domain_size - 1 - x)
    ones = frozenset(h for h in masks if h & bit)
    return masks - ones, ones


@lru_cache(maxsize=None)
def ldim_of_masks(masks: frozenset[int], domain_size: int) -> int:
    if len(masks) <= 1:
        return 0
    ceiling = len(masks).bit_length() - 1  # ldim <= floor(log2 |V|)
    best = 0
    for x in range(domain_size):
        zeros, ones = split(masks, domain_size, x)
        if not zeros or not ones:
            continue
        best = max(best, 1 + min(ldim_of_masks(zeros, domain_size), ldim_of_masks(ones, domain_size)))
        if best == ceiling:
            break
    return best


def ldim(hypothesis_class: HypothesisClass) -> int:
    if hypothesis_class.is_empty:
        raise PreconditionError("Littlestone dimension of an empty class is undefined")
    return ldim_of_masks(hypothesis_class.masks, hypothesis_class.domain_size)


@dataclass(frozen=True)
class MistakeTree:
    """Complete binary tree in heap layout: node i has children 2i+1 (label 0) and 2i+2 (label 1)."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        size = len(self.nodes) + 1
        if len(self.nodes) < 1 or size & (size - 1):
            raise PreconditionError(f"a complete tree has 2^t - 1 nodes, got {len(self.nodes)}")

    @property
    def depth(self) -> int:
        return (len(self.nodes) + 1).bit_length() - 1

    def paths(self) -> Iterator[Sample]:
        for leaf in range(2**self.depth):
            node, examples = 0, []
            for level in range(self.depth):
                y = (leaf >> (self.depth - 1 - level)) & 1
                examples.append(LabeledExample(self.nodes[node], y))
                node = 2 * node + 1 + y
            yield Sample(tuple(examples))

    def is_shattered_by(self, hypothesis_class: HypothesisClass) -> bool:
        return all(_realizable(hypothesis_class, path.examples) for path in self.paths())


def _realizable(hypothesis_class: HypothesisClass, path: tuple[LabeledExample, ...]) -> bool:
    return any(all(h(e.x) == e.y for e in path) for h in hypothesis_class)


class _NodeBudget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise ResourceGuardError("mistake-tree search", self.limit, self.used)


def _search(
    hypothesis_class: HypothesisClass,
    prefix: tuple[LabeledExample, ...],
    depth: int,
    budget: _NodeBudget,
) -> tuple | None:
    budget.spend()
    if not _realizable(hypothesis_class, prefix):
        return None
    if depth == 0:
        return ()
    used = {e.x for e in prefix}
    for x in range(hypothesis_class.domain_size):
        # a point repeated on a path leaves one branch unrealizable
        if x in used:
            continue
        left = _search(hypothesis_class, prefix + (LabeledExample(x, 0),), depth - 1, budget)
        if left is None:
            continue
        right = _search(hypothesis_class, prefix + (LabeledExample(x, 1),), depth - 1, budget)
        if right is not None:
            return (x, left, right)
    return None


def _to_heap(subtree: tuple, depth: int) -> tuple[int, ...]:
    nodes = [0] * (2**depth - 1)
    frontier = [(0, subtree)]
    while frontier:
        index, node = frontier.pop()
        if not node:
            continue
        x, left, right = node
        nodes[index] = x
        frontier.append((2 * index + 1, left))
        frontier.append((2 * index + 2, right))
    return tuple(nodes)


def shattered_tree(
    hypothesis_class: HypothesisClass,
    depth: int,
    max_nodes: int = BRUTEFORCE_MAX_NODES,
) -> MistakeTree | None:
    """A complete depth-``depth`` mistake tree shattered by the class, or None."""
    if depth < 1:
        raise PreconditionError(f"tree depth must be >= 1, got {depth}")
    found = _search(hypothesis_class, (), depth, _NodeBudget(max_nodes))
    if found is None:
        return None
    return MistakeTree(_to_heap(found, depth))


def ldim_bruteforce(
    hypothesis_class: HypothesisClass,
    depth: int,
    max_nodes: int = BRUTEFORCE_MAX_NODES,
) -> bool:
    """Exhaustive oracle: is some complete depth-``depth`` tree shattered?"""
    return shattered_tree(hypothesis_class, depth, max_nodes) is not None


def ldim_by_search(hypothesis_class: HypothesisClass, max_nodes: int = BRUTEFORCE_MAX_NODES) -> int:
    """Largest depth accepted by the exhaustive oracle."""
    depth = 0
    while depth < hypothesis_class.domain_size and ldim_bruteforce(hypothesis_class, depth + 1, max_nodes):
        depth += 1
    return depth
