"""
Seeded randomness for every stochastic step of the pipeline.

A RandomSource is keyed by (seed, stream path). numpy's Philox generator is
counter based, so every derived stream is reproducible on its own and trials
can run in any order or on any number of threads.

Randomized algorithms only talk to the CoinSource protocol (randbelow / coin /
derive). That lets the exact oracle swap in ScriptedCoins and walk every coin
path of an algorithm instead of sampling one.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Callable, Iterator, Protocol, TypeVar

import numpy as np

from app.core.errors import PreconditionError, ResourceGuardError

logger = logging.getLogger(__name__)

UINT64_MAX = 2**64 - 1

# dedicated stream ids
DATA_STREAM = 0
COIN_STREAM = 1
LEVEL_STREAM = 2

T = TypeVar("T")


class CoinSource(Protocol):
    def randbelow(self, n: int) -> int: ...

    def coin(self) -> int: ...

    def derive(self, stream_id: int) -> "CoinSource": ...


class RandomSource:
    def __init__(self, seed: int, stream_id: int = 0, path: tuple[int, ...] = ()):
        if not 0 <= seed <= UINT64_MAX:
            raise PreconditionError(f"seed must be an unsigned 64-bit integer, got {seed}")
        if stream_id < 0:
            raise PreconditionError(f"stream_id must be >= 0, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        self.path = path
        sequence = np.random.SeedSequence(entropy=seed, spawn_key=(*path, stream_id))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={(*self.path, self.stream_id)})"

    def derive(self, stream_id: int) -> "RandomSource":
        return RandomSource(self.seed, stream_id, (*self.path, self.stream_id))

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise PreconditionError(f"randbelow needs n >= 1, got {n}")
        return int(self.generator.integers(n))

    def coin(self) -> int:
        return self.randbelow(2)


class ScriptedCoins:
    """Replays a fixed list of choices and records the arity of every request past the script."""

    def __init__(self, script: list[int]):
        self.script = list(script)
        self.arities: list[int] = []
        self._position = 0

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise PreconditionError(f"randbelow needs n >= 1, got {n}")
        if n == 1:
            return 0
        if self._position < len(self.script):
            value = self.script[self._position]
        else:
            value = 0
            self.script.append(value)
        self.arities.append(n)
        self._position += 1
        return value

    def coin(self) -> int:
        return self.randbelow(2)

    def derive(self, stream_id: int) -> "ScriptedCoins":
        # one shared tape; the call order of a deterministic procedure fixes the layout
        return self

    def probability(self) -> Fraction:
        p = Fraction(1)
        for arity in self.arities:
            p /= arity
        return p


def enumerate_coin_paths(
    run: Callable[[ScriptedCoins], T],
    max_paths: int = 10**6,
) -> Iterator[tuple[T, Fraction]]:
    """Yield (result, probability) for every coin path of ``run``; probabilities sum to 1."""
    stack: list[list[int]] = [[]]
    explored = 0
    while stack:
        script = stack.pop()
        coins = ScriptedCoins(script)
        result = run(coins)
        explored += 1
        if explored > max_paths:
            raise ResourceGuardError("coin paths", max_paths, explored)
        for position in range(len(script), len(coins.script)):
            for value in range(1, coins.arities[position]):
                stack.append(coins.script[:position] + [value])
        yield result, coins.probability()
