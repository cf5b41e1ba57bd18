"""
Parameters of the globally stable learner.

The faithful values (n, n1, eta) are evaluated exactly with big integers and
fractions; the operative sizes (leaf_size, prefix_size) are what the learner
actually consumes and are either derived from n or overridden at desk scale.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction

from app.core.errors import PreconditionError
from app.core.numbers import as_fraction
from app.services.boost.booster import k_choice

logger = logging.getLogger(__name__)

DESK_SCALE_LIMIT = 10**6

FAITHFUL = "faithful"
DESK_SCALE = "desk-scale"


@dataclass(frozen=True)
class StabilityParams:
    d: int
    epsilon: Fraction
    n: int
    n1: int
    eta: Fraction
    leaf_size: int
    prefix_size: int
    regime: str = FAITHFUL

    @property
    def executable(self) -> bool:
        return self.n <= DESK_SCALE_LIMIT

    @property
    def log2_n(self) -> float:
        return math.log2(self.n)

    @property
    def sample_size(self) -> int:
        """Examples G reads: the consistency prefix plus 2^d tournament leaves."""
        return self.prefix_size + 2**self.d * self.leaf_size

    def with_desk_scale(self, leaf_size: int, n1: int) -> "StabilityParams":
        if leaf_size < 1 or n1 < 1:
            raise PreconditionError(f"desk-scale sizes must be >= 1, got leaf_size={leaf_size}, n1={n1}")
        return replace(self, leaf_size=leaf_size, prefix_size=n1, regime=DESK_SCALE)


def consistency_prefix_size(d: int, epsilon: int | float | Fraction) -> int:
    return math.ceil(Fraction(2 ** (d + 2)) / as_fraction(epsilon))


def lemma1_params(d: int, epsilon: int | float | Fraction) -> StabilityParams:
    if d < 0:
        raise PreconditionError(f"Littlestone dimension must be >= 0, got {d}")
    eps = as_fraction(epsilon)
    if not 0 < eps < 1:
        raise PreconditionError(f"epsilon must lie in (0, 1), got {epsilon}")
    n1 = consistency_prefix_size(d, eps)
    n = 2 ** (2 ** (d + 2) + 1) * 4 ** (d + 1) * n1
    eta = Fraction(1, 2 ** (2**d + 1) * (d + 1))
    leaf_size = max(1, (n - n1) // 2**d)
    params = StabilityParams(d=d, epsilon=eps, n=n, n1=n1, eta=eta, leaf_size=leaf_size, prefix_size=n1)
    if not params.executable:
        logger.info("lemma1_params: d=%d n=2^%.1f is not executable at desk scale", d, params.log2_n)
    return params


def pac_sample_complexity(d: int, epsilon: int | float | Fraction, delta: float) -> int:
    """m(2*epsilon, delta) = n*k with the faithful n and eta."""
    params = lemma1_params(d, epsilon)
    return params.n * k_choice(delta, params.eta)


def log2_pac_sample_complexity_closed_form(d: int, epsilon: int | float | Fraction, delta: float) -> float:
    """log2 of the closed form 2^{2^{d+3}} 4^{d+1} (d+1) ceil(2^{d+2}/eps) max(4 ln(1/delta), 10)."""
    n1 = consistency_prefix_size(d, epsilon)
    return 2 ** (d + 3) + 2 * (d + 1) + math.log2(d + 1) + math.log2(n1) + math.log2(max(4 * math.log(1 / delta), 10))
