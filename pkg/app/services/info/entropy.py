"""Entropy in bits of discrete output distributions, plug-in and exact."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Literal, Mapping

import numpy as np
from pydantic import BaseModel

from app.core.errors import PreconditionError
from app.services.stable.stability import z_score


class MIEstimate(BaseModel):
    value: float
    method: Literal["exact", "plug-in"]
    trials: int | None = None
    support_size: int
    # Miller-Madow term, reported next to the raw plug-in value
    bias_correction: float = 0.0
    confidence_radius: float = 0.0
    marginal_entropy: float | None = None
    conditional_entropy: float | None = None
    note: str = ""

    @property
    def corrected(self) -> float:
        return self.value + self.bias_correction

    @property
    def upper(self) -> float:
        """Corrected estimate plus its confidence radius."""
        return self.corrected + self.confidence_radius


def entropy_bits(probabilities: Iterable[float | Fraction]) -> float:
    p = np.asarray([float(q) for q in probabilities], dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def plugin_entropy(counts: Mapping[object, int] | Iterable[int]) -> float:
    values = np.asarray(list(counts.values() if isinstance(counts, Mapping) else counts), dtype=np.float64)
    total = values.sum()
    if total < 1:
        raise PreconditionError("plug-in entropy needs a total count >= 1")
    return entropy_bits(values / total)


def miller_madow(support_size: int, trials: int) -> float:
    """(m-1)/(2T ln 2) bits for m observed outcomes over T trials."""
    if trials < 1:
        raise PreconditionError("Miller-Madow correction needs at least one trial")
    return (support_size - 1) / (2 * trials * math.log(2))


def entropy_confidence_radius(counts: Mapping[object, int], confidence: float = 0.99) -> float:
    """Delta-method radius of the plug-in entropy: z * sqrt(Var[-log2 p(X)] / T)."""
    values = np.asarray(list(counts.values()), dtype=np.float64)
    trials = values.sum()
    p = values[values > 0] / trials
    logs = np.log2(p)
    variance = float((p * logs**2).sum() - (p * logs).sum() ** 2)
    return z_score(confidence) * math.sqrt(max(variance, 0.0) / trials)


