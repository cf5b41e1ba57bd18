"""
Closed-form information and loss bounds.

All evaluators are pure. Exponentials that can leave float range are carried in
log2 space and only exponentiated at the end.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Any

from pydantic import BaseModel

from app.core.errors import PreconditionError
from app.core.numbers import as_fraction
from app.services.boost.booster import k_choice
from app.services.stable.params import lemma1_params, log2_pac_sample_complexity_closed_form

logger = logging.getLogger(__name__)

LN2 = math.log(2)
# max of -p log2 p over [0, 1], at p = 1/e
H_FAILURE_CAP = 1 / (math.e * LN2)
ENTROPY_CONSTANT = 3 / (math.e * LN2)


class Theorem1Bound(BaseModel):
    k: int
    eta: float
    r: float
    log2_series_term: float
    series_term: float
    h2_term: float
    h_failure_cap: float = H_FAILURE_CAP
    # 2/(e ln 2) of the constant belongs to the H1 relaxation
    h1_constant: float = 2 * H_FAILURE_CAP
    h1_series: float
    # sign of eta/2 + log2(1 - eta/2); the series term decreases in k only when positive
    slope_sign: float
    decreasing_in_k: bool
    total: float


class FailureBounds(BaseModel):
    k: int
    eta: float
    n1: int
    failure_bound: float
    lemma2_bound: float
    lemma3_loss: float
    h_failure_cap: float = H_FAILURE_CAP
    coverage_bound: float


class BoundReport(BaseModel):
    d: int
    epsilon: float
    delta: float
    k: int
    eta: float
    n: int
    n1: int
    log2_n: float
    log2_pac_sample_complexity: float
    theorem1: Theorem1Bound
    theorem2_rhs: float
    proposition_rhs: float
    failure: FailureBounds

    @property
    def theorem1_rhs(self) -> float:
        return self.theorem1.total

    def to_record(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "k": self.k,
            "eta": self.eta,
            "n": self.n,
            "n1": self.n1,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "log2_pac_sample_complexity": self.log2_pac_sample_complexity,
            "theorem1_rhs": self.theorem1.total,
            "theorem1_series_term": self.theorem1.series_term,
            "theorem1_h2_term": self.theorem1.h2_term,
            "theorem1_constant": ENTROPY_CONSTANT,
            "theorem1_decreasing_in_k": self.theorem1.decreasing_in_k,
            "theorem2_rhs": self.theorem2_rhs,
            "proposition_rhs": self.proposition_rhs,
            "failure_bound": self.failure.failure_bound,
            "lemma2_bound": self.failure.lemma2_bound,
            "lemma3_loss": self.failure.lemma3_loss,
            "coverage_bound": self.failure.coverage_bound,
            "h_failure_cap": H_FAILURE_CAP,
        }


def _check_eta(eta: Fraction) -> None:
    if not 0 < eta <= 1:
        raise PreconditionError(f"eta must lie in (0, 1], got {float(eta)}")


def _exp2(log2_value: float, name: str) -> float:
    if log2_value >= 1024:
        raise PreconditionError(f"{name} = 2^{log2_value:.1f} exceeds float range")
    return 2.0**log2_value


def bound_theorem1(k: int, eta: int | float | Fraction) -> Theorem1Bound:
    """2^{3 + log2 k - eta k/2 - k log2(1 - eta/2)} + log2(4/eta) + 3/(e ln 2), as printed."""
    exact_eta = as_fraction(eta)
    _check_eta(exact_eta)
    if k < 1 or exact_eta * k / 2 < 2:
        raise PreconditionError(f"bound needs eta*k/2 >= 2, got {float(exact_eta * k / 2):.4f}")
    e = float(exact_eta)
    half_k_eta = e * k / 2
    log2_decay = math.log2(1 - e / 2)

    log2_series = 3 + math.log2(k) - half_k_eta - k * log2_decay
    series = _exp2(log2_series, "theorem 1 series term")
    h2 = math.log2(4 / e)
    r = 2.0 ** (1 - half_k_eta)
    # 2/(e ln 2) + 2 k r (1 - eta/2)^{-k} / (1 - r^2), before the relaxation
    h1_series = 2 * H_FAILURE_CAP + _exp2(1 + math.log2(k) + math.log2(r) - k * log2_decay, "H1 series") / (1 - r * r)
    slope = e / 2 + log2_decay
    total = series + h2 + ENTROPY_CONSTANT
    logger.debug("bound_theorem1: k=%d eta=%.6g total=%.6g (slope %.3g)", k, e, total, slope)
    return Theorem1Bound(
        k=k,
        eta=e,
        r=r,
        log2_series_term=log2_series,
        series_term=series,
        h2_term=h2,
        h1_series=h1_series,
        slope_sign=math.copysign(1.0, slope),
        decreasing_in_k=slope > 0,
        total=total,
    )


def bound_theorem2(d: int) -> float:
    """2^d + log2(d+1) + 3 + 3/(e ln 2) bits."""
    if d < 0:
        raise PreconditionError(f"d must be >= 0, got {d}")
    return 2**d + math.log2(d + 1) + 3 + ENTROPY_CONSTANT


def proposition_affine_bound(d: int) -> float:
    """log2(d+1) + 2 + 3/(e ln 2) bits for affine subspaces of dimension at most d."""
    if d < 0:
        raise PreconditionError(f"d must be >= 0, got {d}")
    return math.log2(d + 1) + 2 + ENTROPY_CONSTANT


def lemma3_coverage_bound(k: int, eta: int | float | Fraction) -> float:
    """Lower bound 1 - e^{-k eta^2/2} - 2^{-eta k/2}/(1 - 2^{-eta k/2}) on outputting a low-loss function."""
    e = float(eta)
    tail = 2.0 ** (-e * k / 2)
    return 1 - math.exp(-k * e * e / 2) - tail / (1 - tail)


def failure_and_lemma_bounds(k: int, eta: int | float | Fraction, n1: int) -> FailureBounds:
    exact_eta = as_fraction(eta)
    _check_eta(exact_eta)
    if k < 1 or n1 < 1:
        raise PreconditionError(f"k and n1 must be >= 1, got k={k}, n1={n1}")
    e = float(exact_eta)
    return FailureBounds(
        k=k,
        eta=e,
        n1=n1,
        failure_bound=math.exp(-k * e * e / 2),
        lemma2_bound=math.log2(1 / e) / n1,
        lemma3_loss=math.log2(4 / e) / n1,
        coverage_bound=lemma3_coverage_bound(k, exact_eta),
    )


def build_bound_report(
    d: int,
    epsilon: int | float | Fraction,
    delta: float,
    k: int | None = None,
    eta: int | float | Fraction | None = None,
    n1: int | None = None,
) -> BoundReport:
    """Every bound at the faithful parameters of (d, epsilon, delta); k, eta and n1 may be overridden."""
    params = lemma1_params(d, epsilon)
    eta = params.eta if eta is None else eta
    k = k_choice(delta, eta) if k is None else k
    n1 = params.n1 if n1 is None else n1
    logger.info("build_bound_report: d=%d eps=%s delta=%s -> k=%d eta=%s n1=%d", d, epsilon, delta, k, eta, n1)
    return BoundReport(
        d=d,
        epsilon=float(params.epsilon),
        delta=delta,
        k=k,
        eta=float(eta),
        n=params.n,
        n1=n1,
        log2_n=params.log2_n,
        log2_pac_sample_complexity=log2_pac_sample_complexity_closed_form(d, epsilon, delta),
        theorem1=bound_theorem1(k, eta),
        theorem2_rhs=bound_theorem2(d),
        proposition_rhs=proposition_affine_bound(d),
        failure=failure_and_lemma_bounds(k, eta, n1),
    )
