"""
Finite-horizon mistake game: the adversary picks a point and any label that
keeps the history realizable, the learner predicts first. worst_case_mistakes
returns the exact value of that game by exhaustive search.
"""
from __future__ import annotations

import logging
from typing import Protocol

from app.core.errors import PreconditionError, ResourceGuardError
from app.core.models import HypothesisClass, LabeledExample
from app.services.littlestone.soa import consistent_masks, predict_from_masks

logger = logging.getLogger(__name__)

MAX_HORIZON = 6
GAME_MAX_NODES = 5_000_000


class OnlineLearner(Protocol):
    def predict(self, hypothesis_class: HypothesisClass, history: tuple[LabeledExample, ...], x: int) -> int: ...


class SoaOnlineLearner:
    def predict(self, hypothesis_class: HypothesisClass, history: tuple[LabeledExample, ...], x: int) -> int:
        masks = hypothesis_class.masks
        for example in history:
            masks = consistent_masks(masks, hypothesis_class.domain_size, example)
        return predict_from_masks(masks, hypothesis_class.domain_size, x)


class ConstantLearner:
    def __init__(self, label: int):
        self.label = label

    def predict(self, hypothesis_class: HypothesisClass, history: tuple[LabeledExample, ...], x: int) -> int:
        return self.label


def worst_case_mistakes(
    learner: OnlineLearner,
    hypothesis_class: HypothesisClass,
    horizon: int,
    max_nodes: int = GAME_MAX_NODES,
) -> int:
    if not 0 <= horizon <= MAX_HORIZON:
        raise PreconditionError(f"horizon must be in [0, {MAX_HORIZON}], got {horizon}")
    if hypothesis_class.is_empty:
        raise PreconditionError("mistake game needs a nonempty class")
    m = hypothesis_class.domain_size
    explored = 0

    def value(masks: frozenset[int], history: tuple[LabeledExample, ...], remaining: int) -> int:
        nonlocal explored
        if remaining == 0:
            return 0
        best = 0
        for x in range(m):
            prediction = learner.predict(hypothesis_class, history, x)
            for y in (0, 1):
                example = LabeledExample(x, y)
                follow = consistent_masks(masks, m, example)
                if not follow:
                    continue
                explored += 1
                if explored > max_nodes:
                    raise ResourceGuardError("mistake game", max_nodes, explored)
                best = max(best, (prediction != y) + value(follow, history + (example,), remaining - 1))
                if best == remaining:
                    return best
        return best

    result = value(hypothesis_class.masks, (), horizon)
    logger.debug("worst_case_mistakes: horizon=%d value=%d nodes=%d", horizon, result, explored)
    return result
