from __future__ import annotations

import logging

from app.core.errors import ResourceGuardError
from app.core.models import HypothesisClass
from app.services.affine.field import AffineClassParams, AffineDomain, AffineSubspace

logger = logging.getLogger(__name__)

MAX_AFFINE_DOMAIN = 64


def _check_guard(params: AffineClassParams) -> None:
    if params.domain_size > MAX_AFFINE_DOMAIN:
        raise ResourceGuardError("affine domain size", MAX_AFFINE_DOMAIN, params.domain_size)


def enumerate_affine_subspaces(params: AffineClassParams) -> list[AffineSubspace]:
    """Every nonempty affine subspace of dimension <= d, grown one dimension at a time by joining points."""
    _check_guard(params)
    domain = AffineDomain.of(params)
    points = [domain.vector(i) for i in range(domain.size)]
    layer = {AffineSubspace.canonical(params.q, p) for p in points}
    found = set(layer)
    for _ in range(params.d):
        layer = {sub.join(p) for sub in layer for p in points if not sub.member(p)}
        found |= layer
    ordered = sorted(found, key=lambda sub: (sub.dim, sub.basepoint, sub.basis))
    logger.debug("enumerate_affine_subspaces: q=%d l=%d d=%d -> %d subspaces", params.q, params.l, params.d, len(ordered))
    return ordered


def enumerate_affine_class(params: AffineClassParams) -> HypothesisClass:
    """Indicators of all subspaces of dimension <= d over F_q^l, plus the all-zero function."""
    domain = AffineDomain.of(params)
    masks = {sub.indicator(domain).canonical_id for sub in enumerate_affine_subspaces(params)}
    masks.add(0)
    return HypothesisClass.from_masks(domain.size, masks)
