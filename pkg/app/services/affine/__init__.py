from .enumeration import MAX_AFFINE_DOMAIN, enumerate_affine_class, enumerate_affine_subspaces
from .field import AffineClassParams, AffineDomain, AffineSubspace, affine_hull, is_prime, member, rref_mod
from .learner import (
    AffineRun,
    AffineSoaResult,
    AffineStableLearner,
    affine_distribution,
    first_disagreement,
    soa_affine,
    stable_affine_learn,
)
