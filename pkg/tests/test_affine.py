import numpy as np
import pytest

from app.core.errors import (
    ConstructionError,
    DomainMismatchError,
    NonRealizableError,
    PreconditionError,
    ResourceGuardError,
)
from app.core.models import Sample
from app.core.random_source import RandomSource, ScriptedCoins
from app.core.sampling import draw_sample
from app.services.affine import (
    AffineClassParams,
    AffineDomain,
    AffineStableLearner,
    AffineSubspace,
    affine_distribution,
    affine_hull,
    enumerate_affine_class,
    enumerate_affine_subspaces,
    member,
    rref_mod,
    soa_affine,
    stable_affine_learn,
)
from app.services.boost import BoostedLearner
from app.services.info import estimate_entropy_mc, proposition_affine_bound
from app.services.littlestone import ldim
from app.services.stable import empirical_stability

PLANE_3 = AffineClassParams(q=3, l=2, d=1)


def _sample(domain: AffineDomain, pairs) -> Sample:
    return Sample.from_pairs([(domain.index(v), y) for v, y in pairs])


def test_params_validation():
    with pytest.raises(ConstructionError):
        AffineClassParams(q=4, l=2, d=1)
    with pytest.raises(ConstructionError):
        AffineClassParams(q=2, l=2, d=2)
    assert AffineClassParams(q=5, l=2, d=0).domain_size == 25


def test_domain_indexing_is_lexicographic():
    domain = AffineDomain.of(PLANE_3)
    assert domain.size == 9
    assert domain.index((1, 1)) == 4
    assert domain.vector(5) == (1, 2)
    with pytest.raises(DomainMismatchError):
        domain.index((1, 1, 1))


def test_rref_mod_three():
    rows, pivots = rref_mod(np.array([[2, 1], [1, 2]]), 3)
    assert pivots == [0]
    assert rows.tolist() == [[1, 2]]


def test_hull_of_two_points_is_a_line():
    hull = affine_hull([(0, 0, 1), (0, 1, 0)], q=2)
    assert hull.dim == 1
    assert sorted(hull.members()) == [(0, 0, 1), (0, 1, 0)]
    assert hull == affine_hull([(0, 1, 0), (0, 0, 1)], q=2)


def test_hull_of_three_points_is_a_plane():
    hull = affine_hull([(0, 0, 0), (0, 0, 1), (0, 1, 0)], q=2)
    assert hull.dim == 2
    assert member(hull, (0, 1, 1)) == 1
    assert member(hull, (1, 0, 0)) == 0
    assert len(hull.members()) == 4


def test_canonical_basepoint_is_lexicographically_smallest():
    assert affine_hull([(0, 1, 1), (0, 1, 0)], q=2).basepoint == (0, 1, 0)
    line = affine_hull([(1, 2), (2, 1)], q=3)
    assert line.basepoint == (0, 0)
    assert sorted(line.members()) == [(0, 0), (1, 2), (2, 1)]


def test_single_point_and_empty_subspaces():
    point = affine_hull([(2, 1)], q=3)
    assert point.dim == 0
    assert point.members() == [(2, 1)]
    empty = AffineSubspace.empty(3, 2)
    assert empty.is_empty
    assert empty.dim == -1
    assert member(empty, (0, 0)) == 0
    assert empty.join((2, 1)) == point


def test_hull_rejects_bad_input():
    with pytest.raises(PreconditionError):
        affine_hull([], q=2)
    with pytest.raises(DomainMismatchError):
        affine_hull([(0, 1), (0, 1, 1)], q=2)
    with pytest.raises(DomainMismatchError):
        member(affine_hull([(0, 1)], q=2), (0, 1, 1))


def test_subspace_serialization():
    line = affine_hull([(1, 2), (2, 1)], q=3)
    assert AffineSubspace.from_dict(line.to_dict()) == line
    empty = AffineSubspace.empty(3, 2)
    assert AffineSubspace.from_dict(empty.to_dict()) == empty
    with pytest.raises(ConstructionError):
        AffineSubspace.from_dict({"q": 3})


def test_indicator_matches_membership():
    domain = AffineDomain.of(PLANE_3)
    line = affine_hull([(0, 0), (1, 1)], q=3)
    h = line.indicator(domain)
    assert [i for i in range(domain.size) if h(i)] == [0, 4, 8]


def test_soa_affine_on_a_line():
    domain = AffineDomain.of(PLANE_3)
    sequence = _sample(domain, [((0, 0), 1), ((1, 1), 1), ((2, 2), 1), ((0, 1), 0)])
    result = soa_affine(PLANE_3, sequence)
    assert result.mistakes == 2
    assert result.subspace.dim == 1
    assert [i for i in range(domain.size) if result.hypothesis(i)] == [0, 4, 8]


def test_soa_affine_on_negatives_only():
    domain = AffineDomain.of(PLANE_3)
    result = soa_affine(PLANE_3, _sample(domain, [((0, 1), 0), ((2, 2), 0)]))
    assert result.mistakes == 0
    assert result.subspace.is_empty
    assert result.hypothesis.canonical_id == 0


def test_soa_affine_rejects_nonrealizable_sequences():
    domain = AffineDomain.of(PLANE_3)
    with pytest.raises(NonRealizableError) as info:
        soa_affine(PLANE_3, _sample(domain, [((0, 0), 1), ((1, 1), 1), ((0, 1), 1)]))
    assert info.value.prefix_length == 3
    with pytest.raises(NonRealizableError) as info:
        soa_affine(PLANE_3, _sample(domain, [((0, 0), 1), ((0, 0), 0)]))
    assert info.value.prefix_length == 2


def test_soa_affine_outputs_the_hull_of_positives():
    domain = AffineDomain.of(PLANE_3)
    generator = np.random.default_rng(10)
    for _ in range(1000):
        base = generator.integers(0, 3, size=2)
        if generator.integers(0, 2):
            direction = generator.integers(0, 3, size=2)
            target = AffineSubspace.canonical(3, base, [direction] if direction.any() else [])
        else:
            target = AffineSubspace.canonical(3, base)
        points = generator.integers(0, domain.size, size=int(generator.integers(1, 8)))
        pairs = [(domain.vector(int(x)), target.member(domain.vector(int(x)))) for x in points]
        result = soa_affine(PLANE_3, _sample(domain, pairs))
        positives = [v for v, y in pairs if y]
        expected = affine_hull(positives, q=3) if positives else AffineSubspace.empty(3, 2)
        assert result.subspace == expected
        assert result.mistakes <= 2


def test_enumerated_class_sizes():
    assert len(enumerate_affine_class(AffineClassParams(q=2, l=2, d=0))) == 5
    # 4 points and 6 lines of F_2^2, plus the empty subspace
    assert len(enumerate_affine_class(AffineClassParams(q=2, l=2, d=1))) == 11
    subspaces = enumerate_affine_subspaces(PLANE_3)
    # 9 points and 12 lines of F_3^2
    assert len(subspaces) == 21
    assert all(s.dim <= 1 for s in subspaces)


def test_affine_ldim_over_f2_cubed():
    assert ldim(enumerate_affine_class(AffineClassParams(q=2, l=3, d=1))) == 2


def test_enumeration_guard():
    with pytest.raises(ResourceGuardError):
        enumerate_affine_class(AffineClassParams(q=2, l=7, d=1))


def test_affine_distribution():
    line = affine_hull([(0, 0), (1, 1)], q=3)
    dist = affine_distribution(PLANE_3, line)
    assert dist.domain_size == 9
    assert dist.target.canonical_id == line.indicator(AffineDomain.of(PLANE_3)).canonical_id
    with pytest.raises(PreconditionError):
        affine_distribution(PLANE_3, affine_hull([(0, 0), (1, 0), (0, 1)], q=3))


def test_stable_affine_learner_sizes_and_levels():
    learner = AffineStableLearner(PLANE_3, leaf_size=2, prefix_size=3)
    assert learner.max_level == 2
    assert learner.sample_size == 3 + 4 * 2
    with pytest.raises(PreconditionError):
        AffineStableLearner(PLANE_3, leaf_size=0, prefix_size=3)


def test_stable_affine_learner_respects_target_and_prefix():
    line = affine_hull([(0, 0), (1, 1)], q=3)
    dist = affine_distribution(PLANE_3, line)
    learner = AffineStableLearner(PLANE_3, leaf_size=2, prefix_size=3, target=dist.target)
    for seed in range(40):
        rng = RandomSource(seed)
        sample = draw_sample(dist, learner.sample_size, rng.derive(0))
        run = learner.run(sample, rng.derive(1))
        assert 0 <= run.level <= 2
        assert all(run.hypothesis(e.x) == e.y for e in run.prefix)
        # every positive the learner claims lies on the target line
        assert all(dist.target(x) for x in range(9) if run.hypothesis(x))


def test_stable_affine_learner_with_scripted_level():
    line = affine_hull([(0, 0), (1, 1)], q=3)
    dist = affine_distribution(PLANE_3, line)
    domain = AffineDomain.of(PLANE_3)
    learner = AffineStableLearner(PLANE_3, leaf_size=1, prefix_size=0, target=dist.target)
    leaves = _sample(domain, [((0, 0), 1), ((1, 1), 1), ((0, 1), 0), ((2, 0), 0)])
    run = learner.run(leaves, ScriptedCoins([1]))
    assert run.level == 1
    # leaves {00} and {11} disagree at 00; the merged sequence spans the line
    assert run.subspace == line


def test_point_mass_gives_a_fully_stable_output():
    point = affine_hull([(1, 2)], q=3)
    domain = AffineDomain.of(PLANE_3)
    pmf = [0.0] * 9
    pmf[domain.index((1, 2))] = 1.0
    dist = affine_distribution(PLANE_3, point, pmf)
    learner = AffineStableLearner(PLANE_3, leaf_size=2, prefix_size=2, target=dist.target)
    report = empirical_stability(learner, dist, 100, RandomSource(2))
    assert report.eta_hat == 1.0
    assert report.f0.canonical_id == point.indicator(domain).canonical_id


def test_stable_affine_learn_is_reproducible():
    dist = affine_distribution(PLANE_3, affine_hull([(0, 0), (1, 1)], q=3))
    first = stable_affine_learn(PLANE_3, dist, 2, RandomSource(4))
    assert first == stable_affine_learn(PLANE_3, dist, 2, RandomSource(4))


@pytest.mark.slow
def test_affine_learner_stability_and_entropy():
    dist = affine_distribution(PLANE_3, affine_hull([(0, 0), (1, 1)], q=3))
    learner = AffineStableLearner(PLANE_3, leaf_size=3, prefix_size=3, target=dist.target)
    report = empirical_stability(learner, dist, 2000, RandomSource(21), threads=4)
    sigma = (report.eta_hat * (1 - report.eta_hat) / report.trials) ** 0.5
    assert report.eta_hat >= 1 / (PLANE_3.d + 2) - 3 * sigma
    estimate = estimate_entropy_mc(
        BoostedLearner(learner, eta=0.25, k=16), dist, learner.sample_size, 16, 2000, RandomSource(22), threads=4
    )
    assert estimate.upper <= proposition_affine_bound(PLANE_3.d)
