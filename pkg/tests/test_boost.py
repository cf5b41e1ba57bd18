import math
from fractions import Fraction

import pytest

from app.core.errors import ConfigError, PreconditionError
from app.core.models import Hypothesis, Sample, threshold_class, uniform_distribution
from app.core.random_source import RandomSource, ScriptedCoins
from app.services.boost import (
    FAILURE,
    BoostConfig,
    BoostedLearner,
    boost_threshold,
    failure_rate,
    frequency_table,
    k_choice,
    run_boost,
    run_boost_trials,
)
from app.services.boost.booster import decide
from app.services.info import failure_and_lemma_bounds
from app.services.littlestone import SoaLearner
from app.services.stable import GloballyStableLearner, empirical_stability, lemma1_params


class FirstPointLearner:
    """Outputs the function whose canonical id is the first point of its sample."""

    sample_size = 1

    def __call__(self, sample: Sample, coins) -> Hypothesis:
        return Hypothesis.from_canonical_id(sample.examples[0].x, 4)


def _h(canonical_id: int) -> Hypothesis:
    return Hypothesis.from_canonical_id(canonical_id, 3)


@pytest.mark.parametrize(
    "delta, eta, expected",
    [(0.05, Fraction(1, 16), 192), (math.exp(-2.5), 1, 10), (0.5, 0.5, 20)],
)
def test_k_choice(delta, eta, expected):
    assert k_choice(delta, eta) == expected


def test_k_choice_does_not_round_down_values_just_above_an_integer():
    # 4 ln(1/delta) = 10 + 4e-10, far above float noise
    assert k_choice(math.exp(-(10 + 4e-10) / 4), 1) == 11


def test_k_choice_takes_ten_over_eta_exactly():
    assert k_choice(0.5, Fraction(1, 3)) == 30
    assert k_choice(0.5, Fraction(1, 7)) == 70
    assert k_choice(0.9, Fraction(3, 10)) == 34


def test_k_choice_rejects_out_of_range():
    with pytest.raises(PreconditionError):
        k_choice(0, 0.5)
    with pytest.raises(PreconditionError):
        k_choice(0.5, 0)
    with pytest.raises(PreconditionError):
        k_choice(0.5, 1.5)


def test_boost_threshold_is_exact():
    assert boost_threshold(Fraction(1, 16), 192) == 6
    assert boost_threshold(1, 5) == 3
    assert boost_threshold(0.1, 40) == 2


def test_boost_config_validation():
    assert BoostConfig(k=4, eta=1, n=1).threshold == 2
    with pytest.raises(ConfigError):
        BoostConfig(k=3, eta=1, n=1)
    with pytest.raises(ConfigError):
        BoostConfig(k=0, eta=1, n=1)
    with pytest.raises(ConfigError):
        BoostConfig(k=10, eta=0, n=1)
    with pytest.raises(ConfigError):
        BoostConfig(k=10, eta=1, n=0)


def test_frequency_table():
    table = frequency_table([_h(3), _h(1), _h(3)])
    assert table.counts == {1: 1, 3: 2}
    assert table.max_count == 2
    assert table.plurality_id == 3
    with pytest.raises(PreconditionError):
        frequency_table([])


def test_plurality_ties_go_to_the_smallest_id():
    outcome = decide([_h(3), _h(1), _h(3), _h(1)], threshold=2)
    assert outcome.hypothesis.canonical_id == 1


def test_all_distinct_outputs_fail():
    samples = [Sample.from_pairs([(x, 0)]) for x in range(4)]
    outcome = BoostedLearner(FirstPointLearner(), eta=1, k=4)(samples, ScriptedCoins([]))
    assert outcome.is_failure
    assert outcome.key == FAILURE
    assert outcome.to_json() == {
        "outcome": "failure",
        "g_maj_id": None,
        "counts": {"0": 1, "1": 1, "2": 1, "3": 1},
        "threshold": 2,
    }


def test_deterministic_learner_always_returns_its_function(two_rows):
    learner = SoaLearner(two_rows, 1)
    samples = [Sample.from_pairs([(x, 1)]) for x in (0, 1, 0, 1)]
    outcome = BoostedLearner(learner, eta=1, k=4)(samples, ScriptedCoins([]))
    assert outcome.outcome == "function"
    assert outcome.hypothesis.bitstring == "11"
    assert outcome.table.counts == {3: 4}


def test_boosted_learner_checks_sample_count(two_rows):
    with pytest.raises(PreconditionError):
        BoostedLearner(SoaLearner(two_rows, 1), eta=1, k=4)([Sample.from_pairs([(0, 1)])], ScriptedCoins([]))


def test_run_boost_rejects_short_samples(thresholds3, exact_uniform):
    learner = GloballyStableLearner(thresholds3, lemma1_params(2, 0.5).with_desk_scale(2, 3))
    with pytest.raises(ConfigError):
        run_boost(learner, exact_uniform, BoostConfig(k=8, eta=0.5, n=learner.sample_size - 1), RandomSource(0))


def test_run_boost_is_reproducible(thresholds3, exact_uniform):
    learner = GloballyStableLearner(thresholds3, lemma1_params(2, 0.5).with_desk_scale(2, 3))
    cfg = BoostConfig(k=8, eta=0.5, n=learner.sample_size)
    first = run_boost(learner, exact_uniform, cfg, RandomSource(5))
    again = run_boost(learner, exact_uniform, cfg, RandomSource(5))
    assert first.to_json() == again.to_json()
    assert sum(first.table.counts.values()) == 8


def test_run_boost_trials_do_not_depend_on_thread_count(thresholds3, exact_uniform):
    learner = GloballyStableLearner(thresholds3, lemma1_params(2, 0.5).with_desk_scale(2, 3))
    cfg = BoostConfig(k=8, eta=0.5, n=learner.sample_size)
    serial = run_boost_trials(learner, exact_uniform, cfg, 30, RandomSource(2), threads=1)
    threaded = run_boost_trials(learner, exact_uniform, cfg, 30, RandomSource(2), threads=4)
    assert [o.to_json() for o in serial] == [o.to_json() for o in threaded]


def test_failure_rate():
    success = decide([Hypothesis((1, 1))] * 2, threshold=2)
    failure = decide([Hypothesis((1, 1)), Hypothesis((0, 0))], threshold=2)
    p, sigma = failure_rate([success, failure, failure, success])
    assert p == 0.5
    assert sigma == pytest.approx(0.25)
    with pytest.raises(PreconditionError):
        failure_rate([])


@pytest.mark.slow
def test_failure_rate_stays_under_the_bound_at_measured_stability_for_d1():
    cls = threshold_class(2)
    dist = uniform_distribution(cls, 1)
    params = lemma1_params(1, 0.5).with_desk_scale(leaf_size=2, n1=2)
    learner = GloballyStableLearner(cls, params)
    eta_hat = empirical_stability(learner, dist, 1000, RandomSource(9), threads=4).eta_hat
    cfg = BoostConfig(k=192, eta=params.eta, n=learner.sample_size)
    outcomes = run_boost_trials(learner, dist, cfg, 1000, RandomSource(8), threads=4)
    p, sigma = failure_rate(outcomes)
    assert eta_hat >= params.eta
    assert p <= failure_and_lemma_bounds(192, eta_hat, params.prefix_size).failure_bound + 3 * sigma
