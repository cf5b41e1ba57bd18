from .booster import (
    FAILURE,
    BoostConfig,
    BoostedLearner,
    BoostOutcome,
    FrequencyTable,
    boost_threshold,
    failure_rate,
    frequency_table,
    k_choice,
    run_boost,
    run_boost_trials,
)
