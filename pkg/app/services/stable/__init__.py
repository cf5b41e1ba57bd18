from .learner import GloballyStableLearner, StableRun, globally_stable_learn
from .params import (
    DESK_SCALE,
    FAITHFUL,
    StabilityParams,
    lemma1_params,
    log2_pac_sample_complexity_closed_form,
    pac_sample_complexity,
)
from .stability import StabilityReport, empirical_stability, wilson_interval
from .tournament import AugmentedSequence, EntryKind, Resolution, TournamentResult, play_tournament, tournament
