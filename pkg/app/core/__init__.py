from .errors import (
    ConfigError,
    ConstructionError,
    DomainMismatchError,
    EmptySampleError,
    InvariantViolation,
    NonRealizableError,
    PipelineError,
    PreconditionError,
    ResourceGuardError,
)
from .loss import empirical_error, true_error
from .models import (
    DomainPoint,
    Hypothesis,
    HypothesisClass,
    LabeledExample,
    RealizableDistribution,
    Sample,
    make_class,
    restrict,
    threshold_class,
    uniform_distribution,
)
from .random_source import COIN_STREAM, DATA_STREAM, LEVEL_STREAM, CoinSource, RandomSource
from .sampling import draw_sample, draw_samples
from .protocols import SampleLearner
