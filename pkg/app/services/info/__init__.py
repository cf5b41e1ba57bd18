from .bounds import (
    ENTROPY_CONSTANT,
    H_FAILURE_CAP,
    BoundReport,
    FailureBounds,
    Theorem1Bound,
    bound_theorem1,
    bound_theorem2,
    build_bound_report,
    failure_and_lemma_bounds,
    lemma3_coverage_bound,
    proposition_affine_bound,
)
from .entropy import MIEstimate, entropy_bits, entropy_confidence_radius, miller_madow, plugin_entropy
from .exact import (
    OutputAlgorithm,
    OutputDistribution,
    SingleRun,
    exact_mutual_information,
    exact_output_distribution,
    outcome_key,
    total_variation,
)
from .montecarlo import entropy_estimate, outcome_sequence, estimate_entropy_mc, estimate_output_distribution_mc, sample_outcomes
from .partition import LossCheck, OutputPartition, lemma3_loss_check, partition_outputs
