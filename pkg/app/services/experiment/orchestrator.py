"""
Runs the pipeline stages of one experiment config and builds report records.

Every stage draws from its own stream of the master seed, so a stage's output
does not depend on which other stages ran or on the thread count.
"""
import logging
import math
from collections import Counter
from contextlib import contextmanager
from fractions import Fraction
from typing import Any, Callable, Iterator

from app import __version__
from app.cli.config import AffineClassSource, ExperimentConfig, InlineClassSource, ThresholdClassSource
from app.core.errors import ConfigError, PipelineError, ResourceGuardError
from app.core.models import HypothesisClass, RealizableDistribution, Sample, make_class, threshold_class
from app.core.numbers import as_fraction
from app.core.random_source import RandomSource
from app.services.affine import (
    AffineClassParams,
    AffineDomain,
    AffineStableLearner,
    AffineSubspace,
    affine_distribution,
    enumerate_affine_class,
)
from app.services.boost import BoostConfig, BoostedLearner, failure_rate, k_choice, run_boost_trials
from app.services.info import (
    bound_theorem1,
    build_bound_report,
    entropy_estimate,
    exact_mutual_information,
    failure_and_lemma_bounds,
    lemma3_loss_check,
    outcome_sequence,
    proposition_affine_bound,
)
from app.services.info.exact import MAX_ATOMS
from app.services.littlestone import SoaOnlineLearner, ldim, soa_run, worst_case_mistakes
from app.services.stable import DESK_SCALE, GloballyStableLearner, StabilityParams, empirical_stability, lemma1_params

logger = logging.getLogger(__name__)

STAGES = ("ldim", "soa", "stability", "boost", "mi", "bounds", "affine")

# master-seed stream per stage
STAGE_STREAMS = {
    "stability": 10,
    "boost": 11,
    "mi": 12,
    "affine": 13,
    "affine-stability": 14,
    "boost-stability": 15,
    "mi-stability": 16,
}

# data sequences above which the exact oracle is not attempted
EXACT_MI_MAX_SEQUENCES = 256


@contextmanager
def config_errors(what: str) -> Iterator[None]:
    """Report construction and precondition failures while building from config as ConfigError."""
    try:
        yield
    except (ConfigError, ResourceGuardError):
        raise
    except PipelineError as e:
        raise ConfigError(f"{what}: {e}") from e


class ExperimentOrchestrator:
    def __init__(self, config: ExperimentConfig, seed: int, threads: int = 1):
        self.config = config
        self.seed = seed
        self.threads = max(1, threads)
        self.config_hash = config.config_hash()
        self.rng = RandomSource(seed)
        with config_errors("hypothesis_class"):
            self.hypothesis_class = self._build_class()
        with config_errors("distribution"):
            self.distribution = self._build_distribution()
        self._d: int | None = config.d
        self._params: StabilityParams | None = None

    # --- setup -------------------------------------------------------------

    def _build_class(self) -> HypothesisClass:
        source = self.config.hypothesis_class
        if isinstance(source, InlineClassSource):
            return make_class(source.rows)
        if isinstance(source, ThresholdClassSource):
            return threshold_class(source.n)
        return enumerate_affine_class(self.affine_params)

    @property
    def affine_params(self) -> AffineClassParams:
        source = self.config.hypothesis_class
        if not isinstance(source, AffineClassSource):
            raise ConfigError("the affine stage needs an 'affine' class source")
        return AffineClassParams(source.q, source.l, source.d)

    def _affine_target(self) -> AffineSubspace:
        params = self.affine_params
        subspace = self.config.distribution.target_subspace
        if subspace is None:
            basis = [[1 if j == i else 0 for j in range(params.l)] for i in range(params.d)]
            return AffineSubspace.canonical(params.q, [0] * params.l, basis)
        return AffineSubspace.canonical(params.q, subspace.basepoint, subspace.basis)

    def _build_distribution(self) -> RealizableDistribution:
        cfg = self.config.distribution
        if isinstance(self.config.hypothesis_class, AffineClassSource):
            return affine_distribution(self.affine_params, self._affine_target(), cfg.pmf)
        m = self.hypothesis_class.domain_size
        pmf = tuple(cfg.pmf) if cfg.pmf is not None else tuple([1.0 / m] * m)
        return RealizableDistribution(pmf, self.hypothesis_class.by_id(cfg.target_id), self.hypothesis_class)

    @property
    def d(self) -> int:
        if self._d is None:
            self._d = ldim(self.hypothesis_class)
        return self._d

    @property
    def params(self) -> StabilityParams:
        if self._params is None:
            with config_errors("stability parameters"):
                params = lemma1_params(self.d, self.config.epsilon)
                desk = self.config.desk
                if self.config.regime == DESK_SCALE:
                    params = params.with_desk_scale(desk.leaf_size, desk.n1)
            self._params = params
        return self._params

    @property
    def eta(self) -> Fraction:
        desk = self.config.desk
        if desk is not None and desk.eta is not None:
            return as_fraction(desk.eta)
        return self.params.eta

    @property
    def k(self) -> int:
        desk = self.config.desk
        if desk is not None and desk.k is not None:
            return desk.k
        return k_choice(self.config.delta, self.eta)

    def _learner(self) -> GloballyStableLearner:
        params = self.params
        if not params.executable and params.regime != DESK_SCALE:
            raise ConfigError(
                f"faithful n = 2^{params.log2_n:.1f} exceeds the desk-scale limit; set regime 'desk-scale' with overrides"
            )
        with config_errors("d"):
            return GloballyStableLearner(self.hypothesis_class, params)

    def _stream(self, stage: str) -> RandomSource:
        return self.rng.derive(STAGE_STREAMS[stage])

    # --- records -----------------------------------------------------------

    def _provenance(self) -> dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "artifact_version": __version__,
            "regime": self.config.regime,
        }

    def _summary(self, stage: str, **fields) -> dict[str, Any]:
        return {"record": "summary", "stage": stage, **fields, **self._provenance()}

    def _trial(self, stage: str, index: int, **fields) -> dict[str, Any]:
        return {"record": "trial", "stage": stage, "trial": index, **fields, **self._provenance()}

    # --- stages ------------------------------------------------------------

    def run_ldim(self) -> list[dict[str, Any]]:
        cls = self.hypothesis_class
        return [self._summary("ldim", ldim=ldim(cls), domain_size=cls.domain_size, class_size=len(cls))]

    def run_soa(self) -> list[dict[str, Any]]:
        if self.config.soa_sequence is not None:
            sequence = Sample.from_pairs(self.config.soa_sequence)
        else:
            sequence = Sample(tuple(self.distribution.example(x) for x in self.distribution.support))
        result = soa_run(self.hypothesis_class, sequence)
        fields: dict[str, Any] = {
            "ldim": self.d,
            "sequence_length": len(sequence),
            "mistakes": result.mistakes,
            "output_id": result.hypothesis.canonical_id,
            "output_bits": result.hypothesis.bitstring,
        }
        if self.config.game_horizon is not None:
            fields["game_horizon"] = self.config.game_horizon
            fields["worst_case_mistakes"] = worst_case_mistakes(
                SoaOnlineLearner(), self.hypothesis_class, self.config.game_horizon
            )
        return [self._summary("soa", **fields)]

    def run_stability(self) -> list[dict[str, Any]]:
        learner = self._learner()
        params = self.params
        report = empirical_stability(
            learner, self.distribution, self.config.trials, self._stream("stability"), self.threads, params.regime
        )
        checks = lemma3_loss_check(report.frequencies(), self.distribution, params.eta, params.prefix_size)
        records = [{**row, "stage": "stability", **self._provenance()} for row in report.to_records()[:-1]]
        records.append(
            self._summary(
                "stability",
                d=params.d,
                eta=float(params.eta),
                n1=params.prefix_size,
                leaf_size=params.leaf_size,
                trials=report.trials,
                f0_id=report.f0_id,
                eta_hat=report.eta_hat,
                wilson_lower=report.wilson_lower,
                wilson_upper=report.wilson_upper,
                stable=report.wilson_lower >= float(params.eta),
                lemma3_loss_bound=checks[0].bound if checks else None,
                lemma3_max_loss=max((c.true_error for c in checks), default=None),
                lemma3_ok=all(c.ok for c in checks),
            )
        )
        return records

    def _failure_bound(self, eta: float | Fraction) -> float:
        # e^{-k eta^2/2} is vacuous at eta = 0
        if eta <= 0:
            return 1.0
        return failure_and_lemma_bounds(self.k, eta, self.params.prefix_size).failure_bound

    def run_boost(self) -> list[dict[str, Any]]:
        learner = self._learner()
        cfg = BoostConfig(k=self.k, eta=self.eta, n=learner.sample_size)
        stability = empirical_stability(
            learner, self.distribution, self.config.trials, self._stream("boost-stability"), self.threads, self.params.regime
        )
        outcomes = run_boost_trials(learner, self.distribution, cfg, self.config.trials, self._stream("boost"), self.threads)
        p_hat, sigma = failure_rate(outcomes)
        bound = self._failure_bound(stability.eta_hat)
        records = [self._trial("boost", i, **outcome.to_json()) for i, outcome in enumerate(outcomes)]
        records.append(
            self._summary(
                "boost",
                d=self.d,
                k=cfg.k,
                eta=float(self.eta),
                eta_hat=stability.eta_hat,
                n1=self.params.prefix_size,
                trials=len(outcomes),
                threshold=cfg.threshold,
                failure_rate=p_hat,
                failure_sigma=sigma,
                failure_bound=bound,
                failure_bound_eta=self._failure_bound(self.eta),
                failure_ok=p_hat <= bound + 3 * sigma,
            )
        )
        return records

    def _entropy_records(
        self,
        stage: str,
        learner,
        distribution: RealizableDistribution,
        bound: float | None,
        **fields,
    ) -> list[dict[str, Any]]:
        k = self.k
        # rejects eta*k/2 < 2 before any sampling
        BoostConfig(k=k, eta=self.eta, n=learner.sample_size)
        algorithm = BoostedLearner(learner, self.eta, k)
        keys = outcome_sequence(
            algorithm, distribution, learner.sample_size, k, self.config.trials, self._stream(stage), self.threads
        )
        estimate = entropy_estimate(Counter(keys))
        mi_exact = None
        if learner.sample_size * k * math.log(max(len(distribution.support), 1)) <= math.log(EXACT_MI_MAX_SEQUENCES):
            try:
                mi_exact = exact_mutual_information(algorithm, distribution, learner.sample_size, k, MAX_ATOMS).value
            except ResourceGuardError as e:
                logger.info("%s: exact mutual information skipped: %s", stage, e)
        records = [self._trial(stage, i, outcome=key) for i, key in enumerate(keys)]
        records.append(
            self._summary(
                stage,
                k=k,
                eta=float(self.eta),
                trials=len(keys),
                entropy_plugin=estimate.value,
                miller_madow=estimate.bias_correction,
                entropy_hat=estimate.corrected,
                confidence_radius=estimate.confidence_radius,
                support_size=estimate.support_size,
                mi_exact=mi_exact,
                within_bound=None if bound is None else estimate.upper <= bound,
                **fields,
            )
        )
        return records

    def run_mi(self) -> list[dict[str, Any]]:
        with config_errors("desk"):
            theorem1 = bound_theorem1(self.k, self.eta)
        learner = self._learner()
        stability = empirical_stability(
            learner, self.distribution, self.config.trials, self._stream("mi-stability"), self.threads, self.params.regime
        )
        # the bound at the measured stability needs eta_hat*k/2 >= 2
        rhs_hat = None
        if stability.eta_hat * self.k / 2 >= 2:
            rhs_hat = bound_theorem1(self.k, stability.eta_hat).total
        return self._entropy_records(
            "mi",
            learner,
            self.distribution,
            rhs_hat,
            d=self.d,
            n1=self.params.prefix_size,
            eta_hat=stability.eta_hat,
            theorem1_rhs=theorem1.total,
            theorem1_rhs_eta_hat=rhs_hat,
        )

    def run_bounds(self) -> list[dict[str, Any]]:
        desk = self.config.desk
        report = build_bound_report(
            self.d,
            self.config.epsilon,
            self.config.delta,
            k=desk.k if desk else None,
            eta=desk.eta if desk else None,
            n1=desk.n1 if desk and self.config.regime == DESK_SCALE else None,
        )
        fields = report.to_record()
        fields["log2_n"] = report.log2_n
        return [self._summary("bounds", **fields)]

    def run_affine(self) -> list[dict[str, Any]]:
        params = self.affine_params
        desk = self.config.desk
        if desk is None:
            raise ConfigError("the affine stage needs desk-scale leaf_size and n1")
        with config_errors("desk"):
            learner = AffineStableLearner(params, desk.leaf_size, desk.n1, target=self.distribution.target)
        stability = empirical_stability(
            learner, self.distribution, self.config.trials, self._stream("affine-stability"), self.threads, DESK_SCALE
        )
        rhs = proposition_affine_bound(params.d)
        records = self._entropy_records(
            "affine",
            learner,
            self.distribution,
            rhs,
            d=params.d,
            n1=desk.n1,
            q=params.q,
            l=params.l,
            domain_size=AffineDomain.of(params).size,
            eta_hat=stability.eta_hat,
            wilson_lower=stability.wilson_lower,
            proposition_rhs=rhs,
        )
        return records

    def run(self, stage: str) -> list[dict[str, Any]]:
        """Records of one stage, or of every applicable stage for ``all``."""
        stages = self._stages(stage)
        records: list[dict[str, Any]] = []
        for name in stages:
            logger.info("experiment: stage %s (seed=%d, config=%s)", name, self.seed, self.config_hash[:12])
            records.extend(self._runner(name)())
        return records

    def _stages(self, stage: str) -> tuple[str, ...]:
        if stage == "all":
            if isinstance(self.config.hypothesis_class, AffineClassSource):
                return STAGES
            return tuple(s for s in STAGES if s != "affine")
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}; expected one of {', '.join(STAGES)} or all")
        return (stage,)

    def _runner(self, name: str) -> Callable[[], list[dict[str, Any]]]:
        return getattr(self, f"run_{name}")

