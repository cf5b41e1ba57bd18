import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field, model_validator

from app.core.errors import ConfigError
from app.services.stable.params import DESK_SCALE, FAITHFUL

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
UINT64_MAX = 2**64 - 1


class InlineClassSource(BaseModel):
    kind: Literal["inline"]
    rows: list[str | list[int]] = Field(min_length=1)


class ThresholdClassSource(BaseModel):
    kind: Literal["thresholds"]
    n: int = Field(ge=1)


class AffineClassSource(BaseModel):
    kind: Literal["affine"]
    q: int = Field(ge=2)
    l: int = Field(ge=1)
    d: int = Field(ge=0)


ClassSource = Annotated[
    Union[InlineClassSource, ThresholdClassSource, AffineClassSource],
    Field(discriminator="kind"),
]


class TargetSubspace(BaseModel):
    basepoint: list[int]
    basis: list[list[int]] = []


class DistributionConfig(BaseModel):
    # uniform over the domain when omitted
    pmf: list[float] | None = None
    target_id: int = Field(default=0, ge=0)
    # affine sources only; defaults to the span of the first d unit vectors
    target_subspace: TargetSubspace | None = None


class DeskScaleOverrides(BaseModel):
    leaf_size: int = Field(ge=1)
    n1: int = Field(ge=1)
    k: int | None = Field(default=None, ge=1)
    eta: float | None = Field(default=None, gt=0, le=1)


class ExperimentConfig(BaseModel):
    schema_version: Literal[1] = SCHEMA_VERSION
    hypothesis_class: ClassSource
    distribution: DistributionConfig = DistributionConfig()
    regime: Literal["faithful", "desk-scale"] = FAITHFUL
    desk: DeskScaleOverrides | None = None
    # Littlestone dimension bound handed to G; computed from the class when omitted
    d: int | None = Field(default=None, ge=0)
    epsilon: float = Field(default=0.5, gt=0, lt=1)
    delta: float = Field(default=0.05, gt=0, lt=1)
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)
    soa_sequence: list[tuple[int, int]] | None = None
    game_horizon: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def check_regime(self) -> "ExperimentConfig":
        if self.regime == DESK_SCALE and self.desk is None:
            raise ValueError("regime 'desk-scale' needs a 'desk' block with leaf_size and n1")
        if self.desk and self.desk.k is not None and self.desk.eta is not None:
            if self.desk.eta * self.desk.k / 2 < 2:
                raise ValueError(f"eta*k/2 must be >= 2, got {self.desk.eta * self.desk.k / 2:.4f}")
        return self

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON experiment config; pydantic's ValidationError propagates unchanged."""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e.msg} (line {e.lineno})") from e
    return ExperimentConfig.model_validate(data)


def resolve_seed(flag: int | None, config: ExperimentConfig) -> int:
    """--seed flag, then EXPERIMENT_SEED, then the config file."""
    if flag is not None:
        seed = flag
    elif os.getenv("EXPERIMENT_SEED"):
        try:
            seed = int(os.environ["EXPERIMENT_SEED"])
        except ValueError as e:
            raise ConfigError(f"EXPERIMENT_SEED must be an integer, got {os.environ['EXPERIMENT_SEED']!r}") from e
    else:
        seed = config.seed
    if not 0 <= seed <= UINT64_MAX:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed
