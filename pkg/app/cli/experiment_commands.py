import logging
import os
from pathlib import Path
from typing import Annotated, Any, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from app.cli.config import load_config, resolve_seed
from app.core.errors import ConfigError, ConstructionError, PipelineError, ResourceGuardError
from app.services.experiment.orchestrator import ExperimentOrchestrator
from app.utils.report import emit_report

logger = logging.getLogger(__name__)
console = Console()

experiment_app = typer.Typer(help="Learning-theory experiments: one subcommand per pipeline stage.", no_args_is_help=True)

EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_IO = 4

# columns of the closing console table
SUMMARY_FIELDS = ("ldim", "mistakes", "eta_hat", "wilson_lower", "failure_rate", "entropy_hat", "mi_exact", "theorem1_rhs", "theorem2_rhs")

ConfigOption = Annotated[Path, typer.Option("--config", help="Experiment config (JSON)")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Master seed; overrides EXPERIMENT_SEED and the config")]
ThreadsOption = Annotated[int, typer.Option("--threads", min=1, help="Worker threads for trial loops")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Report directory (default: EXPERIMENT_OUT_DIR or ./reports)")]
FormatOption = Annotated[str, typer.Option("--format", help="json, csv or both")]


def _print_summary(records: list[dict[str, Any]], paths: list[Path]) -> None:
    table = Table(title="Experiment summary")
    table.add_column("stage")
    table.add_column("result")
    for record in records:
        if record.get("record") != "summary":
            continue
        shown = ", ".join(
            f"{name}={record[name]:.4g}" if isinstance(record[name], float) else f"{name}={record[name]}"
            for name in SUMMARY_FIELDS
            if record.get(name) is not None
        )
        table.add_row(record["stage"], shown)
    console.print(table)
    for path in paths:
        console.print(f"wrote {path}")


def run_experiment(stage: str, config: Path, seed: int | None, threads: int, out: Path | None, fmt: str) -> None:
    """Load the config, run the stage and write the report; errors become exit codes."""
    try:
        if fmt not in ("json", "csv", "both"):
            raise ConfigError(f"--format must be json, csv or both, got {fmt!r}")
        cfg = load_config(config)
        resolved = resolve_seed(seed, cfg)
        records = ExperimentOrchestrator(cfg, resolved, threads).run(stage)
        out_dir = out or Path(os.getenv("EXPERIMENT_OUT_DIR", "reports"))
        paths = emit_report(records, out_dir, fmt)
    except (ValidationError, ConfigError, ConstructionError) as e:
        logger.error("%s: invalid configuration: %s", stage, e)
        raise typer.Exit(EXIT_CONFIG) from e
    except ResourceGuardError as e:
        logger.error("%s: %s", stage, e)
        raise typer.Exit(EXIT_RESOURCE) from e
    except OSError as e:
        logger.error("%s: cannot write report: %s", stage, e)
        raise typer.Exit(EXIT_IO) from e
    except PipelineError as e:
        logger.exception("%s failed: %s", stage, e)
        raise typer.Exit(EXIT_FAILED) from e
    _print_summary(records, paths)


@experiment_app.command()
def ldim(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Littlestone dimension of the configured class."""
    run_experiment("ldim", config, seed, threads, out, fmt)


@experiment_app.command()
def soa(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Run the SOA on a sequence and, optionally, solve the mistake game."""
    run_experiment("soa", config, seed, threads, out, fmt)


@experiment_app.command()
def stability(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Empirical output frequencies of the globally stable learner."""
    run_experiment("stability", config, seed, threads, out, fmt)


@experiment_app.command()
def boost(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Repeated boosting runs and their failure rate."""
    run_experiment("boost", config, seed, threads, out, fmt)


@experiment_app.command()
def mi(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Output entropy of the boosted learner against its information bound."""
    run_experiment("mi", config, seed, threads, out, fmt)


@experiment_app.command()
def bounds(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Evaluate every closed-form bound."""
    run_experiment("bounds", config, seed, threads, out, fmt)


@experiment_app.command()
def affine(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Stability and output entropy of the affine-subspace learner."""
    run_experiment("affine", config, seed, threads, out, fmt)


@experiment_app.command("all")
def run_all(config: ConfigOption, seed: SeedOption = None, threads: ThreadsOption = 1, out: OutOption = None, fmt: FormatOption = "both"):
    """Every stage that applies to the configured class."""
    run_experiment("all", config, seed, threads, out, fmt)
