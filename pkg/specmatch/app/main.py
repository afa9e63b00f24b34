"""Command-line entry point for SpecMatch"""
import logging
from functools import wraps
from pathlib import Path
from typing import Optional

import click

from app.checks import CheckSuite, format_result
from app.config import settings
from app.exceptions import SpecMatchError
from app.models import gen_er_pair, gen_gaussian_pair
from app.pipeline import ROUNDERS, SIMILARITY_METHODS, MatchingPipeline, matching_lines
from app.storage import load_config, read_matrix, read_permutation, write_pair, write_plot_data, write_sweep_csv
from app.tasks import resolve_workers, run_sweep

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger("app").setLevel(level)


def reports_errors(command):
    """Turn SpecMatchError into click errors: usage errors exit 2, the rest exit 1"""

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SpecMatchError as exc:
            if exc.exit_code == 2:
                raise click.UsageError(exc.detail) from exc
            raise click.ClickException(f"{type(exc).__name__}: {exc.detail}") from exc

    return wrapper


@click.group()
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
def cli(verbose: bool):
    """Spectral graph matching: generate correlated pairs, match them, sweep noise grids."""
    configure_logging(verbose)


@cli.command()
@click.option("--model", type=click.Choice(["erdos_renyi", "gaussian"]), default="erdos_renyi", show_default=True)
@click.option("--n", "n", type=int, required=True, help="Number of vertices.")
@click.option("--p", "p", type=float, default=0.5, show_default=True, help="Edge density (erdos_renyi).")
@click.option("--noise", type=float, required=True, help="Retention s (erdos_renyi) or sigma (gaussian).")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--truth-mode", type=click.Choice(["identity", "random"]), default="random", show_default=True)
@click.option("--construction", type=click.Choice(["conditional", "parent"]), default="conditional", show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True, help="Output directory.")
@reports_errors
def generate(model, n, p, noise, seed, truth_mode, construction, out: Path):
    """Write a correlated pair as a.txt, b.txt, truth.txt and meta.json."""
    if model == "gaussian":
        pair = gen_gaussian_pair(n, noise, seed, truth_mode=truth_mode)
    else:
        pair = gen_er_pair(n, p, noise, seed, truth_mode=truth_mode, construction=construction)
    for path in write_pair(out, pair):
        click.echo(str(path))


@cli.command()
@click.argument("a_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("b_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--eta", type=float, default=settings.DEFAULT_ETA, show_default=True)
@click.option("--method", type=click.Choice(sorted(SIMILARITY_METHODS)), default="grampa", show_default=True)
@click.option("--rounder", type=click.Choice(sorted(ROUNDERS)), default="lap", show_default=True)
@click.option("--truth", "truth_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--sigma", type=float, default=0.0, show_default=True, help="Noise level for the predicted diagonal.")
@reports_errors
def match(a_file: Path, b_file: Path, eta, method, rounder, truth_file: Optional[Path], sigma):
    """Match two matrix dumps and print the matching with its diagnostics."""
    a = read_matrix(a_file)
    b = read_matrix(b_file)
    truth = read_permutation(truth_file) if truth_file is not None else None

    pipeline = MatchingPipeline(method=method, rounder=rounder, eta=eta)
    result = pipeline.run(a, b, truth=truth, sigma=sigma)

    click.echo(matching_lines(result.matching))
    if result.overlap is not None:
        click.echo(f"overlap={result.overlap!r}")
    if result.dominance is not None:
        for key, value in result.dominance.model_dump().items():
            click.echo(f"{key}={value!r}")
    if result.qap_objective is not None:
        click.echo(f"qap_objective={result.qap_objective!r}")
    click.echo(f"bijective={'true' if result.matching.bijective else 'false'}")


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True, help="CSV output path.")
@click.option("--workers", type=int, default=None, help="Worker threads (overrides SPECMATCH_WORKERS and the config).")
@click.option("--plot-data", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Directory for per-curve `noise mean_overlap` files.")
@click.option("--timing", is_flag=True, help="Record runtime_ms (makes the CSV non-reproducible).")
@reports_errors
def sweep(config_file: Path, out: Path, workers, plot_data: Optional[Path], timing: bool):
    """Run a noise sweep from a config file and write the trial CSV."""
    config = load_config(config_file)
    n_workers = resolve_workers(workers, config)
    result = run_sweep(config, workers=n_workers, timing=timing)

    write_sweep_csv(out, result.records, result.summaries)
    if plot_data is not None:
        write_plot_data(plot_data, result.summaries)
    click.echo(f"wrote {len(result.records)} trial rows and {len(result.summaries)} summary rows to {out}")
    if not result.complete:
        raise click.Abort()


@cli.command()
@click.pass_context
def verify(ctx: click.Context):
    """Run the identity and oracle suite; exit 1 if any check fails."""
    suite = CheckSuite()
    results = suite.run_all()
    for check, result in zip(suite.checks, results):
        for line in format_result(check, result):
            click.echo(line)

    failed = [r.name for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        click.echo(f"failed: {', '.join(failed)}", err=True)
        ctx.exit(1)


if __name__ == "__main__":
    cli()
