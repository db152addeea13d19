"""argument parsing and run orchestration"""
import argparse
import logging
import time
from typing import List, Optional

from klpath import __version__
from klpath.cli.commands import HANDLERS
from klpath.domain.config import settings
from klpath.domain.enums import Subcommand
from klpath.domain.logging_config import setup_logging
from klpath.models.experiment import ExperimentConfig
from klpath.repositories.artifact_repository import ArtifactRepository
from klpath.utils.response import cli_error_handler

logger = logging.getLogger(__name__)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="odd prime p")
    common.add_argument("--n", type=int, help="exponent n >= 1")
    common.add_argument("--a", type=int, help="unit a")
    common.add_argument("--b", type=int, help="unit b (b0 for averaged experiments)")
    common.add_argument("--seed", type=int, help="experiment seed")
    common.add_argument("--grid-factor", type=int, help="decimal times snap to multiples of 1/((phi - 1) grid_factor)")
    common.add_argument("--threads", type=int, help=f"worker threads (env KLPATH_THREADS, default {settings.threads})")
    common.add_argument("--config", help="plain-text key=value config file; flags win")
    common.add_argument("--out", help=f"output directory (default {settings.output_dir})")
    common.add_argument("--export", help="name of the main artifact")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return common


def _flag(parser: argparse.ArgumentParser, name: str) -> None:
    """boolean switch whose absence leaves the config file value alone"""
    parser.add_argument(name, action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    """the klpath argument parser with one subparser per subcommand"""
    parser = argparse.ArgumentParser(
        prog="klpath",
        description="kloosterman paths modulo odd prime powers",
    )
    parser.add_argument("--version", action="version", version=f"klpath {__version__}")
    common = _common_parser()
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser(Subcommand.SUM.value, parents=[common], help="normalized kloosterman sum")

    path = sub.add_parser(Subcommand.PATH.value, parents=[common], help="export path knots as csv")
    path.add_argument("--t", help="also evaluate the path at this time (e.g. 1/3)")

    moments = sub.add_parser(Subcommand.MOMENTS.value, parents=[common], help="moment over all units")
    moments.add_argument("--s")
    moments.add_argument("--t")
    moments.add_argument("--alpha", type=int)

    scan = sub.add_parser(Subcommand.SCAN_TIGHTNESS.value, parents=[common], help="moment scan over gaps")
    scan.add_argument("--alpha", type=int)
    scan.add_argument("--gaps", help="comma separated gaps in (0, 1]")
    scan.add_argument("--samples-per-gap", type=int)
    scan.add_argument("--delta", type=float, help="window scale for the gap classification")

    law = sub.add_parser(Subcommand.COMPARE_LAW.value, parents=[common], help="path marginals vs limit series")
    law.add_argument("--t-grid", help="comma separated times")
    law.add_argument("--H", type=int, help="series truncation (default q)")
    law.add_argument("--n-mc-samples", type=int)
    law.add_argument("--energy-subsample", type=int)
    law.add_argument("--resolution", type=float, help="marginal values within this of 0 compare as 0 (default 6/sqrt(q))")

    bounds = sub.add_parser(Subcommand.BOUNDS.value, parents=[common], help="korolev bound table")
    bounds.add_argument("--lengths", help="comma separated interval lengths N")
    _flag(bounds, "--factor4")
    _flag(bounds, "--delta-window")
    _flag(bounds, "--interval-bound")
    bounds.add_argument("--delta", type=float)
    bounds.add_argument("--starts", help="comma separated interval starts for short-sum maxima")
    bounds.add_argument("--a-sample", type=int, help="units a drawn for short-sum maxima")

    sample = sub.add_parser(Subcommand.SAMPLE_LIMIT.value, parents=[common], help="draw the limit series")
    sample.add_argument("--H", type=int)
    sample.add_argument("--n-mc-samples", type=int)
    sample.add_argument("--grid-points", type=int)

    surrogate = sub.add_parser(Subcommand.SURROGATE.value, parents=[common], help="surrogate increment moments")
    surrogate.add_argument("--s")
    surrogate.add_argument("--t")
    surrogate.add_argument("--alpha", type=int)
    surrogate.add_argument("--n-mc-samples", type=int)

    plot = sub.add_parser(Subcommand.PLOT.value, parents=[common], help="svg figure from a csv or json artifact")
    plot.add_argument("--input", help="path csv or report json")
    plot.add_argument("--output")

    return parser


@cli_error_handler("config")
def _configure_logging(log_level: str) -> int:
    setup_logging(log_level, settings.log_file)
    return 0


@cli_error_handler("config")
def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("subcommand", "config", "log_level")
    }
    return ExperimentConfig.from_sources(args.config, **overrides)


def run(subcommand: Subcommand, config: ExperimentConfig) -> int:
    """
    execute one subcommand and write its manifest

    args:
        subcommand: which handler to run
        config: validated experiment configuration

    returns:
        exit status (0 success, 2 invalid config, 3 hypothesis violation, 1 other)
    """
    repo = ArtifactRepository(config.out or settings.output_dir)
    started = time.perf_counter()
    status = HANDLERS[subcommand](config, repo)
    elapsed = time.perf_counter() - started

    if status == 0:
        repo.write_manifest(subcommand.value, config.echo(), elapsed)
    logger.info(f"{subcommand.value} finished with status {status} in {elapsed:.3f}s")
    return status


def main(argv: Optional[List[str]] = None) -> int:
    """entry point of python -m klpath"""
    parser = build_parser()
    args = parser.parse_args(argv)
    status = _configure_logging(args.log_level or settings.log_level)
    if status:
        return status

    config = _load_config(args)
    if not isinstance(config, ExperimentConfig):
        return config
    return run(Subcommand(args.subcommand), config)
