"""subcommand handlers"""
import logging
from fractions import Fraction
from typing import Callable, Dict, List

from klpath.cli import plot
from klpath.domain.constants import BOUNDS_CSV_HEADER, PRINT_DIGITS
from klpath.domain.enums import Subcommand
from klpath.domain.errors import ConfigError
from klpath.domain.messages import Messages
from klpath.models.experiment import ExperimentConfig
from klpath.models.reports import ModulusInfo, MomentValue
from klpath.repositories.artifact_repository import ArtifactRepository
from klpath.services import bounds, verify
from klpath.services.kloosterman import full_sum
from klpath.services.path import RationalTime, build_path, path_eval, step_approx
from klpath.utils.response import cli_error_handler

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_H = 1000


def fmt(value: float) -> str:
    """numbers on stdout carry 12 significant digits"""
    return f"{value:.{PRINT_DIGITS}g}"


def fmt_complex(value: complex) -> str:
    return f"{fmt(value.real)} {'+' if value.imag >= 0 else '-'} {fmt(abs(value.imag))}i"


def _require(config: ExperimentConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) in (None, [])]
    if missing:
        raise ConfigError(Messages.get("IO", "config_value", detail=f"missing {', '.join(missing)}"))


def _grid(points: int) -> List[RationalTime]:
    """points equally spaced exact times from 0 to 1"""
    if points == 1:
        return [RationalTime.of(1)]
    return [RationalTime.of(Fraction(k, points - 1)) for k in range(points)]


@cli_error_handler(Subcommand.SUM.value)
def run_sum(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """print Kl_q(a, b)"""
    modulus = config.modulus()
    value = full_sum(config.unit_a(modulus), config.unit_b(modulus), modulus)
    print(f"Kl = {fmt(value)}")
    return 0


@cli_error_handler(Subcommand.PATH.value)
def run_path(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """export the knots of the path, optionally evaluating it at t"""
    modulus = config.modulus()
    a, b = config.unit_a(modulus), config.unit_b(modulus)
    path = build_path(a, b, modulus)
    rows = [(j, float(t), re, im) for j, t, re, im in path.knot_rows()]
    target = repo.write_path_csv(config.export or "path.csv", rows)
    print(f"{len(rows)} knots written to {target}")

    if config.t is not None:
        t = config.time(config.t, modulus)
        print(f"path({t}) = {fmt_complex(path_eval(t, path))}")
        if t.numerator:
            print(f"step({t}) = {fmt_complex(step_approx(t, a, b, modulus))}")
    return 0


@cli_error_handler(Subcommand.MOMENTS.value)
def run_moments(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """print M_alpha(s, t) averaged over all units a"""
    _require(config, "s", "t")
    modulus = config.modulus()
    s, t = config.time(config.s, modulus), config.time(config.t, modulus)
    b0 = config.unit_b(modulus)
    value = verify.moment(s, t, config.alpha, b0, modulus, threads=config.threads)
    report = MomentValue(
        modulus=ModulusInfo(p=modulus.p, n=modulus.n), b0=b0.value, s=str(s), t=str(t), alpha=config.alpha, value=value
    )
    repo.write_report(config.export or "moment.json", report)
    print(f"M_{config.alpha}({s}, {t}) = {fmt(value)}")
    return 0


@cli_error_handler(Subcommand.SCAN_TIGHTNESS.value)
def run_scan_tightness(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """moment scan over the gap grid, written as a moment report"""
    _require(config, "gaps")
    modulus = config.modulus()
    report = verify.tightness_scan(
        modulus,
        config.unit_b(modulus),
        config.alpha,
        config.gaps,
        config.samples_per_gap,
        seed=config.seed,
        delta=config.delta,
        threads=config.threads,
    )
    repo.write_report(config.export or "tightness.json", report)
    for gap, value in zip(report.gaps, report.moments):
        print(f"{fmt(gap)} {fmt(value)}")
    slope = "absent" if report.fitted_slope is None else fmt(report.fitted_slope)
    print(f"fitted slope: {slope}")
    print(f"small-gap violations: {len(report.violations)}")
    return 0


@cli_error_handler(Subcommand.COMPARE_LAW.value)
def run_compare_law(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """ks distances between path marginals and the limit series"""
    modulus = config.modulus()
    t_points = [config.time(t, modulus) for t in config.t_grid or ["1/2"]]
    report = verify.compare_laws(
        modulus,
        config.unit_b(modulus),
        t_points,
        config.H or modulus.q,
        config.n_mc_samples,
        config.seed,
        threads=config.threads,
        energy_subsample=config.energy_subsample,
        resolution=config.resolution,
    )
    repo.write_report(config.export or "law.json", report)
    for entry in report.ks:
        print(f"t = {entry.t}: ks re {fmt(entry.re)}, ks im {fmt(entry.im)}")
    print(f"zero mass at t = 1: {fmt(report.zero_mass_fraction)}")
    return 0


def _default_lengths(p: int, n: int) -> List[int]:
    return [p ** k for k in range(1, max(1, n // 2) + 1)]


@cli_error_handler(Subcommand.BOUNDS.value)
def run_bounds(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """korolev bound table, delta window, interval bound and short-sum maxima"""
    modulus = config.modulus()

    if config.delta_window:
        window = bounds.delta_admissible(modulus)
        print(f"delta window: 0 < delta <= {fmt(window.delta_max)}")
        if config.delta is not None:
            chain = bounds.exponent_chain_check(config.delta, modulus)
            print(f"exponent chain at delta = {fmt(config.delta)}: {'holds' if chain else 'fails'}")

    lengths = config.lengths or _default_lengths(modulus.p, modulus.n)

    if config.interval_bound:
        _require(config, "delta")
        for N in lengths:
            value = bounds.korolev_interval_bound(N, modulus, config.delta)
            print(f"interval bound N = {N}: {fmt(value)}")

    rows = bounds.bounds_table(modulus, lengths, factor4=config.factor4)
    print(",".join(BOUNDS_CSV_HEADER))
    for row in rows:
        print(f"{row.N},{row.condition},{fmt(row.bound)},{fmt(row.bound_over_N)},{row.trivial},{fmt(row.sqrt_N)}")
    repo.write_table_csv(
        config.export or "bounds.csv",
        BOUNDS_CSV_HEADER,
        ([r.N, r.condition, r.bound, r.bound_over_N, r.trivial, r.sqrt_N] for r in rows),
    )

    if config.starts:
        b = config.unit_b(modulus)
        for N in lengths:
            report = bounds.short_sum_scan(
                b, modulus, N, config.starts, a_sample=config.a_sample, seed=config.seed,
                threads=config.threads,
            )
            repo.write_report(f"short_sums_N{N}.json", report)
            print(f"short sums N = {N}: max {fmt(report.max_abs)}, max/sqrt(N) {fmt(report.ratio_sqrt)}")
    return 0


@cli_error_handler(Subcommand.SAMPLE_LIMIT.value)
def run_sample_limit(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """draw the truncated limit series on an even grid; the seed column is the stream index"""
    H = config.H
    if H is None:
        H = config.modulus().q if config.p is not None and config.n is not None else DEFAULT_SAMPLE_H
    times = _grid(config.grid_points)
    values = verify.limit_samples(times, H, config.n_mc_samples, config.seed, threads=config.threads)
    rows = (
        (i, float(t), values[i, k].real, values[i, k].imag)
        for i in range(values.shape[0])
        for k, t in enumerate(times)
    )
    target = repo.write_sample_csv(config.export or "samples.csv", rows)
    print(f"{config.n_mc_samples} samples x {len(times)} times (H = {H}) written to {target}")
    return 0


@cli_error_handler(Subcommand.SURROGATE.value)
def run_surrogate(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """monte carlo moment of the truncated surrogate increment"""
    _require(config, "s", "t")
    modulus = config.modulus()
    report = verify.surrogate_moment(
        config.time(config.s, modulus),
        config.time(config.t, modulus),
        modulus,
        config.alpha,
        config.n_mc_samples,
        config.seed,
        b0=config.unit_b(modulus),
        threads=config.threads,
    )
    repo.write_report(config.export or "surrogate.json", report)
    print(f"E|X|^{config.alpha} = {fmt(report.mc_moment)} +- {fmt(report.mc_stderr)}")
    print(f"sigma = {fmt(report.sigma)}")
    if report.subgaussian_ratio is not None:
        print(f"E|X|^alpha / sigma^alpha = {fmt(report.subgaussian_ratio)}")
    print(f"step moment = {fmt(report.step_moment)}")
    return 0


@cli_error_handler(Subcommand.PLOT.value)
def run_plot(config: ExperimentConfig, repo: ArtifactRepository) -> int:
    """render an svg from a path csv or a report json"""
    _require(config, "input")
    output = config.output or str(repo.resolve("figure.svg"))
    target = plot.render(config.input, output)
    print(f"figure written to {target}")
    return 0


HANDLERS: Dict[Subcommand, Callable[[ExperimentConfig, ArtifactRepository], int]] = {
    Subcommand.SUM: run_sum,
    Subcommand.PATH: run_path,
    Subcommand.MOMENTS: run_moments,
    Subcommand.SCAN_TIGHTNESS: run_scan_tightness,
    Subcommand.COMPARE_LAW: run_compare_law,
    Subcommand.BOUNDS: run_bounds,
    Subcommand.SAMPLE_LIMIT: run_sample_limit,
    Subcommand.SURROGATE: run_surrogate,
    Subcommand.PLOT: run_plot,
}
