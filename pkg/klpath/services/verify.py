"""moment, tightness, law-comparison and sup-norm experiments"""
import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import ks_2samp

from klpath.domain.config import settings
from klpath.domain.constants import KS_CRITICAL, STEP_GAP_CONSTANT, ZERO_MASS_TOL
from klpath.domain.enums import GapWindow
from klpath.domain.errors import DomainError, HypothesisViolation
from klpath.domain.messages import Messages
from klpath.models.reports import (
    KsEntry,
    LawComparisonReport,
    ModulusInfo,
    MomentPoint,
    MomentReport,
    SupReport,
    SurrogateReport,
    WindowSummary,
)
from klpath.services.bounds import delta_admissible
from klpath.services.kloosterman import partial_sum_table
from klpath.services.limitlaw import MuSampler, limit_series_batch, sigma_subgaussian, surrogate_batch
from klpath.services.modarith import PrimePowerModulus, UnitResidue, e_q, inv_mod, unit_table
from klpath.services.path import RationalTime, TimeLike, evaluate_paths, evaluate_steps, segment
from klpath.utils.parallel import chunked, run_ordered

logger = logging.getLogger(__name__)

CDF_QUANTILES = 101
SMALL_GAP_RTOL = 1e-12

Pair = Tuple[RationalTime, RationalTime]


def _require_even_alpha(alpha: int) -> int:
    if isinstance(alpha, bool) or int(alpha) != alpha or alpha < 2 or alpha % 2:
        raise DomainError(Messages.get("DOMAIN", "odd_alpha", alpha=alpha))
    return int(alpha)


def _require_exact_size(modulus: PrimePowerModulus) -> None:
    """exact averages run over every unit; large moduli are refused, never subsampled"""
    if modulus.q > settings.max_exact_modulus:
        raise DomainError(
            Messages.get("DOMAIN", "too_many_units", q=modulus.q, limit=settings.max_exact_modulus)
        )
    modulus.require_tables()


def _map_unit_chunks(
    modulus: PrimePowerModulus,
    b0: UnitResidue,
    func: Callable[[np.ndarray, np.ndarray], object],
    threads: Optional[int] = None
) -> list:
    """
    apply func(units, prefix_table) to consecutive chunks of units

    chunk boundaries depend on settings.a_chunk_size only, and results come back
    in chunk order, so fixed-order reductions give the same bits for any thread count.
    """
    _require_exact_size(modulus)
    units = unit_table(modulus)
    size = settings.a_chunk_size
    starts = range(0, len(units), size)

    def work(start: int):
        chunk = units[start:start + size]
        return func(chunk, partial_sum_table(chunk, b0.value, modulus))

    return run_ordered(work, starts, threads=threads)


def _ordered_times(pairs: Sequence[Pair]) -> Tuple[List[RationalTime], Dict[RationalTime, int]]:
    times = sorted({t for pair in pairs for t in pair}, key=lambda t: t.value)
    return times, {t: i for i, t in enumerate(times)}


def pair_moments(
    pairs: Sequence[Pair],
    alpha: int,
    b0: UnitResidue,
    modulus: PrimePowerModulus,
    threads: Optional[int] = None
) -> np.ndarray:
    """
    M_alpha(s, t) for many (s, t) pairs from a single prefix pass over all units

    returns:
        float array aligned with pairs
    """
    alpha = _require_even_alpha(alpha)
    times, position = _ordered_times(pairs)
    left = np.array([position[s] for s, _ in pairs], dtype=np.int64)
    right = np.array([position[t] for _, t in pairs], dtype=np.int64)

    def chunk_sums(units: np.ndarray, table: np.ndarray) -> np.ndarray:
        values = evaluate_paths(table, times, modulus)
        increments = np.abs(values[:, right] - values[:, left]) ** alpha
        return increments.sum(axis=0)

    totals = np.zeros(len(pairs))
    for partial in _map_unit_chunks(modulus, b0, chunk_sums, threads):
        totals = totals + partial
    return totals / modulus.phi


def moment(
    s: TimeLike,
    t: TimeLike,
    alpha: int,
    b0: UnitResidue,
    modulus: PrimePowerModulus,
    threads: Optional[int] = None
) -> float:
    """
    (1/phi) sum over all units a of |path_a(t) - path_a(s)|^alpha

    the functional only sees |increment|, so the order of s and t is immaterial.

    raises:
        DomainError: odd or non-positive alpha, or q above the exact-averaging limit
    """
    s, t = RationalTime.of(s), RationalTime.of(t)
    alpha = _require_even_alpha(alpha)
    if s == t:
        return 0.0
    return float(pair_moments([(s, t)], alpha, b0, modulus, threads)[0])


def brute_force_moment(
    s: TimeLike,
    t: TimeLike,
    alpha: int,
    b0: UnitResidue,
    modulus: PrimePowerModulus
) -> float:
    """
    moment() recomputed term by term without prefix tables

    every path value is summed afresh from e_q(a x + b xbar), with inverses
    taken by the extended euclidean algorithm; quadratic in phi, tests only.
    """
    alpha = _require_even_alpha(alpha)
    s, t = RationalTime.of(s), RationalTime.of(t)
    units = [x for x in range(1, modulus.q) if modulus.is_unit(x)]
    b_terms = [b0.value * inv_mod(modulus.unit(x)).value for x in units]

    def value(a: int, u: RationalTime) -> complex:
        j, lam = segment(u, modulus)
        total = sum(e_q(a * x + bx, modulus) for x, bx in zip(units[:j], b_terms[:j]))
        if lam:
            total += lam * e_q(a * units[j] + b_terms[j], modulus)
        return total / modulus.sqrt_q

    acc = 0.0
    for a in units:
        acc += abs(value(a, t) - value(a, s)) ** alpha
    return acc / modulus.phi


def small_gap_bound(gap: float, alpha: int) -> float:
    """2^alpha gap^(alpha/2), valid for gaps at most 1/(phi - 1)"""
    return 2.0 ** alpha * gap ** (alpha / 2)


def gap_window(s: TimeLike, t: TimeLike, modulus: PrimePowerModulus, delta: float) -> GapWindow:
    """
    the range of t - s the tightness argument puts the pair in

    SMALL up to 1/(phi - 1), MID up to p^(-n/2 - delta), KOROLEV below
    p^(-n/2 + delta), LARGE beyond.
    """
    s, t = RationalTime.of(s), RationalTime.of(t)
    if not s.value < t.value:
        raise DomainError(Messages.get("DOMAIN", "order", s=s, t=t))
    if delta <= 0:
        raise DomainError(Messages.get("DOMAIN", "positive", name="delta", value=delta))
    gap = t.value - s.value
    if gap * (modulus.phi - 1) <= 1:
        return GapWindow.SMALL

    log_gap = math.log(gap.numerator) - math.log(gap.denominator)
    log_p = math.log(modulus.p)
    if log_gap <= -(modulus.n / 2 + delta) * log_p:
        return GapWindow.MID
    if log_gap < -(modulus.n / 2 - delta) * log_p:
        return GapWindow.KOROLEV
    return GapWindow.LARGE


def window_exponent(window: GapWindow, n: int, delta: float, alpha: int) -> float:
    """exponent of (t - s) the moment bound predicts inside a gap window"""
    half = alpha / 2
    if window == GapWindow.SMALL:
        return half
    if window == GapWindow.MID:
        return min(half, alpha * delta / n)
    if window == GapWindow.KOROLEV:
        return min(half, alpha * delta / (n / 2 + delta))
    return min(half, 1 + delta / (n / 2 - delta))


def smallest_admissible_alpha(n: int, delta: float) -> int:
    """least even alpha strictly above max(n/delta, (n/2 + delta)/delta)"""
    d = Fraction(delta)
    threshold = max(n / d, (Fraction(n, 2) + d) / d)
    alpha = math.floor(threshold) + 1
    return alpha + (alpha % 2)


def beta_parameter(n: int, delta: float, alpha: int) -> float:
    """
    beta = min(alpha/2, alpha delta/n, 2, delta alpha/(n/2 + delta), 1 + delta/(n/2 - delta)) - 1

    raises:
        HypothesisViolation: delta outside its window (n <= 30 included), alpha
            not above max(n/delta, (n/2 + delta)/delta), or beta <= 0
        DomainError: alpha odd
    """
    window = delta_admissible(n)
    if not window.contains(delta):
        raise HypothesisViolation(
            Messages.get("HYPOTHESIS", "delta_range", delta=delta, delta_max=window.delta_max)
        )
    alpha = _require_even_alpha(alpha)
    d = Fraction(delta)
    half = Fraction(n, 2)
    threshold = max(n / d, (half + d) / d)
    if not alpha > threshold:
        raise HypothesisViolation(
            Messages.get("HYPOTHESIS", "alpha_range", alpha=alpha, threshold=float(threshold))
        )

    beta = min(Fraction(alpha, 2), alpha * d / n, Fraction(2), d * alpha / (half + d), 1 + d / (half - d)) - 1
    if beta <= 0:
        raise HypothesisViolation(Messages.get("HYPOTHESIS", "beta_positive", beta=float(beta)))
    return float(beta)


def _default_delta(n: int) -> float:
    """the admissible delta_max for n >= 31; n/4 as a classification scale below"""
    if n >= 31:
        return delta_admissible(n).delta_max
    return n / 4


def _random_pairs(
    gap: Fraction,
    modulus: PrimePowerModulus,
    count: int,
    rng: np.random.Generator
) -> List[Pair]:
    """count placements (s, s + gap) with s on the grid of step 1/(phi - 1)/64"""
    denominator = (modulus.phi - 1) * 64
    top = math.floor((1 - gap) * denominator)
    starts = rng.integers(0, top + 1, size=count)
    pairs = []
    for k in starts:
        s = Fraction(int(k), denominator)
        pairs.append((RationalTime.of(s), RationalTime.of(s + gap)))
    return pairs


def _fit(gaps: Sequence[float], values: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    """least-squares slope and intercept of log values against log gaps"""
    if len(set(gaps)) < 2:
        return None, None
    slope, intercept = np.polyfit(np.log(gaps), np.log(values), 1)
    return float(slope), float(intercept)


def tightness_scan(
    modulus: PrimePowerModulus,
    b0: UnitResidue,
    alpha: int,
    gap_grid: Sequence[float],
    samples_per_gap: int,
    seed: int = 0,
    delta: Optional[float] = None,
    threads: Optional[int] = None
) -> MomentReport:
    """
    moments over random placements per gap and their log-log slope

    each gap contributes the average of its samples_per_gap moments; gaps whose
    average vanishes are left out of the fit and counted. points with gap at
    most 1/(phi - 1) are checked against 2^alpha gap^(alpha/2).

    args:
        modulus: prime power modulus
        b0: fixed unit b
        alpha: even moment order
        gap_grid: gaps t - s in (0, 1]
        samples_per_gap: random placements per gap
        seed: seed of the placement generator
        delta: window scale, defaults to delta_max (n >= 31) or n/4
        threads: worker count, defaults to settings.threads

    returns:
        MomentReport
    """
    alpha = _require_even_alpha(alpha)
    if not gap_grid:
        raise DomainError(Messages.get("DOMAIN", "empty_grid", name="gap"))
    if samples_per_gap < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="samples_per_gap", value=samples_per_gap))
    gaps = []
    for gap in gap_grid:
        exact = Fraction(str(gap))
        if not 0 < exact <= 1:
            raise DomainError(Messages.get("DOMAIN", "gap_grid", gap=gap))
        gaps.append(exact)
    delta = _default_delta(modulus.n) if delta is None else delta

    rng = np.random.default_rng(seed)
    pairs = []
    for gap in gaps:
        pairs.extend(_random_pairs(gap, modulus, samples_per_gap, rng))
    logger.info(f"tightness scan mod {modulus}: {len(gaps)} gaps x {samples_per_gap} placements, alpha = {alpha}")
    values = pair_moments(pairs, alpha, b0, modulus, threads)

    small_limit = Fraction(1, modulus.phi - 1)
    points, violations = [], []
    for index, ((s, t), value) in enumerate(zip(pairs, values)):
        gap = t.value - s.value
        window = gap_window(s, t, modulus, delta)
        bound = small_gap_bound(float(gap), alpha) if gap <= small_limit else None
        violation = bound is not None and value > bound * (1 + SMALL_GAP_RTOL)
        if violation:
            violations.append(index)
        points.append(
            MomentPoint(
                s=str(s), t=str(t), gap=float(gap), moment=float(value),
                window=window.value, bound=bound, violation=violation,
            )
        )

    averaged = values.reshape(len(gaps), samples_per_gap).mean(axis=1)
    gap_floats = [float(g) for g in gaps]
    kept = [(g, m) for g, m in zip(gap_floats, averaged) if m > 0]
    excluded = len(gaps) - len(kept)
    if excluded:
        logger.warning(f"{excluded} gaps with vanishing moment left out of the fit")
    slope, intercept = _fit([g for g, _ in kept], [m for _, m in kept])

    windows = {}
    for window in GapWindow:
        members = [(p.gap, p.moment) for p in points if p.window == window.value and p.moment > 0]
        window_slope, _ = _fit([g for g, _ in members], [m for _, m in members])
        windows[window.value] = WindowSummary(
            points=sum(1 for p in points if p.window == window.value),
            fitted_slope=window_slope,
            predicted_exponent=window_exponent(window, modulus.n, delta, alpha),
        )

    try:
        beta = beta_parameter(modulus.n, delta, alpha)
    except (HypothesisViolation, DomainError) as exc:
        logger.debug(f"no beta prediction: {exc}")
        beta = None

    return MomentReport(
        modulus=ModulusInfo(p=modulus.p, n=modulus.n),
        b0=b0.value,
        alpha=alpha,
        gaps=gap_floats,
        moments=[float(m) for m in averaged],
        points=points,
        fitted_slope=slope,
        fitted_intercept=intercept,
        excluded_zero=excluded,
        violations=violations,
        windows=windows,
        delta=delta,
        beta_prediction=beta,
        seed=seed,
    )


def path_values(
    modulus: PrimePowerModulus,
    b0: UnitResidue,
    times: Sequence[RationalTime],
    threads: Optional[int] = None
) -> np.ndarray:
    """path values of every unit a (rows, increasing a) at the given times"""
    chunks = _map_unit_chunks(
        modulus, b0, lambda units, table: evaluate_paths(table, times, modulus), threads
    )
    return np.concatenate(chunks, axis=0)


def limit_samples(
    times: Sequence[RationalTime],
    H: int,
    n_samples: int,
    seed: int,
    threads: Optional[int] = None
) -> np.ndarray:
    """limit series draws (samples, times); sample i uses stream i of the seed"""
    samplers = [MuSampler(seed=seed, stream=i) for i in range(n_samples)]
    batches = chunked(samplers, settings.mc_batch_size)
    results = run_ordered(lambda batch: limit_series_batch(batch, times, H), batches, threads=threads)
    return np.concatenate(results, axis=0)


def energy_distance(x: np.ndarray, y: np.ndarray) -> float:
    """two-dimensional energy distance 2E|X - Y| - E|X - X'| - E|Y - Y'| of complex samples"""
    xs = np.column_stack([x.real, x.imag])
    ys = np.column_stack([y.real, y.imag])
    return float(2 * cdist(xs, ys).mean() - cdist(xs, xs).mean() - cdist(ys, ys).mean())


def resolve(values: np.ndarray, resolution: float) -> np.ndarray:
    """complex values with real and imaginary parts below resolution in modulus set to 0"""
    real = np.where(np.abs(values.real) < resolution, 0.0, values.real)
    imag = np.where(np.abs(values.imag) < resolution, 0.0, values.imag)
    return real + 1j * imag


def ks_noise(report: LawComparisonReport) -> float:
    """the 5% two-sample ks critical value for the report's population sizes"""
    n_path = report.modulus.p ** (report.modulus.n - 1) * (report.modulus.p - 1)
    return KS_CRITICAL * math.sqrt(1 / n_path + 1 / report.n_mc_samples)


def compare_laws(
    modulus: PrimePowerModulus,
    b0: UnitResidue,
    t_points: Sequence[TimeLike],
    H: int,
    n_mc_samples: int,
    seed: int,
    threads: Optional[int] = None,
    energy_subsample: int = 0,
    resolution: Optional[float] = None
) -> LawComparisonReport:
    """
    path marginals over all units against monte carlo draws of the limit series

    args:
        modulus: prime power modulus
        b0: fixed unit b
        t_points: times in [0, 1]
        H: truncation of the limit series
        n_mc_samples: number of limit samples
        seed: seed of the limit samples
        threads: worker count, defaults to settings.threads
        energy_subsample: when positive, points per population for the energy distance
        resolution: marginal values closer than this to 0 count as 0 in both
            populations, defaults to 6/sqrt(q)

    returns:
        LawComparisonReport with per-t ks distances and the zero mass at t = 1
    """
    times = [RationalTime.of(t) for t in t_points]
    if n_mc_samples < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="n_mc_samples", value=n_mc_samples))
    end = RationalTime.of(1)
    grid = times if end in times else times + [end]

    if resolution is None:
        resolution = STEP_GAP_CONSTANT / modulus.sqrt_q
    if resolution < 0:
        raise DomainError(Messages.get("DOMAIN", "nonnegative", name="resolution", value=resolution))

    path = path_values(modulus, b0, grid, threads)
    limit = limit_samples(times, H, n_mc_samples, seed, threads)
    rng = np.random.default_rng(seed)
    levels = np.linspace(0.0, 1.0, CDF_QUANTILES)

    entries, cdf_path, cdf_limit = [], {}, {}
    for col, t in enumerate(times):
        x, y = path[:, col], limit[:, col]
        xr, yr = resolve(x, resolution), resolve(y, resolution)
        energy = None
        if energy_subsample > 0:
            xs = rng.choice(x, size=min(energy_subsample, len(x)), replace=False)
            ys = rng.choice(y, size=min(energy_subsample, len(y)), replace=False)
            energy = energy_distance(xs, ys)
        entries.append(
            KsEntry(
                t=str(t),
                re=float(ks_2samp(xr.real, yr.real).statistic),
                im=float(ks_2samp(xr.imag, yr.imag).statistic),
                path_mean_re=float(x.real.mean()),
                path_std_re=float(x.real.std()),
                limit_mean_re=float(y.real.mean()),
                limit_std_re=float(y.real.std()),
                energy=energy,
            )
        )
        cdf_path[str(t)] = np.quantile(x.real, levels).tolist()
        cdf_limit[str(t)] = np.quantile(y.real, levels).tolist()

    at_end = path[:, grid.index(end)]
    zero_mass = float(np.mean(np.abs(at_end) < ZERO_MASS_TOL))
    logger.info(f"law comparison mod {modulus}: {len(times)} times, {n_mc_samples} samples, zero mass {zero_mass}")
    return LawComparisonReport(
        modulus=ModulusInfo(p=modulus.p, n=modulus.n),
        b0=b0.value,
        H=H,
        n_mc_samples=n_mc_samples,
        ks=entries,
        zero_mass_fraction=zero_mass,
        seed=seed,
        cdf_path=cdf_path,
        cdf_limit=cdf_limit,
        resolution=resolution,
    )


def sup_statistics(
    modulus: PrimePowerModulus,
    b0: UnitResidue,
    t_grid: Sequence[TimeLike],
    threads: Optional[int] = None
) -> SupReport:
    """
    max over units a and grid times of |step_approx|, and its ratio to log q

    t = 0 contributes the empty sum.

    raises:
        DomainError: on an empty grid
    """
    if not t_grid:
        raise DomainError(Messages.get("DOMAIN", "empty_grid", name="t"))
    times = [RationalTime.of(t) for t in t_grid]

    def chunk_max(units: np.ndarray, table: np.ndarray) -> Tuple[float, int, int]:
        values = np.abs(evaluate_steps(table, times, modulus))
        row, col = np.unravel_index(int(np.argmax(values)), values.shape)
        return float(values[row, col]), int(units[row]), int(col)

    best, best_a, best_col = -1.0, 0, 0
    for value, a, col in _map_unit_chunks(modulus, b0, chunk_max, threads):
        if value > best:
            best, best_a, best_col = value, a, col

    log_q = math.log(modulus.q)
    return SupReport(
        modulus=ModulusInfo(p=modulus.p, n=modulus.n),
        b0=b0.value,
        grid_size=len(times),
        max_abs=best,
        argmax_a=best_a,
        argmax_t=str(times[best_col]),
        log_q=log_q,
        ratio=best / log_q,
    )


def step_moment(
    s: TimeLike,
    t: TimeLike,
    alpha: int,
    b0: UnitResidue,
    modulus: PrimePowerModulus,
    threads: Optional[int] = None
) -> float:
    """(1/phi) sum over all units a of |step_a(t) - step_a(s)|^alpha, t = 0 giving 0"""
    alpha = _require_even_alpha(alpha)
    times = [RationalTime.of(s), RationalTime.of(t)]

    def chunk_sum(units: np.ndarray, table: np.ndarray) -> float:
        values = evaluate_steps(table, times, modulus)
        return float(np.sum(np.abs(values[:, 1] - values[:, 0]) ** alpha))

    total = 0.0
    for partial in _map_unit_chunks(modulus, b0, chunk_sum, threads):
        total += partial
    return total / modulus.phi


def surrogate_moment(
    s: TimeLike,
    t: TimeLike,
    modulus: PrimePowerModulus,
    alpha: int,
    n_samples: int,
    seed: int,
    b0: Optional[UnitResidue] = None,
    threads: Optional[int] = None
) -> SurrogateReport:
    """
    monte carlo E|X|^alpha for the truncated surrogate increment X between s and t

    sigma comes from sigma_subgaussian; the ratio E|X|^alpha / sigma^alpha is the
    empirical subgaussian constant. the exact step moment over all units is
    reported next to it for comparison.
    """
    alpha = _require_even_alpha(alpha)
    s, t = RationalTime.of(s), RationalTime.of(t)
    if not s.value < t.value:
        raise DomainError(Messages.get("DOMAIN", "order", s=s, t=t))
    if n_samples < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="n_samples", value=n_samples))
    b0 = b0 or modulus.unit(1)

    sigma = sigma_subgaussian(s, t, modulus)
    samplers = [MuSampler(seed=seed, stream=i) for i in range(n_samples)]
    batches = chunked(samplers, settings.mc_batch_size)
    draws = np.concatenate(
        run_ordered(lambda batch: surrogate_batch(t, s, modulus, batch), batches, threads=threads)
    )
    powers = np.abs(draws) ** alpha
    mc = float(powers.mean())
    stderr = float(powers.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0

    return SurrogateReport(
        modulus=ModulusInfo(p=modulus.p, n=modulus.n),
        b0=b0.value,
        s=str(s),
        t=str(t),
        alpha=alpha,
        n_samples=n_samples,
        seed=seed,
        mc_moment=mc,
        mc_stderr=stderr,
        sigma=sigma,
        subgaussian_ratio=mc / sigma ** alpha if sigma > 0 else None,
        step_moment=step_moment(s, t, alpha, b0, modulus, threads),
    )
