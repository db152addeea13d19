"""the kloosterman path, its step approximation and fourier coefficients"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from klpath.domain.constants import INTERVAL_LENGTH_CONSTANT
from klpath.domain.enums import FourierConvention
from klpath.domain.errors import DomainError
from klpath.domain.messages import Messages
from klpath.services.kloosterman import PartialSumSeries, partial_sums, unit_position
from klpath.services.modarith import PrimePowerModulus, UnitResidue, e_q, root_table

logger = logging.getLogger(__name__)

TimeLike = Union["RationalTime", Fraction, int, str]


@dataclass(frozen=True)
class RationalTime:
    """an exact time in [0, 1]"""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator < 1 or not 0 <= self.numerator <= self.denominator:
            raise DomainError(
                Messages.get("DOMAIN", "t_range", t=f"{self.numerator}/{self.denominator}")
            )

    @classmethod
    def of(cls, value: TimeLike) -> "RationalTime":
        """
        build an exact time from a fraction, an integer or a decimal string

        floats are refused here; use from_float to snap them to a grid.
        """
        if isinstance(value, RationalTime):
            return value
        if isinstance(value, float):
            raise DomainError("floating times must be snapped with RationalTime.from_float")
        frac = Fraction(value)
        if not 0 <= frac <= 1:
            raise DomainError(Messages.get("DOMAIN", "t_range", t=value))
        return cls(frac.numerator, frac.denominator)

    @classmethod
    def from_float(cls, t: float, modulus: PrimePowerModulus, grid_factor: int = 1) -> "RationalTime":
        """snap t to the nearest multiple of 1/((phi - 1) * grid_factor)"""
        if not 0.0 <= t <= 1.0:
            raise DomainError(Messages.get("DOMAIN", "t_range", t=t))
        denominator = (modulus.phi - 1) * grid_factor
        return cls.of(Fraction(round(t * denominator), denominator))

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def ceil_times(t: RationalTime, factor: int) -> int:
    """exact ceiling of factor * t"""
    return -(-(factor * t.numerator) // t.denominator)


@dataclass(frozen=True)
class PathFunction:
    """knots z_1..z_phi and slopes alpha_j = (phi - 1)(z_{j+1} - z_j)"""

    series: PartialSumSeries
    slopes: np.ndarray

    @property
    def knots(self) -> np.ndarray:
        return self.series.values

    @property
    def modulus(self) -> PrimePowerModulus:
        return self.series.modulus

    def knot_rows(self) -> List[Tuple[int, Fraction, float, float]]:
        """(j, t_j, re z_j, im z_j) with t_j = (j - 1)/(phi - 1)"""
        steps = self.modulus.phi - 1
        return [
            (j, Fraction(j - 1, steps), float(z.real), float(z.imag))
            for j, z in enumerate(self.knots, start=1)
        ]


def index_map(j: int, modulus: PrimePowerModulus) -> int:
    """
    the j-th element of the unit index set, j + floor((j - 1)/(p - 1))

    raises:
        DomainError: if j lies outside [1, phi]
    """
    if not 1 <= j <= modulus.phi:
        raise DomainError(Messages.get("DOMAIN", "index", j=j, phi=modulus.phi))
    return j + (j - 1) // (modulus.p - 1)


def build_path(a: UnitResidue, b: UnitResidue, modulus: PrimePowerModulus) -> PathFunction:
    """construct the parametrized kloosterman path of (a, b)"""
    return path_from_series(partial_sums(a, b, modulus))


def path_from_series(series: PartialSumSeries) -> PathFunction:
    """attach slopes to an already computed partial-sum series"""
    steps = series.modulus.phi - 1
    slopes = steps * np.diff(series.values)
    slopes.setflags(write=False)
    return PathFunction(series=series, slopes=slopes)


def segment(t: RationalTime, modulus: PrimePowerModulus) -> Tuple[int, float]:
    """
    locate t on the path

    returns:
        (j, lam) with j = ceil((phi - 1) t) and lam = (phi - 1) t - (j - 1) in (0, 1];
        t = 0 maps to (1, 0.0), the first knot
    """
    steps = modulus.phi - 1
    if t.numerator == 0:
        return 1, 0.0
    j = ceil_times(t, steps)
    lam = Fraction(steps * t.numerator, t.denominator) - (j - 1)
    return j, float(lam)


def path_eval(t: TimeLike, path: PathFunction) -> complex:
    """
    value of the path at time t

    alpha_j (t - (j - 1)/(phi - 1)) + z_j, written as z_j + (z_{j+1} - z_j) lam so
    that knots are reproduced to rounding; t = 0 gives z_1.
    """
    t = RationalTime.of(t)
    j, lam = segment(t, path.modulus)
    z = path.knots
    if lam == 0.0:
        return complex(z[j - 1])
    return complex(z[j - 1] + (z[j] - z[j - 1]) * lam)


def evaluate_paths(table: np.ndarray, times: Sequence[RationalTime], modulus: PrimePowerModulus) -> np.ndarray:
    """
    path values for a table of partial sums

    args:
        table: complex array (rows, phi) of prefix sums, one row per unit a
        times: exact times
        modulus: prime power modulus

    returns:
        complex array (rows, len(times))
    """
    located = [segment(t, modulus) for t in times]
    left = np.array([j - 1 for j, _ in located], dtype=np.int64)
    right = np.minimum(left + 1, modulus.phi - 1)
    lam = np.array([lam for _, lam in located])
    z_left = table[:, left]
    return z_left + (table[:, right] - z_left) * lam


def step_count(t: RationalTime, modulus: PrimePowerModulus) -> int:
    """
    number of units x <= floor(x_k(t)), with k = ceil(p^(n-1) t) and
    x_k(t) = phi t + k - 1; zero at t = 0
    """
    if t.numerator == 0:
        return 0
    k = ceil_times(t, modulus.blocks)
    upper = (modulus.phi * t.numerator) // t.denominator + k - 1
    return unit_position(upper, modulus.p) if upper > 0 else 0


def step_upper(t: RationalTime, modulus: PrimePowerModulus) -> Fraction:
    """the exact endpoint x_k(t) of the step set, 0 at t = 0"""
    if t.numerator == 0:
        return Fraction(0)
    k = ceil_times(t, modulus.blocks)
    return modulus.phi * t.value + k - 1


def _require_positive_time(t: RationalTime, allow_zero: bool) -> None:
    if t.numerator == 0 and not allow_zero:
        raise DomainError(Messages.get("DOMAIN", "t_zero"))


def step_from_series(t: TimeLike, series: PartialSumSeries, allow_zero: bool = False) -> complex:
    """step approximation read off a precomputed partial-sum series"""
    t = RationalTime.of(t)
    _require_positive_time(t, allow_zero)
    count = step_count(t, series.modulus)
    return complex(series.values[count - 1]) if count else 0j


def step_approx(
    t: TimeLike,
    a: UnitResidue,
    b: UnitResidue,
    modulus: PrimePowerModulus,
    allow_zero: bool = False
) -> complex:
    """
    the step approximation p^(-n/2) sum of e_q(a x + b xbar) over units x <= x_k(t)

    raises:
        DomainError: at t = 0 unless allow_zero is set (then 0 is returned)
    """
    t = RationalTime.of(t)
    _require_positive_time(t, allow_zero)
    if t.numerator == 0:
        return 0j
    return step_from_series(t, partial_sums(a, b, modulus))


def evaluate_steps(table: np.ndarray, times: Sequence[RationalTime], modulus: PrimePowerModulus) -> np.ndarray:
    """step approximations for a table of partial sums, t = 0 giving 0"""
    counts = np.array([step_count(t, modulus) for t in times], dtype=np.int64)
    padded = np.concatenate([np.zeros((table.shape[0], 1), dtype=table.dtype), table], axis=1)
    return padded[:, counts]


def _power_sum(h: int, count: int, modulus: PrimePowerModulus) -> complex:
    """sum of e_q(h x) for 1 <= x <= count, in closed form"""
    if count <= 0:
        return 0j
    if h % modulus.q == 0:
        return complex(count)
    ratio = e_q(h, modulus)
    return ratio * (1 - e_q(h * count, modulus)) / (1 - ratio)


def fourier_coeff(
    h: int,
    t: TimeLike,
    modulus: PrimePowerModulus,
    convention: FourierConvention = FourierConvention.ALL_X
) -> complex:
    """
    discrete fourier coefficient alpha(h; t) of the step set at time t

    p^(-n/2) sum of e_q(h x) over 1 <= x <= x_k(t); the coprime convention drops
    the multiples of p.
    """
    t = RationalTime.of(t)
    _require_positive_time(t, allow_zero=False)
    upper = math.floor(step_upper(t, modulus))
    total = _power_sum(h, upper, modulus)
    if convention == FourierConvention.COPRIME_X:
        total -= _power_sum(h * modulus.p, upper // modulus.p, modulus)
    return total / modulus.sqrt_q


def _power_sums(h: np.ndarray, count: int, modulus: PrimePowerModulus) -> np.ndarray:
    """vectorised _power_sum over an array of frequencies h"""
    q = modulus.q
    if count <= 0:
        return np.zeros(len(h), dtype=np.complex128)
    roots = root_table(modulus)
    residues = h % q
    result = np.full(len(h), complex(count), dtype=np.complex128)
    nonzero = residues != 0
    ratio = roots[residues[nonzero]]
    result[nonzero] = ratio * (1 - roots[residues[nonzero] * count % q]) / (1 - ratio)
    return result


def fourier_coeffs(
    t: RationalTime,
    modulus: PrimePowerModulus,
    convention: FourierConvention = FourierConvention.ALL_X
) -> np.ndarray:
    """
    alpha(h; t) for every h in [-(q-1)/2, (q-1)/2]

    t = 0 yields the zero vector (empty step set).
    """
    q = modulus.q
    h = np.arange(-(q - 1) // 2, (q - 1) // 2 + 1, dtype=np.int64)
    upper = 0 if t.numerator == 0 else math.floor(step_upper(t, modulus))
    coeffs = _power_sums(h, upper, modulus)
    if convention == FourierConvention.COPRIME_X:
        coeffs -= _power_sums(h * modulus.p, upper // modulus.p, modulus)
    return coeffs / modulus.sqrt_q


@dataclass(frozen=True)
class IntegerInterval:
    """the half-open interval (lower, upper] and the number of integers in it"""

    lower: Fraction
    upper: Fraction
    cardinality: int

    def length_bound(self, s: RationalTime, t: RationalTime, modulus: PrimePowerModulus) -> float:
        """8 (phi - 1)(t - s)"""
        return float(INTERVAL_LENGTH_CONSTANT * (modulus.phi - 1) * (t.value - s.value))


def interval_between(s: TimeLike, t: TimeLike, modulus: PrimePowerModulus) -> IntegerInterval:
    """
    the indices separating the step sets at s and t

    (x(s), x(t)] with x(u) = phi u + ceil(p^(n-1) u) - 1; its integer points are
    exactly the x with step_approx(t) - step_approx(s) = p^(-n/2) sum over them.

    raises:
        DomainError: unless s < t
    """
    s, t = RationalTime.of(s), RationalTime.of(t)
    if not s.value < t.value:
        raise DomainError(Messages.get("DOMAIN", "order", s=s, t=t))
    lower = step_upper(s, modulus)
    upper = step_upper(t, modulus)
    cardinality = max(0, math.floor(upper) - math.floor(lower))
    return IntegerInterval(lower=lower, upper=upper, cardinality=cardinality)


def step_difference_bound(s: TimeLike, t: TimeLike, modulus: PrimePowerModulus) -> float:
    """trivial bound |I_{s,t}| / p^(n/2) on |step_approx(t) - step_approx(s)|"""
    return interval_between(s, t, modulus).cardinality / modulus.sqrt_q
