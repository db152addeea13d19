"""korolev's short kloosterman sum bound and its corollaries"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from klpath.domain.constants import GAMMA1, GAMMA2, KOROLEV_P_POWER, MIN_KOROLEV_EXPONENT
from klpath.domain.errors import DomainError, HypothesisViolation
from klpath.domain.messages import Messages
from klpath.models.reports import BoundsRow, ShortSumReport
from klpath.services.modarith import PrimePowerModulus, UnitResidue, inverse_table, root_table, unit_table
from klpath.utils.parallel import run_ordered

logger = logging.getLogger(__name__)

PRECISION_DIGITS = 50


@dataclass(frozen=True)
class KorolevConstants:
    """gamma1 = 900 and gamma2 = 160^-4, stored exactly"""

    gamma1: int = GAMMA1
    gamma2: Fraction = GAMMA2


KOROLEV = KorolevConstants()


@dataclass(frozen=True)
class DeltaWindow:
    """admissible delta: 0 < delta <= min(gamma2 n/16, n/2 - 15)"""

    n: int
    delta_max_exact: Fraction

    @property
    def delta_max(self) -> float:
        """the largest float not above the exact endpoint"""
        value = float(self.delta_max_exact)
        if Fraction(value) > self.delta_max_exact:
            value = math.nextafter(value, 0.0)
        return value

    def contains(self, delta: float) -> bool:
        return 0 < Fraction(delta) <= self.delta_max_exact


def _exponent(modulus: Union[PrimePowerModulus, int]) -> int:
    return modulus.n if isinstance(modulus, PrimePowerModulus) else int(modulus)


def _log(value) -> mpmath.mpf:
    return mpmath.log(mpmath.mpf(value))


def korolev_condition(N: int, modulus: PrimePowerModulus) -> bool:
    """
    true iff max(p^15, exp(gamma1 (log q)^(2/3))) <= N <= p^(n/2)

    the polynomial comparisons are exact integer comparisons; the exponential
    one compares log N with gamma1 (log q)^(2/3) in 50-digit arithmetic.
    """
    if N < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="N", value=N))
    if N < modulus.p ** KOROLEV_P_POWER:
        return False
    if N * N > modulus.q:
        return False
    with mpmath.workdps(PRECISION_DIGITS):
        return bool(_log(N) >= KOROLEV.gamma1 * _log(modulus.q) ** (mpmath.mpf(2) / 3))


def _decay(N: int, modulus: PrimePowerModulus) -> mpmath.mpf:
    """exp(-gamma2 (log N)^3 / (log q)^2)"""
    gamma2 = mpmath.mpf(KOROLEV.gamma2.numerator) / KOROLEV.gamma2.denominator
    return mpmath.exp(-gamma2 * _log(N) ** 3 / _log(modulus.q) ** 2)


def korolev_bound(N: int, modulus: PrimePowerModulus, factor4: bool = False) -> float:
    """
    N exp(-gamma2 (log N)^3 / (log q)^2), times 4 in the n >= 31 form

    raises:
        HypothesisViolation: factor4 requested with n < 31
    """
    if N < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="N", value=N))
    if factor4 and modulus.n < MIN_KOROLEV_EXPONENT:
        raise HypothesisViolation(Messages.get("HYPOTHESIS", "factor4", n=modulus.n))
    prefactor = 4 if factor4 else 1
    with mpmath.workdps(PRECISION_DIGITS):
        return float(prefactor * N * _decay(N, modulus))


def delta_admissible(modulus: Union[PrimePowerModulus, int]) -> DeltaWindow:
    """
    the delta window min(gamma2 n/16, n/2 - 15)

    only the exponent n matters, so a bare n is accepted as well (exponents
    of interest quickly exceed the 64-bit moduli).

    raises:
        HypothesisViolation: when n <= 30 and the window is empty
    """
    n = _exponent(modulus)
    if n < MIN_KOROLEV_EXPONENT:
        raise HypothesisViolation(Messages.get("HYPOTHESIS", "delta_window", n=n))
    delta_max = min(KOROLEV.gamma2 * n / 16, Fraction(n, 2) - KOROLEV_P_POWER)
    return DeltaWindow(n=n, delta_max_exact=delta_max)


def exponent_chain_check(delta: float, modulus: Union[PrimePowerModulus, int]) -> bool:
    """
    true iff delta/n <= gamma2/8 - delta/n <= gamma2 ((n/2 - delta)/n)^3

    delta is converted to the exact rational it represents, so the chain is
    decided without rounding.
    """
    d = Fraction(delta)
    if d <= 0:
        raise DomainError(Messages.get("DOMAIN", "positive", name="delta", value=delta))
    n = _exponent(modulus)
    left = d / n
    middle = KOROLEV.gamma2 / 8 - d / n
    right = KOROLEV.gamma2 * ((Fraction(n, 2) - d) / n) ** 3
    return left <= middle <= right


def _require_delta(delta: float, modulus: PrimePowerModulus) -> Fraction:
    window = delta_admissible(modulus)
    if not window.contains(delta):
        raise HypothesisViolation(
            Messages.get("HYPOTHESIS", "delta_range", delta=delta, delta_max=window.delta_max)
        )
    return Fraction(delta)


def korolev_interval_bound(N: int, modulus: PrimePowerModulus, delta: float) -> float:
    """
    bound on |p^(-n/2) sum over an interval of length N| for p^(n/2-delta) <= N

    4 (1/q)^(gamma2 ((n/2-delta)/n)^3) while N <= p^(n/2); beyond that the sum
    of the full blocks, the remainder and the trivial piece,
    (1/q)^(gamma2/8 - delta/n) + 4 (1/q)^(gamma2 ((n/2-delta)/n)^3) + (1/q)^(delta/n).

    raises:
        HypothesisViolation: n <= 30, delta outside the window, or N too short
    """
    d = _require_delta(delta, modulus)
    n = modulus.n
    half = Fraction(n, 2)

    def as_mpf(value: Fraction) -> mpmath.mpf:
        return mpmath.mpf(value.numerator) / value.denominator

    with mpmath.workdps(PRECISION_DIGITS):
        log_q = _log(modulus.q)
        if _log(N) < as_mpf(half - d) * _log(modulus.p):
            raise HypothesisViolation(Messages.get("HYPOTHESIS", "interval_length", N=N))

        def q_power(exponent: Fraction) -> mpmath.mpf:
            return mpmath.exp(-as_mpf(exponent) * log_q)

        short_term = 4 * q_power(KOROLEV.gamma2 * ((half - d) / n) ** 3)
        if N * N <= modulus.q:
            return float(short_term)
        return float(q_power(KOROLEV.gamma2 / 8 - d / n) + short_term + q_power(d / n))


def decompose_interval(c: int, N: int, modulus: PrimePowerModulus) -> List[Tuple[int, int]]:
    """
    split (c, c + N] into blocks of length floor(p^(n/2)) plus a remainder

    returns:
        list of (start, length) with blocks (start, start + length]
    """
    if N < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="N", value=N))
    block = math.isqrt(modulus.q)
    k = -(-N // block)
    pieces = [(c + (ell - 1) * block, block) for ell in range(1, k)]
    pieces.append((c + (k - 1) * block, N - (k - 1) * block))
    return pieces


def bounds_table(modulus: PrimePowerModulus, lengths: Sequence[int], factor4: bool = False) -> List[BoundsRow]:
    """rows (N, condition, bound, bound/N, trivial, sqrt N) for the bounds command"""
    rows = []
    for N in lengths:
        bound = korolev_bound(N, modulus, factor4=factor4)
        rows.append(
            BoundsRow(
                N=N,
                condition=korolev_condition(N, modulus),
                bound=bound,
                bound_over_N=bound / N,
                trivial=N,
                sqrt_N=math.sqrt(N),
            )
        )
    return rows


def short_sums(
    a_values: np.ndarray,
    b: int,
    modulus: PrimePowerModulus,
    c: int,
    N: int
) -> np.ndarray:
    """
    |sum of e_q(a x + b xbar) over c < x <= c + N, p not dividing x| for each a

    x is reduced modulo q, so intervals may wrap past q.
    """
    q = modulus.q
    x = np.arange(c + 1, c + N + 1, dtype=np.int64)
    x = x[x % modulus.p != 0] % q
    if len(x) == 0:
        return np.zeros(len(a_values))
    inverses = inverse_table(modulus)
    roots = root_table(modulus)
    b_part = (b % q) * inverses[x] % q
    a_col = np.asarray(a_values, dtype=np.int64).reshape(-1, 1) % q
    terms = roots[(a_col * x + b_part) % q]
    return np.abs(terms.sum(axis=1))


def short_sum_scan(
    b: UnitResidue,
    modulus: PrimePowerModulus,
    N: int,
    starts: Sequence[int],
    a_sample: Optional[int] = None,
    seed: int = 0,
    chunk_size: int = 256,
    threads: Optional[int] = None
) -> ShortSumReport:
    """
    empirical maxima of short kloosterman sums of length N

    args:
        b: unit b
        modulus: prime power modulus
        N: interval length
        starts: interval starts c, each interval being (c, c + N]
        a_sample: number of units a to draw (all units when omitted)
        seed: seed for the unit sample
        chunk_size: units evaluated together
        threads: worker count, defaults to settings.threads

    returns:
        ShortSumReport with max/mean and the ratios to N, sqrt N and the korolev value
    """
    if N < 1:
        raise DomainError(Messages.get("DOMAIN", "positive", name="N", value=N))
    units = unit_table(modulus)
    if a_sample is not None and a_sample < len(units):
        rng = np.random.default_rng(seed)
        units = np.sort(rng.choice(units, size=a_sample, replace=False))

    tasks = [(c, start) for c in starts for start in range(0, len(units), chunk_size)]

    def work(task: Tuple[int, int]) -> Tuple[float, float, int]:
        c, start = task
        values = short_sums(units[start:start + chunk_size], b.value, modulus, c, N)
        return float(values.max()), float(values.sum()), len(values)

    maxima, totals, count = 0.0, 0.0, 0
    for chunk_max, chunk_sum, chunk_count in run_ordered(work, tasks, threads=threads):
        maxima = max(maxima, chunk_max)
        totals += chunk_sum
        count += chunk_count

    korolev = korolev_bound(N, modulus)
    logger.info(f"short sums of length {N} mod {modulus}: max {maxima:.6g} over {count} sums")
    return ShortSumReport(
        p=modulus.p,
        n=modulus.n,
        b=b.value,
        N=N,
        starts=len(starts),
        units=len(units),
        max_abs=maxima,
        mean_abs=totals / count if count else 0.0,
        ratio_trivial=maxima / N,
        ratio_sqrt=maxima / math.sqrt(N),
        korolev_value=korolev,
        ratio_korolev=maxima / korolev,
        korolev_condition=korolev_condition(N, modulus),
    )
