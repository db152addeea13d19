"""full and partial normalized kloosterman sums"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy import legendre_symbol
from sympy.ntheory import sqrt_mod

from klpath.domain.constants import REALNESS_TOL, SUM_BLOCK
from klpath.domain.enums import SumMethod
from klpath.domain.errors import ConsistencyError, DomainError
from klpath.domain.messages import Messages
from klpath.services.modarith import (
    PrimePowerModulus,
    UnitResidue,
    e_q,
    inverse_table,
    root_table,
    unit_table,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartialSumSeries:
    """the phi normalized prefix sums Kl_{j;q}(a, b) for j running over the units"""

    a: UnitResidue
    b: UnitResidue
    modulus: PrimePowerModulus
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @property
    def total(self) -> complex:
        """the last prefix, i.e. the complete normalized sum"""
        return complex(self.values[-1])


@dataclass(frozen=True)
class PartialSumTable:
    """partial sums for many a at a few prefixes: values[i, k] belongs to (units[i], prefixes[k])"""

    b: UnitResidue
    modulus: PrimePowerModulus
    units: np.ndarray
    prefixes: tuple
    values: np.ndarray

    def get(self, a: int, j: int) -> complex:
        """look up the entry for unit a and prefix j"""
        row = int(np.searchsorted(self.units, a % self.modulus.q))
        col = self.prefixes.index(j)
        return complex(self.values[row, col])


def blocked_cumsum(terms: np.ndarray) -> np.ndarray:
    """
    prefix sums along the last axis in a fixed two-level order

    inside blocks of SUM_BLOCK entries the prefixes come from a pairwise
    (tree) scan: log2(SUM_BLOCK) rounds, each adding the partial sum 2^k
    places back. block totals are then carried sequentially on top, so the
    rounding of every prefix is independent of how callers split work
    across workers.
    """
    length = terms.shape[-1]
    n_blocks = -(-length // SUM_BLOCK)
    padded_len = n_blocks * SUM_BLOCK

    lead = terms.shape[:-1]
    padded = np.zeros(lead + (padded_len,), dtype=terms.dtype)
    padded[..., :length] = terms

    within = padded.reshape(lead + (n_blocks, SUM_BLOCK))
    shift = 1
    while shift < SUM_BLOCK:
        within[..., shift:] = within[..., shift:] + within[..., :-shift]
        shift *= 2
    totals = within[..., -1]
    offsets = np.cumsum(totals, axis=-1) - totals
    prefix = within + offsets[..., np.newaxis]
    return prefix.reshape(lead + (padded_len,))[..., :length]


def _check_modulus(modulus: PrimePowerModulus, *residues: UnitResidue) -> None:
    """residues must live modulo the same q"""
    for residue in residues:
        if residue.modulus != modulus:
            raise DomainError(
                f"residue {residue.value} belongs to modulus {residue.modulus}, not {modulus}"
            )


def term_table(a_values: np.ndarray, b: int, modulus: PrimePowerModulus) -> np.ndarray:
    """
    unnormalized terms e_q(a x + b xbar) for each a (rows) and unit x (columns)

    args:
        a_values: one-dimensional array of units a
        b: unit b
        modulus: prime power modulus

    returns:
        complex array of shape (len(a_values), phi)
    """
    q = modulus.q
    units = unit_table(modulus)
    inverses = inverse_table(modulus)
    roots = root_table(modulus)

    b_part = (int(b) % q) * inverses[units] % q
    a_col = np.asarray(a_values, dtype=np.int64).reshape(-1, 1) % q
    phases = (a_col * units + b_part) % q
    return roots[phases]


def partial_sum_table(a_values: np.ndarray, b: int, modulus: PrimePowerModulus) -> np.ndarray:
    """normalized prefix sums for several a at once, shape (len(a_values), phi)"""
    terms = term_table(a_values, b, modulus)
    return blocked_cumsum(terms) / modulus.sqrt_q


def partial_sums(a: UnitResidue, b: UnitResidue, modulus: PrimePowerModulus) -> PartialSumSeries:
    """
    the phi normalized prefix sums of the kloosterman sum S(a, b; q)

    args:
        a: unit a
        b: unit b
        modulus: prime power modulus

    returns:
        PartialSumSeries whose i-th value is Kl_{j_i;q}(a, b) for the i-th unit j_i
    """
    _check_modulus(modulus, a, b)
    values = partial_sum_table(np.array([a.value]), b.value, modulus)[0]
    values.setflags(write=False)
    return PartialSumSeries(a=a, b=b, modulus=modulus, values=values)


def full_sum(a: UnitResidue, b: UnitResidue, modulus: PrimePowerModulus) -> float:
    """
    the normalized kloosterman sum Kl_q(a, b), a real number of modulus < 2

    raises:
        ConsistencyError: if the accumulated imaginary part is not negligible
    """
    _check_modulus(modulus, a, b)
    terms = term_table(np.array([a.value]), b.value, modulus)
    total = complex(blocked_cumsum(terms)[0, -1])

    tolerance = REALNESS_TOL * np.sqrt(modulus.phi)
    if abs(total.imag) > tolerance:
        raise ConsistencyError(
            Messages.get("CHECK", "not_real", imag=total.imag, tol=tolerance, a=a.value, b=b.value)
        )
    return total.real / modulus.sqrt_q


def unit_position(j: int, p: int) -> int:
    """1-based position of the unit j among the units, i.e. j - floor(j/p)"""
    return j - j // p


def _validate_prefixes(prefix_indices: Iterable[int], modulus: PrimePowerModulus) -> tuple:
    prefixes = tuple(int(j) for j in prefix_indices)
    for j in prefixes:
        if not 1 <= j < modulus.q or j % modulus.p == 0:
            raise DomainError(Messages.get("DOMAIN", "prefix", j=j, q=modulus.q))
    return prefixes


def bulk_partial_sums(
    b: UnitResidue,
    modulus: PrimePowerModulus,
    prefix_indices: Sequence[int],
    a_values: Optional[np.ndarray] = None,
    method: SumMethod = SumMethod.DIRECT,
    chunk_size: int = 256
) -> PartialSumTable:
    """
    partial sums Kl_{j;q}(a, b) for every requested unit a and prefix j

    args:
        b: unit b
        modulus: prime power modulus
        prefix_indices: prefixes j, each coprime to p
        a_values: units a to tabulate, all units when omitted
        method: direct per-a summation, or one length-q fft per prefix
        chunk_size: rows evaluated together by the direct method

    returns:
        PartialSumTable with one row per unit and one column per prefix

    raises:
        DomainError: if a prefix is not an element of the unit index set
    """
    _check_modulus(modulus, b)
    prefixes = _validate_prefixes(prefix_indices, modulus)
    units = unit_table(modulus) if a_values is None else np.sort(np.asarray(a_values, dtype=np.int64))
    columns = np.array([unit_position(j, modulus.p) - 1 for j in prefixes], dtype=np.int64)

    if method == SumMethod.FFT:
        values = _fft_partial_sums(b.value, modulus, prefixes, units)
    else:
        values = np.empty((len(units), len(prefixes)), dtype=np.complex128)
        for start in range(0, len(units), chunk_size):
            rows = partial_sum_table(units[start:start + chunk_size], b.value, modulus)
            values[start:start + chunk_size] = rows[:, columns]

    logger.debug(
        f"tabulated {len(units)} units x {len(prefixes)} prefixes for q = {modulus.q} ({method.value})"
    )
    return PartialSumTable(b=b, modulus=modulus, units=units, prefixes=prefixes, values=values)


def _fft_partial_sums(
    b: int,
    modulus: PrimePowerModulus,
    prefixes: tuple,
    units: np.ndarray
) -> np.ndarray:
    """one inverse fft per prefix: q * ifft(v)[a] = sum_x v[x] e_q(a x)"""
    q = modulus.q
    all_units = unit_table(modulus)
    inverses = inverse_table(modulus)
    roots = root_table(modulus)
    b_terms = roots[(b % q) * inverses[all_units] % q]

    values = np.empty((len(units), len(prefixes)), dtype=np.complex128)
    for col, j in enumerate(prefixes):
        v = np.zeros(q, dtype=np.complex128)
        mask = all_units <= j
        v[all_units[mask]] = b_terms[mask]
        spectrum = np.fft.ifft(v) * q
        values[:, col] = spectrum[units] / modulus.sqrt_q
    return values


def closed_form_sum(a: UnitResidue, b: UnitResidue, modulus: PrimePowerModulus) -> float:
    """
    explicit evaluation of Kl_q(a, b) for n >= 2, used only as a cross-check

    Kl = sum over y^2 = ab (mod q) of (y/p)^n eps_q e_q(2y), where eps_q is 1
    for q = 1 mod 4 and i otherwise; the sum is empty (zero) when ab is not a
    square modulo p.
    """
    _check_modulus(modulus, a, b)
    if modulus.n < 2:
        raise DomainError("the closed form applies to n >= 2 only")

    q, p = modulus.q, modulus.p
    c = a.value * b.value % q
    if int(legendre_symbol(c % p, p)) != 1:
        return 0.0

    eps = 1 if q % 4 == 1 else 1j
    total = 0j
    for y in sorted(sqrt_mod(c, q, all_roots=True)):
        y = int(y)
        total += int(legendre_symbol(y % p, p)) ** modulus.n * eps * e_q(2 * y, modulus)
    return float(total.real)
