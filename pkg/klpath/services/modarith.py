"""exact arithmetic modulo odd prime powers"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np
from sympy import isprime

from klpath.domain.constants import MAX_MODULUS, MAX_TABLE_MODULUS
from klpath.domain.errors import DomainError, InvalidModulusError, NotAUnitError
from klpath.domain.messages import Messages

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimePowerModulus:
    """the modulus q = p^n for an odd prime p, with phi(q) = p^(n-1)(p-1)"""

    p: int
    n: int
    q: int = field(init=False)
    phi: int = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidModulusError(Messages.get("MODULUS", "bad_exponent", n=self.n))
        if self.p == 2:
            raise InvalidModulusError(Messages.get("MODULUS", "even_prime"))
        if self.p < 2 or not isprime(self.p):
            raise InvalidModulusError(Messages.get("MODULUS", "not_prime", p=self.p))

        q = self.p ** self.n
        if q > MAX_MODULUS:
            raise InvalidModulusError(Messages.get("MODULUS", "too_large", p=self.p, n=self.n))

        object.__setattr__(self, "q", q)
        object.__setattr__(self, "phi", self.p ** (self.n - 1) * (self.p - 1))

    @property
    def sqrt_q(self) -> float:
        """p^(n/2) as a float"""
        return math.sqrt(self.q)

    @property
    def blocks(self) -> int:
        """number p^(n-1) of blocks of p - 1 consecutive units"""
        return self.q // self.p

    def unit(self, value: int) -> "UnitResidue":
        """reduce value modulo q and wrap it as a unit"""
        return UnitResidue(value % self.q, self)

    def is_unit(self, value: int) -> bool:
        """true when p does not divide value"""
        return value % self.p != 0

    def require_tables(self) -> None:
        """
        ensure residue tables can be built for this modulus

        raises:
            DomainError: if q exceeds the tabulation limit
        """
        if self.q > MAX_TABLE_MODULUS:
            raise DomainError(
                Messages.get("MODULUS", "table_limit", q=self.q, limit=MAX_TABLE_MODULUS)
            )

    def __str__(self) -> str:
        return f"{self.p}^{self.n}"


@dataclass(frozen=True)
class UnitResidue:
    """an element of (Z/qZ)^x represented by its least positive residue"""

    value: int
    modulus: PrimePowerModulus

    def __post_init__(self) -> None:
        q = self.modulus.q
        if not 1 <= self.value < q or self.value % self.modulus.p == 0:
            raise NotAUnitError(
                Messages.get("MODULUS", "not_unit", value=self.value, q=q, p=self.modulus.p)
            )

    def __int__(self) -> int:
        return self.value


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """
    extended euclid on integers

    returns:
        (g, s, t) with g = gcd(a, b) = s*a + t*b and g >= 0
    """
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1

    while r != 0:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
        old_t, t = t, old_t - quotient * t

    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def inv_mod(x: UnitResidue) -> UnitResidue:
    """
    inverse of a unit modulo q

    args:
        x: unit residue

    returns:
        the unit y in [1, q - 1] with x*y = 1 mod q

    raises:
        NotAUnitError: if p divides x
    """
    modulus = x.modulus
    g, s, _ = extended_gcd(x.value, modulus.q)
    if g != 1:
        raise NotAUnitError(
            Messages.get("MODULUS", "not_unit", value=x.value, q=modulus.q, p=modulus.p)
        )
    return UnitResidue(s % modulus.q, modulus)


def e_q(x: int, modulus: PrimePowerModulus) -> complex:
    """
    the additive character exp(2 pi i x / q)

    the argument is reduced modulo q in integer arithmetic first, so the
    float angle never carries the magnitude of x.
    """
    r = int(x) % modulus.q
    if r == 0:
        return 1 + 0j
    return cmath.exp(2j * math.pi * r / modulus.q)


def units_iter(modulus: PrimePowerModulus) -> Iterator[UnitResidue]:
    """yield the units 1 <= x < q in increasing order"""
    p = modulus.p
    for block in range(modulus.blocks):
        base = block * p
        for offset in range(1, p):
            yield UnitResidue(base + offset, modulus)


@lru_cache(maxsize=16)
def unit_table(modulus: PrimePowerModulus) -> np.ndarray:
    """int64 array of the phi units of Z/qZ in increasing order"""
    modulus.require_tables()
    x = np.arange(1, modulus.q, dtype=np.int64)
    table = x[x % modulus.p != 0]
    table.setflags(write=False)
    return table


@lru_cache(maxsize=16)
def inverse_table(modulus: PrimePowerModulus) -> np.ndarray:
    """
    length-q int64 array with table[x] = inverse of x for units, 0 elsewhere

    built once per modulus by vectorised exponentiation x^(phi - 1); the
    values coincide with inv_mod since the inverse is unique.
    """
    modulus.require_tables()
    q = modulus.q
    units = unit_table(modulus)

    result = np.ones_like(units)
    base = units.copy()
    exponent = modulus.phi - 1
    while exponent:
        if exponent & 1:
            result = (result * base) % q
        base = (base * base) % q
        exponent >>= 1

    table = np.zeros(q, dtype=np.int64)
    table[units] = result
    table.setflags(write=False)
    logger.debug(f"built inverse table for q = {q}")
    return table


@lru_cache(maxsize=16)
def root_table(modulus: PrimePowerModulus) -> np.ndarray:
    """length-q complex array with table[r] = e_q(r)"""
    modulus.require_tables()
    r = np.arange(modulus.q, dtype=np.float64)
    table = np.exp(2j * np.pi * r / modulus.q)
    table.setflags(write=False)
    return table
