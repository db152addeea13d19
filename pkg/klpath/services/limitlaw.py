"""the measure mu, the random fourier series Kl(t) and its truncated surrogate"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from klpath.domain.constants import PLANCHEREL_TOL
from klpath.domain.errors import ConsistencyError, DomainError
from klpath.domain.messages import Messages
from klpath.services.modarith import PrimePowerModulus
from klpath.services.path import RationalTime, TimeLike, fourier_coeffs, interval_between

logger = logging.getLogger(__name__)

SEED_MASK = 2 ** 64 - 1
MANTISSA_SCALE = 2.0 ** -53

RealTime = Union[float, RationalTime, Fraction]


@dataclass(frozen=True)
class MuSampler:
    """
    reproducible draws U_h ~ mu = delta_0/2 + mu_0

    U_h is read off the counter-based Philox stream keyed by (seed, stream) at
    position 0 for h = 0, 2h - 1 for h > 0 and -2h for h < 0, so enlarging the
    truncation only appends draws.
    """

    seed: int
    stream: int = 0

    @property
    def key(self) -> int:
        return (self.seed & SEED_MASK) | ((self.stream & SEED_MASK) << 64)

    def raw(self, count: int) -> np.ndarray:
        """the first count 64-bit words of the keyed stream"""
        bit_generator = np.random.Philox(key=self.key)
        return bit_generator.random_raw(count)

    def draws(self, H: int) -> np.ndarray:
        """U_h for h = -H, ..., H in increasing h"""
        if H < 0:
            raise DomainError(Messages.get("DOMAIN", "positive", name="H", value=H))
        words = self.raw(2 * H + 1)
        h = np.arange(-H, H + 1)
        positions = np.where(h > 0, 2 * h - 1, -2 * h)
        return words_to_mu(words[positions])


def words_to_mu(words: np.ndarray) -> np.ndarray:
    """
    map uniform 64-bit words to mu

    the lowest bit picks the atom at 0 (probability exactly 1/2); the top 53
    bits give V uniform on (0, 1) and the value 2 cos(pi V).
    """
    words = np.asarray(words, dtype=np.uint64)
    atom = (words & np.uint64(1)) == 0
    v = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * MANTISSA_SCALE
    return np.where(atom, 0.0, 2.0 * np.cos(np.pi * v))


def sample_mu(sampler: MuSampler, h: int) -> float:
    """the single draw U_h of a sampler"""
    position = 2 * h - 1 if h > 0 else -2 * h
    word = sampler.raw(position + 1)[position:position + 1]
    return float(words_to_mu(word)[0])


@dataclass(frozen=True)
class LimitSeriesSample:
    """draws U_h for |h| <= H from one sampler, stored in increasing h"""

    H: int
    draws: np.ndarray
    sampler: MuSampler

    @classmethod
    def draw(cls, sampler: MuSampler, H: int) -> "LimitSeriesSample":
        if H < 1:
            raise DomainError(Messages.get("DOMAIN", "positive", name="H", value=H))
        draws = sampler.draws(H)
        draws.setflags(write=False)
        return cls(H=H, draws=draws, sampler=sampler)

    def u(self, h: int) -> float:
        return float(self.draws[h + self.H])


def _fractional_parts(t: RealTime, H: int) -> np.ndarray:
    """h t mod 1 for h = 1..H, exact for rational t"""
    h = np.arange(1, H + 1, dtype=np.int64)
    if isinstance(t, (RationalTime, Fraction)):
        frac = t.value if isinstance(t, RationalTime) else t
        return (h * frac.numerator % frac.denominator) / frac.denominator
    return np.mod(h * float(t), 1.0)


def series_coefficients(t: RealTime, H: int) -> tuple:
    """
    real and imaginary parts of c_h(t) = (e(ht) - 1)/(2 pi i h) for h = 1..H

    c_{-h}(t) is the conjugate of c_h(t). for rational t the half-integer
    multiples 2ht in Z are set exactly: the real part vanishes and the
    imaginary part is 0 or 1/(pi h).
    """
    frac = _fractional_parts(t, H)
    theta = 2.0 * np.pi * frac
    scale = 2.0 * np.pi * np.arange(1, H + 1)
    sine, versine = np.sin(theta), 1.0 - np.cos(theta)
    if isinstance(t, (RationalTime, Fraction)):
        whole = frac == 0.0
        half = frac == 0.5
        sine[whole | half] = 0.0
        versine[whole] = 0.0
        versine[half] = 2.0
    return sine / scale, versine / scale


def _check_time(t: RealTime) -> float:
    value = float(t)
    if not 0.0 <= value <= 1.0:
        raise DomainError(Messages.get("DOMAIN", "t_range", t=t))
    return value


def limit_series_eval(t: RealTime, sample: LimitSeriesSample) -> complex:
    """
    the truncated random fourier series t U_0 + sum_{0 < |h| <= H} c_h(t) U_h

    the h and -h terms are paired: c_h U_h + conj(c_h) U_{-h} has real part
    Re c_h (U_h + U_{-h}) and imaginary part Im c_h (U_h - U_{-h}).
    """
    t_value = _check_time(t)
    H = sample.H
    re_c, im_c = series_coefficients(t, H)
    positive = sample.draws[H + 1:]
    negative = sample.draws[H - 1::-1]
    real = t_value * sample.draws[H] + np.dot(re_c, positive + negative)
    imag = np.dot(im_c, positive - negative)
    return complex(real, imag)


def limit_series_batch(samplers: Sequence[MuSampler], times: Sequence[RealTime], H: int) -> np.ndarray:
    """
    limit_series_eval for many samplers and times

    returns:
        complex array (len(samplers), len(times))
    """
    t_values = np.array([_check_time(t) for t in times])
    coefficients = [series_coefficients(t, H) for t in times]
    re_c = np.array([c[0] for c in coefficients])
    im_c = np.array([c[1] for c in coefficients])

    draws = np.array([sampler.draws(H) for sampler in samplers]).reshape(len(samplers), 2 * H + 1)
    positive = draws[:, H + 1:]
    negative = draws[:, H - 1::-1]
    real = np.outer(draws[:, H], t_values) + np.einsum("sh,th->st", positive + negative, re_c)
    imag = np.einsum("sh,th->st", positive - negative, im_c)
    return real + 1j * imag


def _surrogate_delta(t: RationalTime, s: RationalTime, modulus: PrimePowerModulus) -> np.ndarray:
    """alpha(h; t) - alpha(h; s) for h = -(q-1)/2..(q-1)/2"""
    return fourier_coeffs(t, modulus) - fourier_coeffs(s, modulus)


def _check_truncation(H: int, modulus: PrimePowerModulus) -> None:
    expected = (modulus.q - 1) // 2
    if H != expected:
        raise DomainError(Messages.get("DOMAIN", "truncation", H=H, expected=expected))


def truncated_surrogate(
    t: TimeLike,
    s: TimeLike,
    modulus: PrimePowerModulus,
    sample: LimitSeriesSample
) -> complex:
    """
    increment between s and t of p^(-n/2) sum_{|h| <= (q-1)/2} alpha(h; .) U_h

    raises:
        DomainError: if the sample truncation is not (q - 1)/2
    """
    _check_truncation(sample.H, modulus)
    t, s = RationalTime.of(t), RationalTime.of(s)
    if t == s:
        return 0j
    delta = _surrogate_delta(t, s, modulus)
    return complex(np.dot(delta, sample.draws)) / modulus.sqrt_q


def surrogate_batch(t: TimeLike, s: TimeLike, modulus: PrimePowerModulus, samplers: Sequence[MuSampler]) -> np.ndarray:
    """truncated_surrogate for many samplers at once"""
    H = (modulus.q - 1) // 2
    t, s = RationalTime.of(t), RationalTime.of(s)
    if t == s:
        return np.zeros(len(samplers), dtype=np.complex128)
    delta = _surrogate_delta(t, s, modulus)
    draws = np.array([sampler.draws(H) for sampler in samplers])
    return np.einsum("sh,h->s", draws, delta) / modulus.sqrt_q


def sigma_squared(s: TimeLike, t: TimeLike, modulus: PrimePowerModulus) -> tuple:
    """
    sigma^2 computed twice: (4/q) sum_h |alpha(h;t) - alpha(h;s)|^2 and 4|I_{s,t}|/q

    returns:
        (coefficient_sum, plancherel_value)
    """
    s, t = RationalTime.of(s), RationalTime.of(t)
    if s == t:
        return 0.0, 0.0
    interval = interval_between(s, t, modulus)
    delta = _surrogate_delta(t, s, modulus)
    coefficient_sum = 4.0 * float(np.sum(np.abs(delta) ** 2)) / modulus.q
    plancherel = 4.0 * interval.cardinality / modulus.q
    return coefficient_sum, plancherel


def sigma_subgaussian(s: TimeLike, t: TimeLike, modulus: PrimePowerModulus) -> float:
    """
    subgaussian parameter of the surrogate increment, via the plancherel identity

    raises:
        DomainError: if s > t
        ConsistencyError: if the two evaluations of sigma^2 disagree
    """
    coefficient_sum, plancherel = sigma_squared(s, t, modulus)
    # |sum - card| <= tol * q on the unscaled sums, i.e. 4 tol after the 4/q factor
    if abs(coefficient_sum - plancherel) > 4.0 * PLANCHEREL_TOL:
        raise ConsistencyError(
            Messages.get("CHECK", "plancherel", coeff=coefficient_sum, plancherel=plancherel)
        )
    return math.sqrt(plancherel)
