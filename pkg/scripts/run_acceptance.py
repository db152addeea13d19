"""run the acceptance experiments and print one verdict per check"""
import argparse
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from klpath.domain.config import settings
from klpath.domain.constants import ZERO_MASS_TOL
from klpath.domain.logging_config import setup_logging
from klpath.services.bounds import delta_admissible, exponent_chain_check
from klpath.services.kloosterman import full_sum
from klpath.services.limitlaw import MuSampler, sigma_squared
from klpath.services.modarith import PrimePowerModulus, inverse_table, root_table, unit_table, units_iter
from klpath.services.path import RationalTime
from klpath.services.verify import compare_laws, ks_noise, pair_moments, small_gap_bound, tightness_scan

logger = logging.getLogger("acceptance")


def all_pairs(m: PrimePowerModulus) -> np.ndarray:
    """Kl(a, b) for every pair of units as one matrix product"""
    units = unit_table(m)
    inverses = inverse_table(m)[units]
    roots = root_table(m)
    left = roots[np.outer(units, units) % m.q]
    right = roots[np.outer(units, inverses) % m.q]
    return (left @ right.T) / m.sqrt_q


def check_boundedness() -> bool:
    """|Kl| <= 2, Kl real and Kl(a, b) = Kl(b, a) over all unit pairs, p <= 13, n in {2, 3}"""
    for p in (3, 5, 7, 11, 13):
        for n in (2, 3):
            m = PrimePowerModulus(p, n)
            table = all_pairs(m)
            if np.abs(table).max() > 2 + 1e-9:
                return False
            if np.abs(table.imag).max() * m.sqrt_q > 1e-9 * np.sqrt(m.phi):
                return False
            if np.abs(table - table.T).max() > 1e-9:
                return False
            row = [full_sum(a, m.unit(1), m) for a in units_iter(m)]
            if np.abs(table[:, 0].real - row).max() > 1e-9:
                return False
    return True


def check_zero_mass() -> bool:
    """half of the units a give Kl(a, 1) = 0 for n = 2"""
    for p in (3, 5, 7, 11):
        m = PrimePowerModulus(p, 2)
        zeros = sum(1 for a in units_iter(m) if abs(full_sum(a, m.unit(1), m)) < ZERO_MASS_TOL)
        if Fraction(zeros, m.phi) != Fraction(1, 2):
            return False
    return True


def check_plancherel() -> bool:
    """both evaluations of sigma^2 agree on random pairs, p = 7, n = 2"""
    m = PrimePowerModulus(7, 2)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        s, t = sorted(Fraction(int(k), 10 ** 6) for k in rng.integers(0, 10 ** 6 + 1, size=2))
        if s == t:
            continue
        coefficient_sum, plancherel = sigma_squared(s, t, m)
        # both sides carry the 4/q factor
        if abs(coefficient_sum - plancherel) * m.q / 4 > 1e-8 * m.q:
            return False
    return True


def check_small_gaps() -> bool:
    """M_alpha(s, t) <= 2^alpha (t - s)^(alpha/2) when t - s <= 1/(phi - 1)"""
    rng = np.random.default_rng(1)
    for p in (5, 7, 11):
        m = PrimePowerModulus(p, 2)
        limit = 10 ** 6 // (m.phi - 1)
        pairs = []
        for _ in range(1000):
            gap = Fraction(int(rng.integers(1, limit + 1)), 10 ** 6)
            s = Fraction(int(rng.integers(0, int((1 - gap) * 10 ** 6) + 1)), 10 ** 6)
            pairs.append((s, s + gap))
        exact = [(RationalTime.of(s), RationalTime.of(t)) for s, t in pairs]
        for alpha in (2, 4, 6, 8):
            values = pair_moments(exact, alpha, m.unit(1), m)
            for (s, t), value in zip(pairs, values):
                if value > small_gap_bound(float(t - s), alpha) * (1 + 1e-12):
                    return False
    return True


def check_tightness() -> bool:
    """log-log slope of M_4 at p = 101 is at least 1.2"""
    m = PrimePowerModulus(101, 2)
    low, high = 10 / m.phi, 0.1
    gaps = [low * (high / low) ** (k / 7) for k in range(8)]
    report = tightness_scan(m, m.unit(1), 4, gaps, 10, seed=0)
    logger.info(f"tightness slope {report.fitted_slope}")
    return report.fitted_slope is not None and report.fitted_slope >= 1.2


def check_law() -> bool:
    """ks distances at t = 1/2 shrink over p in {11, 31, 101} up to sampling noise and end below 0.05"""
    reports = []
    for p in (11, 31, 101):
        m = PrimePowerModulus(p, 2)
        report = compare_laws(m, m.unit(1), ["1/2"], m.q, 10 ** 4, seed=0)
        entry = report.ks[0]
        logger.info(f"p = {p}: ks re {entry.re:.4f}, ks im {entry.im:.4f}, noise {ks_noise(report):.4f}")
        reports.append(report)
    shrinking = all(
        b.ks[0].re <= a.ks[0].re + ks_noise(b) and b.ks[0].im <= a.ks[0].im + ks_noise(b)
        for a, b in zip(reports, reports[1:])
    )
    last = reports[-1].ks[0]
    return shrinking and max(last.re, last.im) <= 0.05


def check_mu_moments() -> bool:
    """E[U], E[U^2], E[U^4] within 3 standard errors of 0, 1 and 3"""
    draws = MuSampler(seed=0).draws(500_000)
    for power, expected in ((1, 0.0), (2, 1.0), (4, 3.0)):
        values = draws ** power
        stderr = values.std(ddof=1) / np.sqrt(len(values))
        if abs(values.mean() - expected) > 3 * stderr:
            return False
    return True


def check_delta_window() -> bool:
    """the exponent chain holds on a 100-point delta grid for n in {31, 40, 64, 128}"""
    for n in (31, 40, 64, 128):
        window = delta_admissible(n)
        grid = [window.delta_max_exact * k / 100 for k in range(1, 100)] + [window.delta_max]
        if not all(exponent_chain_check(delta, n) for delta in grid):
            return False
    return True


CHECKS = {
    "boundedness": check_boundedness,
    "zero-mass": check_zero_mass,
    "plancherel": check_plancherel,
    "small-gaps": check_small_gaps,
    "tightness": check_tightness,
    "law": check_law,
    "mu-moments": check_mu_moments,
    "delta-window": check_delta_window,
}


def main() -> int:
    """run the selected acceptance checks; nonzero exit when any fails."""
    parser = argparse.ArgumentParser(description="klpath acceptance experiments")
    parser.add_argument(
        "--only",
        action="append",
        choices=sorted(CHECKS),
        help="run just this check (repeatable)"
    )
    parser.add_argument(
        "--threads",
        type=int,
        help="worker threads for the exact averages"
    )
    args = parser.parse_args()
    setup_logging(settings.log_level, settings.log_file)
    if args.threads:
        settings.threads = args.threads

    failed = 0
    for name in args.only or list(CHECKS):
        started = time.perf_counter()
        passed = CHECKS[name]()
        failed += not passed
        print(f"{name:<14} {'pass' if passed else 'FAIL'}  {time.perf_counter() - started:.1f}s")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
