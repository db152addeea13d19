"""
unit tests for the verification harness: exact moments against the
uncached oracle, the small-gap bound, tightness scans, beta, law comparison,
sup statistics and surrogate moments
"""

import math
import os
import random
import unittest
from fractions import Fraction

import numpy as np

from klpath.domain.config import settings
from klpath.domain.enums import GapWindow
from klpath.domain.errors import DomainError, HypothesisViolation
from klpath.services.bounds import delta_admissible
from klpath.services.kloosterman import full_sum
from klpath.services.modarith import PrimePowerModulus, e_q, units_iter
from klpath.services.path import RationalTime, interval_between
from klpath.services.verify import (
    beta_parameter,
    brute_force_moment,
    compare_laws,
    gap_window,
    ks_noise,
    limit_samples,
    moment,
    pair_moments,
    resolve,
    small_gap_bound,
    smallest_admissible_alpha,
    step_moment,
    sup_statistics,
    surrogate_moment,
    tightness_scan,
    window_exponent,
)

RUN_SLOW = os.environ.get("KLPATH_RUN_SLOW") == "1"


def random_pair(rng: random.Random, max_gap: Fraction = Fraction(1)) -> tuple:
    denominator = 10 ** 6
    gap = Fraction(rng.randint(1, int(max_gap * denominator)), denominator)
    start = Fraction(rng.randint(0, int((1 - gap) * denominator)), denominator)
    return RationalTime.of(start), RationalTime.of(start + gap)


def small_gap_pairs(m: PrimePowerModulus, count: int, seed: int) -> list:
    rng = random.Random(seed)
    return [random_pair(rng, Fraction(1, m.phi - 1)) for _ in range(count)]


class TestMoment(unittest.TestCase):
    """moment and its oracle"""

    def setUp(self):
        self.m = PrimePowerModulus(11, 2)
        self.b = self.m.unit(1)

    def test_equal_times(self):
        self.assertEqual(moment("1/3", "1/3", 2, self.b, self.m), 0.0)

    def test_rejects_odd_alpha(self):
        for alpha in (1, 3, 0, -2, 2.5):
            with self.assertRaises(DomainError):
                moment("1/4", "1/2", alpha, self.b, self.m)

    def test_oracle_example(self):
        fast = moment("1/4", "1/2", 2, self.b, self.m)
        slow = brute_force_moment("1/4", "1/2", 2, self.b, self.m)
        self.assertGreater(fast, 0)
        self.assertLess(abs(fast - slow), 1e-9 * slow)

    def test_oracle_random_instances(self):
        rng = random.Random(12)
        for _ in range(100):
            m = PrimePowerModulus(rng.choice([5, 7]), 2)
            b = m.unit(rng.choice([1, 2, 3]))
            s, t = random_pair(rng)
            alpha = rng.choice([2, 4, 6])
            fast = moment(s, t, alpha, b, m)
            slow = brute_force_moment(s, t, alpha, b, m)
            self.assertLessEqual(abs(fast - slow), 1e-9 * max(slow, 1e-300))

    def test_swap_invariance(self):
        s, t = RationalTime.of("1/7"), RationalTime.of("5/9")
        self.assertEqual(moment(s, t, 4, self.b, self.m), moment(t, s, 4, self.b, self.m))
        self.assertAlmostEqual(brute_force_moment(t, s, 4, self.b, self.m),
                               brute_force_moment(s, t, 4, self.b, self.m), places=12)

    def test_full_range_is_second_moment_of_full_sums(self):
        m = PrimePowerModulus(7, 2)
        b = m.unit(1)
        first = {a.value: complex(e_q(a.value + 1, m)) / m.sqrt_q for a in units_iter(m)}
        expected = sum(abs(full_sum(a, b, m) - first[a.value]) ** 2 for a in units_iter(m)) / m.phi
        self.assertAlmostEqual(moment(0, 1, 2, b, m), expected, places=12)

    def test_thread_count_does_not_change_bits(self):
        m = PrimePowerModulus(31, 2)
        b = m.unit(1)
        pairs = small_gap_pairs(m, 20, seed=1) + [(RationalTime.of("1/5"), RationalTime.of("4/5"))]
        one = pair_moments(pairs, 4, b, m, threads=1)
        four = pair_moments(pairs, 4, b, m, threads=4)
        self.assertEqual(one.tolist(), four.tolist())

    def test_refuses_large_moduli(self):
        original = settings.max_exact_modulus
        settings.max_exact_modulus = 100
        try:
            with self.assertRaises(DomainError):
                moment("1/4", "1/2", 2, self.b, self.m)
        finally:
            settings.max_exact_modulus = original


class TestSmallGapBound(unittest.TestCase):
    """M_alpha <= 2^alpha (t - s)^(alpha/2) for t - s <= 1/(phi - 1)"""

    def check(self, count: int) -> None:
        for p in (5, 7, 11):
            m = PrimePowerModulus(p, 2)
            pairs = small_gap_pairs(m, count, seed=p)
            for alpha in (2, 4, 6, 8):
                values = pair_moments(pairs, alpha, m.unit(1), m)
                for (s, t), value in zip(pairs, values):
                    bound = small_gap_bound(float(t.value - s.value), alpha)
                    self.assertLessEqual(value, bound * (1 + 1e-12), f"p={p} alpha={alpha} s={s} t={t}")

    def test_bound(self):
        self.check(100)

    @unittest.skipUnless(RUN_SLOW, "set KLPATH_RUN_SLOW=1")
    def test_bound_exhaustive(self):
        self.check(1000)


class TestWindows(unittest.TestCase):
    """gap_window and window_exponent"""

    def setUp(self):
        self.m = PrimePowerModulus(101, 2)

    def test_classification(self):
        small = Fraction(1, self.m.phi - 1)
        self.assertEqual(gap_window(0, small, self.m, 0.5), GapWindow.SMALL)
        self.assertEqual(gap_window(0, Fraction(1, 2000), self.m, 0.5), GapWindow.MID)
        self.assertEqual(gap_window(0, Fraction(1, 100), self.m, 0.5), GapWindow.KOROLEV)
        self.assertEqual(gap_window(0, Fraction(1, 5), self.m, 0.5), GapWindow.LARGE)

    def test_requires_order(self):
        with self.assertRaises(DomainError):
            gap_window("1/2", "1/3", self.m, 0.5)

    def test_exponents(self):
        self.assertEqual(window_exponent(GapWindow.SMALL, 2, 0.5, 4), 2)
        self.assertEqual(window_exponent(GapWindow.MID, 2, 0.5, 4), 1)
        self.assertEqual(window_exponent(GapWindow.KOROLEV, 2, 0.5, 4), 4 * 0.5 / 1.5)
        self.assertEqual(window_exponent(GapWindow.LARGE, 2, 0.5, 4), 2)


class TestBeta(unittest.TestCase):
    """beta_parameter"""

    def test_positive_at_smallest_alpha(self):
        delta = delta_admissible(31).delta_max_exact
        alpha = smallest_admissible_alpha(31, delta)
        self.assertEqual(alpha % 2, 0)
        self.assertGreater(beta_parameter(31, delta, alpha), 0)

    def test_large_alpha_limit(self):
        n = 40
        delta = delta_admissible(n).delta_max_exact / 3
        expected = float(min(Fraction(2), 1 + delta / (Fraction(n, 2) - delta)) - 1)
        self.assertAlmostEqual(beta_parameter(n, delta, 10 ** 40), expected, delta=1e-20)

    def test_float_endpoint(self):
        for n in (31, 40, 64, 128):
            delta = delta_admissible(n).delta_max
            alpha = smallest_admissible_alpha(n, delta)
            self.assertGreater(beta_parameter(n, delta, alpha), 0, f"n={n}")

    def test_alpha_below_threshold(self):
        delta = delta_admissible(31).delta_max_exact
        alpha = smallest_admissible_alpha(31, delta)
        with self.assertRaises(HypothesisViolation):
            beta_parameter(31, delta, alpha - 2)

    def test_delta_outside_window(self):
        with self.assertRaises(HypothesisViolation):
            beta_parameter(30, 1e-10, 10 ** 12)
        with self.assertRaises(HypothesisViolation):
            beta_parameter(31, 1e-3, 10 ** 12)


class TestTightnessScan(unittest.TestCase):
    """tightness_scan"""

    def setUp(self):
        self.m = PrimePowerModulus(11, 2)
        self.b = self.m.unit(1)

    def test_small_gaps_without_violations(self):
        gaps = [1 / 800, 1 / 400, 1 / 200]
        report = tightness_scan(self.m, self.b, 2, gaps, 10, seed=4)
        self.assertEqual(report.violations, [])
        self.assertEqual(len(report.points), 30)
        self.assertEqual(report.windows[GapWindow.SMALL.value].points, 30)
        self.assertIsNotNone(report.fitted_slope)
        # linear inside a segment, so the second moment grows like gap^2
        self.assertGreater(report.fitted_slope, 1.5)
        self.assertLess(report.fitted_slope, 2.1)
        self.assertIsNone(report.beta_prediction)

    def test_single_gap_has_no_slope(self):
        report = tightness_scan(self.m, self.b, 4, [0.1], 5, seed=1)
        self.assertIsNone(report.fitted_slope)
        self.assertEqual(len(report.moments), 1)

    def test_window_counts_cover_points(self):
        report = tightness_scan(self.m, self.b, 4, [0.002, 0.01, 0.05, 0.3], 4, seed=2)
        self.assertEqual(sum(w.points for w in report.windows.values()), len(report.points))
        self.assertTrue(all(m >= 0 for m in report.moments))

    def test_deterministic(self):
        first = tightness_scan(self.m, self.b, 2, [0.05, 0.2], 3, seed=9)
        second = tightness_scan(self.m, self.b, 2, [0.05, 0.2], 3, seed=9)
        self.assertEqual(first, second)

    def test_rejects_bad_grids(self):
        with self.assertRaises(DomainError):
            tightness_scan(self.m, self.b, 2, [], 3)
        with self.assertRaises(DomainError):
            tightness_scan(self.m, self.b, 2, [0.0, 0.1], 3)
        with self.assertRaises(DomainError):
            tightness_scan(self.m, self.b, 2, [1.5], 3)

    @unittest.skipUnless(RUN_SLOW, "set KLPATH_RUN_SLOW=1")
    def test_scaling_slope_p101(self):
        m = PrimePowerModulus(101, 2)
        gaps = [10 / m.phi * (0.1 * m.phi / 10) ** (k / 7) for k in range(8)]
        report = tightness_scan(m, m.unit(1), 4, gaps, 10, seed=0)
        self.assertGreaterEqual(report.fitted_slope, 1.2)


class TestCompareLaws(unittest.TestCase):
    """compare_laws"""

    def setUp(self):
        self.m = PrimePowerModulus(7, 2)
        self.b = self.m.unit(1)

    def test_report(self):
        report = compare_laws(self.m, self.b, ["0", "1/2", "1"], 49, 300, seed=5)
        self.assertEqual([entry.t for entry in report.ks], ["0/1", "1/2", "1/1"])
        for entry in report.ks:
            self.assertGreaterEqual(entry.re, 0.0)
            self.assertLessEqual(entry.re, 1.0)
        self.assertEqual(report.zero_mass_fraction, 0.5)
        self.assertIn("1/2", report.cdf_path)

    def test_time_zero_is_first_knot(self):
        report = compare_laws(self.m, self.b, ["0"], 49, 50, seed=1)
        entry = report.ks[0]
        self.assertLessEqual(abs(entry.path_mean_re), 1 / self.m.sqrt_q)
        self.assertEqual(entry.limit_mean_re, 0.0)
        self.assertEqual(entry.limit_std_re, 0.0)

    def test_zero_mass_without_requesting_t1(self):
        report = compare_laws(self.m, self.b, ["1/3"], 20, 50, seed=1)
        self.assertEqual(report.zero_mass_fraction, 0.5)

    def test_half_time_keeps_the_atom(self):
        report = compare_laws(self.m, self.b, ["1/2"], 49, 400, seed=3, resolution=0.0)
        limit = limit_samples([RationalTime.of("1/2")], 49, 400, seed=3)[:, 0]
        self.assertAlmostEqual(float(np.mean(limit.real == 0.0)), 0.5, delta=0.1)
        self.assertEqual(report.resolution, 0.0)

    def test_default_resolution(self):
        report = compare_laws(self.m, self.b, ["1/2"], 49, 100, seed=3)
        self.assertAlmostEqual(report.resolution, 6 / self.m.sqrt_q)
        with self.assertRaises(DomainError):
            compare_laws(self.m, self.b, ["1/2"], 49, 100, seed=3, resolution=-1.0)

    def test_resolve(self):
        values = np.array([0.01 + 0.5j, -0.3 - 0.001j, 0.2 + 0.2j])
        resolved = resolve(values, 0.1)
        np.testing.assert_array_equal(resolved, np.array([0.5j, -0.3, 0.2 + 0.2j]))

    def test_deterministic(self):
        first = compare_laws(self.m, self.b, ["1/3", "2/3"], 30, 200, seed=42, energy_subsample=40)
        second = compare_laws(self.m, self.b, ["1/3", "2/3"], 30, 200, seed=42, energy_subsample=40)
        self.assertEqual(first, second)
        self.assertIsNotNone(first.ks[0].energy)

    @unittest.skipUnless(RUN_SLOW, "set KLPATH_RUN_SLOW=1")
    def test_ks_decreases_with_p(self):
        reports = []
        for p in (11, 31, 101):
            m = PrimePowerModulus(p, 2)
            reports.append(compare_laws(m, m.unit(1), ["1/2"], m.q, 10 ** 4, seed=0))
        for before, after in zip(reports, reports[1:]):
            noise = ks_noise(after)
            self.assertLessEqual(after.ks[0].re, before.ks[0].re + noise)
            self.assertLessEqual(after.ks[0].im, before.ks[0].im + noise)
        self.assertLessEqual(max(reports[-1].ks[0].re, reports[-1].ks[0].im), 0.05)


class TestSupStatistics(unittest.TestCase):
    """sup_statistics"""

    def test_empty_grid(self):
        m = PrimePowerModulus(5, 2)
        with self.assertRaises(DomainError):
            sup_statistics(m, m.unit(1), [])

    def test_endpoint_grid(self):
        m = PrimePowerModulus(5, 2)
        report = sup_statistics(m, m.unit(1), ["1"])
        expected = max(abs(full_sum(a, m.unit(1), m)) for a in units_iter(m))
        self.assertAlmostEqual(report.max_abs, expected, places=12)
        self.assertLessEqual(report.max_abs, 2 + 1e-9)

    def test_ratio(self):
        m = PrimePowerModulus(5, 2)
        grid = [Fraction(k, 50) for k in range(51)]
        report = sup_statistics(m, m.unit(1), grid)
        self.assertTrue(math.isfinite(report.ratio))
        self.assertAlmostEqual(report.ratio, report.max_abs / math.log(25))

    @unittest.skipUnless(RUN_SLOW, "set KLPATH_RUN_SLOW=1")
    def test_ratio_does_not_grow_with_q(self):
        primes = (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101)
        grid = [Fraction(k, 100) for k in range(101)]
        ratios = []
        for p in primes:
            m = PrimePowerModulus(p, 2)
            ratios.append(sup_statistics(m, m.unit(1), grid).ratio)
        constant = max(ratios)
        for p, before, after in zip(primes[1:], ratios, ratios[1:]):
            self.assertLessEqual(after, 1.1 * before, f"p={p}: ratio {after:.4f}, empirical constant {constant:.4f}")
        self.assertTrue(math.isfinite(constant))


class TestSurrogateMoment(unittest.TestCase):
    """surrogate_moment and step_moment"""

    def setUp(self):
        self.m = PrimePowerModulus(7, 2)

    def test_second_moment_ratio(self):
        report = surrogate_moment("1/5", "3/5", self.m, 2, 20000, seed=3)
        # E|X|^2 = |I|/q while sigma^2 = 4|I|/q
        self.assertAlmostEqual(report.subgaussian_ratio, 0.25, delta=0.01)
        cardinality = interval_between("1/5", "3/5", self.m).cardinality
        self.assertAlmostEqual(report.sigma ** 2, 4 * cardinality / self.m.q, places=12)

    def test_deterministic(self):
        first = surrogate_moment("1/3", "1/2", self.m, 4, 300, seed=8)
        second = surrogate_moment("1/3", "1/2", self.m, 4, 300, seed=8)
        self.assertEqual(first, second)

    def test_requires_order(self):
        with self.assertRaises(DomainError):
            surrogate_moment("1/2", "1/3", self.m, 2, 10, seed=0)

    def test_step_moment_matches_direct(self):
        m = PrimePowerModulus(5, 2)
        b = m.unit(2)
        s, t = Fraction(1, 7), Fraction(5, 8)
        interval = interval_between(s, t, m)
        xs = [x for x in range(math.floor(interval.lower) + 1, math.floor(interval.upper) + 1) if x % 5]
        expected = 0.0
        for a in units_iter(m):
            value = sum(e_q(a.value * x + 2 * pow(x, -1, 25), m) for x in xs) / m.sqrt_q
            expected += abs(value) ** 4
        expected /= m.phi
        self.assertAlmostEqual(step_moment(s, t, 4, b, m), expected, places=12)


if __name__ == "__main__":
    unittest.main()
