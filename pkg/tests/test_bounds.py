"""
unit tests for the korolev bound calculator and the short-sum scan
"""

import math
import os
import unittest
from fractions import Fraction

import numpy as np

from klpath.domain.constants import GAMMA2
from klpath.domain.errors import HypothesisViolation
from klpath.services.bounds import (
    KOROLEV,
    bounds_table,
    decompose_interval,
    delta_admissible,
    exponent_chain_check,
    korolev_bound,
    korolev_condition,
    korolev_interval_bound,
    short_sum_scan,
    short_sums,
)
from klpath.services.kloosterman import full_sum
from klpath.services.modarith import PrimePowerModulus, unit_table

RUN_SLOW = os.environ.get("KLPATH_RUN_SLOW") == "1"


class TestConstants(unittest.TestCase):

    def test_exact_values(self):
        self.assertEqual(KOROLEV.gamma1, 900)
        self.assertEqual(KOROLEV.gamma2, Fraction(1, 655360000))
        self.assertEqual(GAMMA2, Fraction(1, 160 ** 4))


class TestKorolevCondition(unittest.TestCase):
    """korolev_condition"""

    def test_upper_end(self):
        for p, n in [(3, 31), (3, 40), (5, 20)]:
            m = PrimePowerModulus(p, n)
            self.assertFalse(korolev_condition(p ** math.ceil(n / 2) + 1, m))

    def test_lower_end(self):
        m = PrimePowerModulus(3, 40)
        self.assertFalse(korolev_condition(3 ** 15 - 1, m))

    def test_false_on_desk_grid(self):
        for p in (3, 5, 7, 101, 9973):
            for n in range(1, 41):
                if p ** n > 2 ** 64 - 1:
                    break
                m = PrimePowerModulus(p, n)
                for N in (1, 2 ** 20, 3 ** 15, math.isqrt(m.q), 2 ** 63):
                    self.assertFalse(korolev_condition(N, m), f"p={p} n={n} N={N}")


class TestKorolevBound(unittest.TestCase):
    """korolev_bound"""

    def test_length_one(self):
        self.assertEqual(korolev_bound(1, PrimePowerModulus(5, 3)), 1.0)
        self.assertEqual(korolev_bound(1, PrimePowerModulus(3, 31), factor4=True), 4.0)

    def test_full_length(self):
        m = PrimePowerModulus(7, 3)
        expected = math.exp(-float(GAMMA2) * math.log(m.q))
        self.assertAlmostEqual(korolev_bound(m.q, m) / m.q, expected, places=14)

    def test_factor4_needs_n_31(self):
        with self.assertRaises(HypothesisViolation):
            korolev_bound(100, PrimePowerModulus(3, 30), factor4=True)
        self.assertEqual(HypothesisViolation("x").exit_code, 3)

    def test_ratio_decreasing(self):
        m = PrimePowerModulus(3, 40)
        ratios = [korolev_bound(2 ** k, m) / 2 ** k for k in range(1, 64)]
        for left, right in zip(ratios, ratios[1:]):
            self.assertLess(right, left)

    def test_table(self):
        m = PrimePowerModulus(11, 4)
        rows = bounds_table(m, [1, 11, 121])
        self.assertEqual([row.N for row in rows], [1, 11, 121])
        self.assertEqual(rows[0].bound, 1.0)
        self.assertTrue(all(not row.condition for row in rows))
        self.assertAlmostEqual(rows[2].sqrt_N, 11.0)


class TestDeltaWindow(unittest.TestCase):
    """delta_admissible and exponent_chain_check"""

    def test_empty_below_31(self):
        for n in (1, 2, 30):
            with self.assertRaises(HypothesisViolation) as ctx:
                delta_admissible(n)
            self.assertIn("n >= 31", str(ctx.exception))

    def test_values(self):
        self.assertAlmostEqual(delta_admissible(31).delta_max, 2.957e-9, delta=1e-12)
        self.assertEqual(delta_admissible(PrimePowerModulus(3, 31)).delta_max_exact, GAMMA2 * 31 / 16)
        self.assertAlmostEqual(delta_admissible(10 ** 9).delta_max, 0.0954, delta=1e-4)

    def test_nondecreasing(self):
        values = [delta_admissible(n).delta_max_exact for n in range(31, 400)]
        for left, right in zip(values, values[1:]):
            self.assertLessEqual(left, right)

    def test_chain_limits(self):
        for n in (31, 40, 64, 128):
            self.assertTrue(exponent_chain_check(1e-15, n))
        self.assertTrue(exponent_chain_check(delta_admissible(31).delta_max_exact, 31))
        self.assertFalse(exponent_chain_check(31 * float(GAMMA2) / 8, 31))

    def test_chain_holds_on_window(self):
        for n in (31, 40, 64, 128):
            delta_max = delta_admissible(n).delta_max_exact
            for k in range(1, 101):
                self.assertTrue(exponent_chain_check(delta_max * k / 100, n), f"n={n} k={k}")

    def test_float_endpoint_is_admissible(self):
        for n in (31, 40, 64, 128):
            window = delta_admissible(n)
            self.assertLessEqual(Fraction(window.delta_max), window.delta_max_exact)
            self.assertTrue(window.contains(window.delta_max), f"n={n}")
            self.assertTrue(exponent_chain_check(window.delta_max, n), f"n={n}")
            self.assertFalse(window.contains(math.nextafter(window.delta_max, 1.0)))


class TestIntervalBound(unittest.TestCase):
    """korolev_interval_bound and decompose_interval"""

    def setUp(self):
        self.m = PrimePowerModulus(3, 40)
        self.delta = delta_admissible(self.m).delta_max / 2
        self.log_inv_q = -math.log(self.m.q)
        self.g2 = float(GAMMA2)

    def short_term(self) -> float:
        return 4 * math.exp(self.log_inv_q * self.g2 * ((20 - self.delta) / 40) ** 3)

    def test_short_branch(self):
        value = korolev_interval_bound(3 ** 20, self.m, self.delta)
        self.assertAlmostEqual(value, self.short_term(), places=12)

    def test_long_branch(self):
        value = korolev_interval_bound(3 ** 21, self.m, self.delta)
        expected = (
            math.exp(self.log_inv_q * (self.g2 / 8 - self.delta / 40))
            + self.short_term()
            + math.exp(self.log_inv_q * self.delta / 40)
        )
        self.assertAlmostEqual(value, expected, places=12)

    def test_hypotheses(self):
        with self.assertRaises(HypothesisViolation):
            korolev_interval_bound(3 ** 19, self.m, self.delta)
        with self.assertRaises(HypothesisViolation):
            korolev_interval_bound(3 ** 21, self.m, 4 * self.delta)
        with self.assertRaises(HypothesisViolation):
            korolev_interval_bound(3 ** 16, PrimePowerModulus(3, 30), 1e-10)

    def test_decomposition(self):
        m = PrimePowerModulus(7, 3)
        block = math.isqrt(m.q)
        for c, N in [(0, 1), (5, block), (10, block + 1), (3, 1000), (0, m.q)]:
            pieces = decompose_interval(c, N, m)
            self.assertEqual(sum(length for _, length in pieces), N)
            self.assertEqual(len(pieces), -(-N // block))
            self.assertTrue(all(0 < length <= block for _, length in pieces))
            self.assertEqual(pieces[0][0], c)
            for (start, length), (following, _) in zip(pieces, pieces[1:]):
                self.assertEqual(start + length, following)


class TestShortSums(unittest.TestCase):
    """short_sums and short_sum_scan"""

    def setUp(self):
        self.m = PrimePowerModulus(11, 2)
        self.units = unit_table(self.m)

    def test_length_one(self):
        for c in range(0, 30):
            values = short_sums(self.units, 1, self.m, c, 1)
            expected = 0.0 if (c + 1) % 11 == 0 else 1.0
            np.testing.assert_allclose(values, expected, atol=1e-12)

    def test_full_period(self):
        values = short_sums(self.units, 3, self.m, 0, self.m.q)
        b = self.m.unit(3)
        for a, value in zip(self.units, values):
            self.assertAlmostEqual(value, abs(full_sum(self.m.unit(int(a)), b, self.m)) * self.m.sqrt_q, delta=1e-9)
            self.assertLessEqual(value, 2 * self.m.sqrt_q + 1e-9)

    def test_scan_report(self):
        report = short_sum_scan(self.m.unit(1), self.m, 11, list(range(5)), chunk_size=32)
        self.assertEqual(report.units, self.m.phi)
        self.assertLessEqual(report.max_abs, 11)
        self.assertFalse(report.korolev_condition)
        self.assertAlmostEqual(report.ratio_sqrt, report.max_abs / math.sqrt(11))
        sampled = short_sum_scan(self.m.unit(1), self.m, 11, [0], a_sample=10, seed=3)
        self.assertEqual(sampled.units, 10)

    def test_scan_thread_independent(self):
        one = short_sum_scan(self.m.unit(2), self.m, 20, [0, 7, 50], threads=1)
        two = short_sum_scan(self.m.unit(2), self.m, 20, [0, 7, 50], threads=2)
        self.assertEqual(one, two)

    @unittest.skipUnless(RUN_SLOW, "set KLPATH_RUN_SLOW=1")
    def test_desk_scale_scan(self):
        m = PrimePowerModulus(101, 2)
        report = short_sum_scan(m.unit(1), m, 101, list(range(0, 10100, 101)))
        self.assertEqual(report.units, m.phi)
        self.assertLess(report.max_abs, 101)
        self.assertGreater(report.ratio_sqrt, 0)


if __name__ == "__main__":
    unittest.main()
