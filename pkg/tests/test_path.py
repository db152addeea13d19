"""
unit tests for the kloosterman path, its step approximation and the
fourier coefficients of the step sets
"""

import math
import os
import random
import unittest
from fractions import Fraction

import numpy as np

from klpath.domain.constants import KNOT_TOL, STEP_GAP_CONSTANT
from klpath.domain.enums import FourierConvention
from klpath.domain.errors import DomainError
from klpath.services.kloosterman import full_sum, partial_sum_table, partial_sums
from klpath.services.modarith import PrimePowerModulus, e_q, unit_table
from klpath.services.path import (
    RationalTime,
    build_path,
    evaluate_paths,
    evaluate_steps,
    fourier_coeff,
    fourier_coeffs,
    index_map,
    interval_between,
    path_eval,
    path_from_series,
    step_approx,
    step_count,
    step_difference_bound,
    step_from_series,
    step_upper,
)

RUN_SLOW = os.environ.get("KLPATH_RUN_SLOW") == "1"


def random_time(rng: random.Random, denominator: int = 10 ** 6) -> RationalTime:
    return RationalTime.of(Fraction(rng.randint(0, denominator), denominator))


class TestRationalTime(unittest.TestCase):
    """exact times"""

    def test_parsing(self):
        self.assertEqual(RationalTime.of("1/2"), RationalTime(1, 2))
        self.assertEqual(RationalTime.of("0.25").value, Fraction(1, 4))
        self.assertEqual(RationalTime.of(1), RationalTime(1, 1))

    def test_range(self):
        for bad in ("-1/3", "4/3", 2):
            with self.assertRaises(DomainError):
                RationalTime.of(bad)

    def test_floats_must_be_snapped(self):
        with self.assertRaises(DomainError):
            RationalTime.of(0.5)
        m = PrimePowerModulus(5, 2)
        snapped = RationalTime.from_float(0.5, m, grid_factor=2)
        self.assertEqual(snapped.value, Fraction(1, 2))
        self.assertEqual(RationalTime.from_float(0.3, m).value, Fraction(6, 19))


class TestIndexMap(unittest.TestCase):
    """index_map"""

    def test_examples(self):
        self.assertEqual(index_map(1, PrimePowerModulus(7, 2)), 1)
        self.assertEqual(index_map(3, PrimePowerModulus(3, 2)), 4)
        self.assertEqual(index_map(5, PrimePowerModulus(5, 2)), 6)

    def test_enumerates_units(self):
        m = PrimePowerModulus(7, 2)
        mapped = [index_map(j, m) for j in range(1, m.phi + 1)]
        self.assertEqual(mapped, unit_table(m).tolist())

    def test_range(self):
        m = PrimePowerModulus(5, 2)
        with self.assertRaises(DomainError):
            index_map(0, m)
        with self.assertRaises(DomainError):
            index_map(21, m)


class TestPathEval(unittest.TestCase):
    """path parametrization"""

    def setUp(self):
        self.m = PrimePowerModulus(7, 2)
        self.a, self.b = self.m.unit(3), self.m.unit(1)
        self.path = build_path(self.a, self.b, self.m)
        self.steps = self.m.phi - 1

    def test_endpoints(self):
        z = self.path.knots
        self.assertEqual(path_eval(0, self.path), complex(z[0]))
        self.assertAlmostEqual(path_eval(1, self.path).real, full_sum(self.a, self.b, self.m), delta=1e-12)

    def test_knots(self):
        z = self.path.knots
        for j in range(1, self.m.phi):
            value = path_eval(Fraction(j, self.steps), self.path)
            self.assertLess(abs(value - z[j]), KNOT_TOL)

    def test_midpoints(self):
        z = self.path.knots
        for j in range(1, self.m.phi):
            value = path_eval(Fraction(2 * j - 1, 2 * self.steps), self.path)
            self.assertLess(abs(value - (z[j - 1] + z[j]) / 2), 1e-12)

    def test_slopes(self):
        expected = self.steps / self.m.sqrt_q
        np.testing.assert_allclose(np.abs(self.path.slopes), expected, rtol=1e-9)

    def test_knot_rows(self):
        rows = self.path.knot_rows()
        self.assertEqual(len(rows), self.m.phi)
        self.assertEqual(rows[0][:2], (1, Fraction(0)))
        self.assertEqual(rows[-1][:2], (self.m.phi, Fraction(1)))

    def test_evaluate_paths_matches_path_eval(self):
        times = [RationalTime.of(Fraction(k, 37)) for k in range(38)]
        units = unit_table(self.m)[:9]
        table = partial_sum_table(units, 1, self.m)
        values = evaluate_paths(table, times, self.m)
        for row, a in enumerate(units):
            path = build_path(self.m.unit(int(a)), self.b, self.m)
            for col, t in enumerate(times):
                self.assertLess(abs(values[row, col] - path_eval(t, path)), 1e-12)

    def test_slope_equality_exhaustive(self):
        for p in (3, 5, 7, 11, 13):
            for n in (1, 2, 3):
                m = PrimePowerModulus(p, n)
                if m.phi < 2:
                    continue
                path = path_from_series(partial_sums(m.unit(1), m.unit(2), m))
                scaled = np.abs(path.slopes) * m.sqrt_q
                self.assertLess(float(np.max(np.abs(scaled - (m.phi - 1)))), 1e-9 * (m.phi - 1))


class TestStepApprox(unittest.TestCase):
    """step approximation"""

    def setUp(self):
        self.m = PrimePowerModulus(5, 2)
        self.a, self.b = self.m.unit(2), self.m.unit(1)

    def test_full_time(self):
        value = step_approx(1, self.a, self.b, self.m)
        self.assertAlmostEqual(value.real, full_sum(self.a, self.b, self.m), delta=1e-12)
        self.assertEqual(step_upper(RationalTime.of(1), self.m), self.m.q - 1)

    def test_zero_time(self):
        with self.assertRaises(DomainError):
            step_approx(0, self.a, self.b, self.m)
        self.assertEqual(step_approx(0, self.a, self.b, self.m, allow_zero=True), 0)

    def test_empty_step_set(self):
        # x_k(t) < 1 for t below 1/phi
        t = RationalTime.of(Fraction(1, 1000))
        self.assertEqual(math.floor(step_upper(t, self.m)), 0)
        self.assertEqual(step_count(t, self.m), 0)
        self.assertEqual(step_approx(t, self.a, self.b, self.m), 0)

    def test_matches_direct_sum(self):
        rng = random.Random(11)
        for _ in range(50):
            t = random_time(rng)
            if t.numerator == 0:
                continue
            upper = math.floor(step_upper(t, self.m))
            direct = sum(
                e_q(self.a.value * x + self.b.value * pow(x, -1, self.m.q), self.m)
                for x in range(1, upper + 1)
                if x % 5
            ) / self.m.sqrt_q
            self.assertLess(abs(step_approx(t, self.a, self.b, self.m) - direct), 1e-12)

    def test_gap_to_path(self):
        series = partial_sums(self.a, self.b, self.m)
        path = path_from_series(series)
        rng = random.Random(5)
        for _ in range(2000):
            t = random_time(rng)
            if t.numerator == 0:
                continue
            gap = abs(path_eval(t, path) - step_from_series(t, series))
            self.assertLessEqual(gap, STEP_GAP_CONSTANT / self.m.sqrt_q)

    @unittest.skipUnless(RUN_SLOW, "set KLPATH_RUN_SLOW=1")
    def test_gap_to_path_grid_all_units(self):
        for p in (5, 7, 11, 13):
            m = PrimePowerModulus(p, 2)
            times = [RationalTime.of(Fraction(k, 10 ** 4)) for k in range(1, 10 ** 4 + 1)]
            table = partial_sum_table(unit_table(m), 1, m)
            gap = np.abs(evaluate_paths(table, times, m) - evaluate_steps(table, times, m))
            self.assertLessEqual(float(gap.max()), STEP_GAP_CONSTANT / m.sqrt_q)


class TestFourierCoefficients(unittest.TestCase):
    """alpha(h; t)"""

    def setUp(self):
        self.m = PrimePowerModulus(7, 2)

    def direct(self, h: int, t: RationalTime, convention=FourierConvention.ALL_X) -> complex:
        upper = math.floor(step_upper(t, self.m))
        xs = range(1, upper + 1)
        if convention == FourierConvention.COPRIME_X:
            xs = [x for x in xs if x % self.m.p]
        return sum(e_q(h * x, self.m) for x in xs) / self.m.sqrt_q

    def test_h_zero(self):
        t = RationalTime.of(Fraction(2, 5))
        expected = math.floor(step_upper(t, self.m)) / self.m.sqrt_q
        self.assertAlmostEqual(fourier_coeff(0, t, self.m).real, expected, places=12)

    def test_conjugate_symmetry(self):
        t = RationalTime.of(Fraction(3, 11))
        for h in range(1, 30):
            self.assertLess(abs(fourier_coeff(-h, t, self.m) - fourier_coeff(h, t, self.m).conjugate()), 1e-12)

    def test_closed_form_vs_direct(self):
        rng = random.Random(9)
        for _ in range(1000):
            t = random_time(rng)
            if t.numerator == 0:
                continue
            h = rng.randint(-200, 200)
            self.assertLess(abs(fourier_coeff(h, t, self.m) - self.direct(h, t)), 1e-10)

    def test_coprime_convention(self):
        rng = random.Random(2)
        for _ in range(100):
            t = random_time(rng)
            if t.numerator == 0:
                continue
            h = rng.randint(-24, 24)
            got = fourier_coeff(h, t, self.m, FourierConvention.COPRIME_X)
            self.assertLess(abs(got - self.direct(h, t, FourierConvention.COPRIME_X)), 1e-10)

    def test_vector_matches_scalar(self):
        t = RationalTime.of(Fraction(5, 9))
        coeffs = fourier_coeffs(t, self.m)
        H = (self.m.q - 1) // 2
        for h in (-H, -7, 0, 1, 13, H):
            self.assertLess(abs(coeffs[h + H] - fourier_coeff(h, t, self.m)), 1e-12)
        np.testing.assert_array_equal(fourier_coeffs(RationalTime.of(0), self.m), 0)

    def test_plancherel(self):
        rng = random.Random(1)
        for _ in range(1000):
            s, t = sorted([random_time(rng), random_time(rng)], key=lambda u: u.value)
            if s == t:
                continue
            delta = fourier_coeffs(t, self.m) - fourier_coeffs(s, self.m)
            total = float(np.sum(np.abs(delta) ** 2))
            self.assertLess(abs(total - interval_between(s, t, self.m).cardinality), 1e-8 * self.m.q)


class TestIntervals(unittest.TestCase):
    """I_{s,t}"""

    def setUp(self):
        self.m = PrimePowerModulus(5, 2)

    def test_requires_order(self):
        with self.assertRaises(DomainError):
            interval_between("1/2", "1/2", self.m)
        with self.assertRaises(DomainError):
            interval_between("1/2", "1/3", self.m)

    def test_empty_interval(self):
        s, t = Fraction(1, 1000), Fraction(2, 1000)
        self.assertEqual(interval_between(s, t, self.m).cardinality, 0)

    def test_whole_range(self):
        interval = interval_between(Fraction(1, 10 ** 6), 1, self.m)
        self.assertEqual(interval.cardinality, self.m.q - 1)

    def test_counts_step_difference(self):
        rng = random.Random(4)
        a, b = self.m.unit(3), self.m.unit(2)
        series = partial_sums(a, b, self.m)
        for _ in range(300):
            s, t = sorted([random_time(rng), random_time(rng)], key=lambda u: u.value)
            if s == t:
                continue
            interval = interval_between(s, t, self.m)
            xs = range(math.floor(interval.lower) + 1, math.floor(interval.upper) + 1)
            direct = sum(e_q(3 * x + 2 * pow(x, -1, 25), self.m) for x in xs if x % 5) / self.m.sqrt_q
            difference = step_from_series(t, series, allow_zero=True) - step_from_series(s, series, allow_zero=True)
            self.assertLess(abs(difference - direct), 1e-12)
            self.assertLessEqual(abs(difference), step_difference_bound(s, t, self.m) + 1e-12)

    def test_length_bound(self):
        rng = random.Random(8)
        checked = 0
        while checked < 10 ** 4:
            s, t = sorted([random_time(rng), random_time(rng)], key=lambda u: u.value)
            if (self.m.phi - 1) * (t.value - s.value) < 1:
                continue
            interval = interval_between(s, t, self.m)
            self.assertLessEqual(interval.cardinality, interval.length_bound(s, t, self.m))
            checked += 1


if __name__ == "__main__":
    unittest.main()
