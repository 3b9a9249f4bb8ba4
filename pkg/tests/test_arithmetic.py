import math
import unittest
from fractions import Fraction

from dynamics.arithmetic import (
    RotationNumber,
    arithmetic_verdict,
    brjuno_partial_sum,
    continued_fraction,
    is_torsion,
    multiplier_class,
    parse_rotation_number,
    strong_cremer_check,
    strong_cremer_sweep,
)
from dynamics.errors import (
    ConfigurationError,
    DefinedOnlyForIrrational,
    DegenerateTorsion,
    ExpressionError,
    PrecisionExhausted,
)
from providers import BinaryFloatField, GaussianRationalField
from providers.binary_float import context

EXACT = GaussianRationalField()
GOLDEN = (math.sqrt(5) - 1) / 2


class RotationNumberTests(unittest.TestCase):
    def test_named_angles(self):
        golden = parse_rotation_number("golden")
        self.assertEqual((golden.kind, golden.digits, golden.tail), ("cf", (1,), "repeat"))
        self.assertAlmostEqual(float(golden.approximate(64)), GOLDEN, places=14)
        self.assertAlmostEqual(float(parse_rotation_number("silver").approximate(64)), math.sqrt(2) - 1, places=14)

    def test_rationals_are_reduced_mod_one(self):
        theta = parse_rotation_number("-1/4")
        self.assertEqual((theta.p, theta.q), (3, 4))
        self.assertEqual(parse_rotation_number("6/8"), RotationNumber.rational(3, 4))

    def test_continued_fraction_digits(self):
        theta = parse_rotation_number("cf:[0;2,4,512,2^4610]")
        self.assertEqual(theta.digits[:3], (2, 4, 512))
        self.assertEqual(theta.digits[3], 2 ** 4610)
        self.assertEqual(theta.partial_quotient(5), 1)
        self.assertEqual(parse_rotation_number("cf:[0;1,2,...]").partial_quotient(7), 2)

    def test_malformed_input(self):
        for text in ("cf:[0;]", "cf:[0;x]", "cf:0;1", "not-a-number"):
            with self.assertRaises(ExpressionError):
                parse_rotation_number(text)

    def test_negate_is_one_minus_theta(self):
        for name in ("golden", "silver"):
            theta = parse_rotation_number(name)
            self.assertAlmostEqual(float(theta.negate().approximate(64)),
                                   1 - float(theta.approximate(64)), places=14)
        self.assertEqual(RotationNumber.rational(1, 3).negate(), RotationNumber.rational(2, 3))

    def test_json_keeps_huge_digits(self):
        theta = parse_rotation_number("cf:[0;2,4,512,2^4610]")
        self.assertEqual(RotationNumber.from_json(theta.to_json()), theta)


class ContinuedFractionTests(unittest.TestCase):
    def test_symbolic_expansion(self):
        cf = continued_fraction(parse_rotation_number("cf:[0;10,100]"), 3)
        self.assertEqual(cf.partial_quotients, (0, 10, 100, 1))
        self.assertEqual(cf.denominators, (1, 10, 1001, 1011))

    def test_rational_expansion_terminates(self):
        cf = continued_fraction(RotationNumber.rational(7, 10), 10)
        self.assertTrue(cf.terminating)
        self.assertEqual(cf.partial_quotients, (0, 1, 2, 3))
        self.assertEqual(cf.convergents[-1], (7, 10))

    def test_real_value_runs_out_of_precision(self):
        theta = RotationNumber.real("0.1234567", 53)
        with self.assertRaises(PrecisionExhausted) as ctx:
            continued_fraction(theta, 60)
        self.assertIsNotNone(ctx.exception.partial)
        self.assertLess(ctx.exception.depth, 60)

    def test_brjuno_partial_sum(self):
        cf = continued_fraction(parse_rotation_number("golden"), 11)
        total = brjuno_partial_sum(cf, 10)
        self.assertGreater(total, 2.5)
        self.assertLess(total, 5.0)
        with self.assertRaises(DefinedOnlyForIrrational):
            brjuno_partial_sum(continued_fraction(RotationNumber.rational(1, 3), 4), 1)

    def test_convergent_recurrence_and_approximation_bound(self):
        ctx = context(512)
        for text in ("golden", "silver", "cf:[0;10,100,10000]", "cf:[0;3,1,4,1,5,9,2,6]"):
            theta = parse_rotation_number(text)
            cf = continued_fraction(theta, 16)
            a = cf.partial_quotients
            p = [pn for pn, _ in cf.convergents]
            q = cf.denominators
            self.assertEqual((p[0], q[0]), (a[0], 1))
            self.assertEqual((p[1], q[1]), (a[1] * a[0] + 1, a[1]))
            for n in range(2, len(a)):
                self.assertEqual(p[n], a[n] * p[n - 1] + p[n - 2], msg=text)
                self.assertEqual(q[n], a[n] * q[n - 1] + q[n - 2], msg=text)
            value = ctx.mpf(theta.approximate(512))
            for n in range(len(a) - 1):
                gap = abs(value - ctx.mpf(p[n]) / q[n])
                self.assertLess(gap, ctx.mpf(1) / (q[n] * q[n + 1]), msg=f"{text} at depth {n}")

    def test_brjuno_sums_are_monotone_and_bounded_for_golden(self):
        cf = continued_fraction(parse_rotation_number("golden"), 21)
        sums = [brjuno_partial_sum(cf, n) for n in range(21)]
        self.assertEqual(sums, sorted(sums))
        self.assertLess(sums[-1], 4.0)
        self.assertLess(sums[20] - sums[19], 1e-3)

    def test_brjuno_sums_grow_without_bound_for_huge_quotients(self):
        # a_{n+1} = 2^{q_n}: every term is at least log 2
        cf = continued_fraction(parse_rotation_number("cf:[0;2,4,512,2^4610]"), 5)
        sums = [brjuno_partial_sum(cf, n) for n in range(4)]
        for previous, current in zip(sums, sums[1:]):
            self.assertGreaterEqual(current - previous, math.log(2) - 1e-12)
        for threshold in (10, 100, 1000):
            k = math.ceil(threshold / math.log(2)) + 1
            theta = parse_rotation_number(f"cf:[0;1,2^{k}]")
            self.assertGreater(brjuno_partial_sum(continued_fraction(theta, 3), 1), threshold)


class TorsionTests(unittest.TestCase):
    def test_exact_forms(self):
        self.assertEqual(is_torsion(RotationNumber.rational(3, 4)).q, 4)
        result = is_torsion(parse_rotation_number("golden"))
        self.assertFalse(result.is_torsion)
        self.assertFalse(result.heuristic)

    def test_real_values_are_heuristic(self):
        result = is_torsion(RotationNumber.real("0.25", 128))
        self.assertTrue(result.is_torsion)
        self.assertEqual(result.q, 4)
        self.assertTrue(result.heuristic)

    def test_multiplier_class(self):
        self.assertEqual(multiplier_class(EXACT, EXACT.element(-1)).order, 2)
        pythagorean = multiplier_class(EXACT, EXACT.element(Fraction(3, 5), Fraction(4, 5)))
        self.assertEqual((pythagorean.kind, pythagorean.certain), ("non_torsion", True))
        self.assertEqual(multiplier_class(EXACT, EXACT.element(2)).kind, "non_unitary")

        field_ = BinaryFloatField(128)
        third = multiplier_class(field_, field_.root_of_unity(Fraction(1, 3)))
        self.assertEqual((third.kind, third.order, third.certain), ("torsion", 3, False))
        tagged = multiplier_class(field_, field_.one, RotationNumber.rational(1, 5))
        self.assertEqual((tagged.order, tagged.certain), (5, True))


class CremerTests(unittest.TestCase):
    def test_degenerate_torsion(self):
        with self.assertRaises(DegenerateTorsion):
            strong_cremer_check(RotationNumber.rational(1, 3), 2, 2.0, 10)

    def test_bad_parameters(self):
        with self.assertRaises(ConfigurationError):
            strong_cremer_check(parse_rotation_number("golden"), 1, 2.0, 10)

    def test_sweep_minimum_grows_with_a(self):
        sweep = strong_cremer_sweep(parse_rotation_number("cf:[0;2,4,512,2^4610]"), 2, 64)
        self.assertEqual(sorted(sweep), [2, 10, 100])
        self.assertLessEqual(sweep[2].min_value, sweep[10].min_value)
        self.assertLessEqual(sweep[10].min_value, sweep[100].min_value)
        evidence = sweep[2]
        self.assertTrue(1 <= evidence.at_n <= 64)
        self.assertEqual([q for q, _ in evidence.values_at_denominators], [1, 2, 9])

    def test_values_drop_along_denominators_after_a_huge_quotient(self):
        evidence = strong_cremer_check(parse_rotation_number("cf:[0;2,2^50]"), 2, 2.0, 64)
        self.assertEqual([q for q, _ in evidence.values_at_denominators], [1, 2])
        (_, first), (_, second) = evidence.values_at_denominators
        self.assertAlmostEqual(first, 2 * math.log(2), places=6)
        self.assertGreaterEqual(first - second, 10.0)
        self.assertEqual(evidence.at_n, 2)
        self.assertLess(evidence.min_value, -9.0)

    def test_golden_stays_bounded_below(self):
        for a_value, evidence in strong_cremer_sweep(parse_rotation_number("golden"), 2, 64).items():
            self.assertGreater(evidence.min_value, 1.0, msg=f"A = {a_value}")

    def test_quarter_turn_degenerates_at_four(self):
        with self.assertRaises(DegenerateTorsion) as ctx:
            strong_cremer_check(RotationNumber.rational(1, 4), 3, 10.0, 10)
        self.assertEqual(ctx.exception.n, 4)

    def test_arithmetic_verdicts(self):
        self.assertEqual(arithmetic_verdict(parse_rotation_number("golden")).kind, "diophantine")
        verdict = arithmetic_verdict(RotationNumber.rational(1, 2))
        self.assertEqual((verdict.kind, verdict.value), ("torsion", 2.0))

    def test_verdict_order_after_a_failed_diophantine_bound(self):
        theta = parse_rotation_number("cf:[0;2,2^36]")
        cremer = arithmetic_verdict(theta)
        self.assertEqual((cremer.kind, cremer.at_n), ("cremer", 2))
        self.assertLess(cremer.value, -6.0)
        trail = dict(cremer.trail)
        self.assertGreater(trail["diophantine_exponent"], 2.0)

        brjuno = arithmetic_verdict(theta, a_value=100)
        self.assertEqual(brjuno.kind, "brjuno")
        self.assertGreater(dict(brjuno.trail)["cremer_min"], 0.0)
        self.assertEqual(arithmetic_verdict(theta, a_value=100, brjuno_bound=1.0).kind, "inconclusive")


if __name__ == "__main__":
    unittest.main()
