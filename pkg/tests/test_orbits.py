import cmath
import os
import unittest

from dynamics.arithmetic import parse_rotation_number
from dynamics.classify import VerdictPolicy
from dynamics.errors import ConfigurationError
from dynamics.invariant_set import AdmissibleDisk, fill_complement, trapped_set
from dynamics.orbits import (
    PeriodicCycle,
    boundary_coverage,
    boundary_seed,
    certify_cycle,
    cycle_radius_trend,
    find_small_cycles,
    orbit_probe,
    resolve_periods,
    start_mesh,
)
from dynamics.suspension import catalog_model
from providers import BinaryFloatField
from utils.expressions import parse_map

FLOAT = BinaryFloatField(128)
SLOW = os.environ.get("HOLONOMY_SLOW_TESTS") == "1"


def cycle(period, radius):
    return PeriodicCycle(period=period, points=(complex(radius),), radius=radius,
                         residual=0.0, precision_bits=128)


class CycleSearchTests(unittest.TestCase):
    def test_repelling_fixed_point_of_a_quadratic(self):
        # -z + z^2 fixes 0 and 2, with P'(2) = 3
        poly = parse_map("poly(-1,1)")
        cycles = find_small_cycles(poly, [1], search_radius=3.0, bits=128, rings=4, rays=8, workers=1)
        self.assertEqual(len(cycles), 1)
        found = cycles[0]
        self.assertAlmostEqual(found.points[0], 2, places=12)
        self.assertAlmostEqual(found.radius, 2.0, places=12)
        self.assertAlmostEqual(found.multiplier, 3, places=10)
        residual, passed = certify_cycle(poly, found)
        self.assertTrue(passed)
        self.assertLess(residual, 1e-16)

    def test_linear_maps_are_rejected(self):
        with self.assertRaises(ConfigurationError):
            find_small_cycles(parse_map("poly(rot(golden))"), [1], workers=1)

    def test_start_mesh_is_seeded(self):
        plain = start_mesh(0.5, rings=3, rays=4)
        self.assertEqual(len(plain), 12)
        self.assertEqual(start_mesh(0.5, rings=3, rays=4, seed=9), start_mesh(0.5, rings=3, rays=4, seed=9))
        self.assertEqual(sorted(start_mesh(0.5, rings=3, rays=4, seed=9)), sorted(plain))

    def test_radius_trend(self):
        trend = cycle_radius_trend([cycle(1, 0.5), cycle(2, 0.1), cycle(2, 0.3), cycle(3, 0.2)])
        self.assertEqual(trend["radii"], [[1, 0.5], [2, 0.1], [3, 0.2]])
        self.assertFalse(trend["monotone"])
        self.assertEqual(trend["violations"], [[2, 3]])
        self.assertTrue(cycle_radius_trend([cycle(1, 0.5), cycle(2, 0.1)])["monotone"])

    @unittest.skipUnless(SLOW, "set HOLONOMY_SLOW_TESTS=1 for the 512-bit period-10 search")
    def test_period_ten_cycle_near_a_near_resonant_quadratic(self):
        poly = parse_map("poly(rot(cf:[0;10,100,10000]),1)")
        cycles = find_small_cycles(poly, [10], bits=512)
        self.assertTrue(cycles)
        smallest = cycles[0]
        self.assertEqual(smallest.period, 10)
        self.assertLess(smallest.radius, 0.5)
        self.assertLessEqual(smallest.residual, 1e-64)
        self.assertGreater(abs(smallest.multiplier - 1), 1e-6)
        self.assertTrue(certify_cycle(poly, smallest)[1])


class PeriodListTests(unittest.TestCase):
    def test_symbolic_denominators(self):
        theta = parse_rotation_number("cf:[0;10,100]")
        self.assertEqual(resolve_periods("q1,q2", theta), [10, 1001])
        self.assertEqual(resolve_periods("3, q1", theta), [3, 10])

    def test_bad_period_lists(self):
        for text, theta in (("q1", None), ("", None), ("x", None), ("q99", parse_rotation_number("1/3"))):
            with self.assertRaises(ConfigurationError, msg=text):
                resolve_periods(text, theta)


class OrbitProbeTests(unittest.TestCase):
    def test_rotation_orbit(self):
        trace = orbit_probe(parse_map("rot(golden)"), 0.5, 100, FLOAT, delta=0.1)
        self.assertAlmostEqual(trace.min_modulus, 0.5, places=12)
        self.assertEqual(trace.first_return, 21)
        self.assertFalse(trace.truncated)
        self.assertFalse(trace.outside_hypothesis)
        again = orbit_probe(parse_map("rot(golden)"), 0.5, 100, FLOAT, delta=0.1)
        self.assertEqual(trace.checksum, again.checksum)
        self.assertEqual(trace.to_json()["n"], 100)

    def test_attracting_map_is_outside_hypothesis(self):
        trace = orbit_probe(parse_map("poly(1/2,1)"), 0.1, 20, FLOAT)
        self.assertTrue(trace.outside_hypothesis)
        self.assertEqual(trace.min_at, 20)

    def test_orbit_through_the_pole_is_truncated(self):
        trace = orbit_probe(parse_map("mobius(1,0,-1,1)"), 0.5, 10, FLOAT)
        self.assertTrue(trace.truncated)
        self.assertEqual(len(trace.samples), 2)

    def test_cremer_fixture_orbits_stay_away_from_zero(self):
        g = catalog_model("ueda-cremer", VerdictPolicy(truncation=16)).pair.g_map
        field_ = BinaryFloatField(512)
        for k in range(8):
            seed = 1e-3 * cmath.exp(2j * cmath.pi * k / 8)
            trace = orbit_probe(g, seed, 2000, field_)
            self.assertGreater(trace.min_modulus, 1e-6, msg=f"ray {k}")
            self.assertFalse(trace.truncated)
            self.assertFalse(trace.outside_hypothesis)
            self.assertTrue(trace.to_json()["empirical"])
        again = orbit_probe(g, seed, 2000, field_)
        self.assertEqual(again.checksum, trace.checksum)

    def test_zero_seed(self):
        with self.assertRaises(ConfigurationError):
            orbit_probe(parse_map("rot(golden)"), 0, 10, FLOAT)


class CoverageTests(unittest.TestCase):
    def test_coverage_grows(self):
        disk = AdmissibleDisk.check(parse_map("rot(golden)"), 1.0)
        grid = fill_complement(trapped_set(disk, 33, 20, workers=1))
        seed = boundary_seed(grid)
        curve = boundary_coverage(grid, disk.kernel, seed, 200)
        fractions = [f for _, f in curve.checkpoints]
        self.assertEqual(len(fractions), 10)
        self.assertEqual(fractions, sorted(fractions))
        self.assertGreater(fractions[-1], 0.5)
        self.assertFalse(curve.truncated)
        self.assertTrue(curve.in_hypothesis)

    def test_quarter_turn_coverage_plateaus(self):
        disk = AdmissibleDisk.check(parse_map("rot(1/4)"), 1.0)
        grid = fill_complement(trapped_set(disk, 33, 20, workers=1))
        curve = boundary_coverage(grid, disk.kernel, boundary_seed(grid), 200)
        fractions = {f for _, f in curve.checkpoints}
        self.assertEqual(len(fractions), 1)
        visited = fractions.pop() * curve.boundary_cells
        self.assertGreater(visited, 0)
        self.assertLessEqual(visited, 4 * 9)

    def test_coverage_needs_steps(self):
        disk = AdmissibleDisk.check(parse_map("rot(golden)"), 1.0)
        grid = fill_complement(trapped_set(disk, 17, 5, workers=1))
        with self.assertRaises(ConfigurationError):
            boundary_coverage(grid, disk.kernel, boundary_seed(grid), 0)


if __name__ == "__main__":
    unittest.main()
