import os
import unittest

import numpy as np
from scipy import ndimage

from dynamics.errors import ConfigurationError, InadmissibleDisk, NonCommutingPair
from dynamics.invariant_set import (
    AdmissibleDisk,
    boundary_cells,
    boundary_contact,
    cell_centers,
    common_invariant_set,
    fill_complement,
    fill_mask,
    nesting_check,
    trapped_set,
    verify_complete_invariance,
    zero_boundary_position,
)
from utils.expressions import parse_map

SLOW = os.environ.get("HOLONOMY_SLOW_TESTS") == "1"
SERRE = "mobius(1,0,-1,1)"


def filled_grid(text, radius, resolution, max_iter, workers=1):
    disk = AdmissibleDisk.check(parse_map(text), radius)
    return disk, fill_complement(trapped_set(disk, resolution, max_iter, workers))


def translation_oracle(radius, resolution, a_bound=None):
    """
    Cells whose centers avoid every disk D(a + b i, 1/r) in xi = 1/w.

    Without a_bound only the real translations a are used, which is the
    parabolic map w/(1-w); with it, a runs over |a| <= a_bound and b over
    all integers, which is the pair w/(1-w), w/(1-iw).
    """
    centers = cell_centers(radius, resolution)
    xi = 1 / np.where(centers == 0, 1, centers)
    a = np.rint(xi.real)
    if a_bound is None:
        gap = np.abs(xi - a)
    else:
        gap = np.abs(xi - np.clip(a, -a_bound, a_bound) - 1j * np.rint(xi.imag))
    oracle = gap >= 1 / radius
    oracle[centers == 0] = True
    return oracle


def assert_close_to_oracle(test, mask, oracle, cells):
    """Every cell where mask and oracle differ lies within `cells` of the oracle's edge."""
    block = np.ones((3, 3), dtype=bool)
    grown = ndimage.binary_dilation(oracle, block, iterations=cells)
    shrunk = ndimage.binary_erosion(oracle, block, iterations=cells)
    test.assertFalse((mask & ~grown).any())
    test.assertFalse((~mask & shrunk).any())


class RotationDiskTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.disk, cls.grid = filled_grid("rot(golden)", 1.0, 33, 100)

    def test_trapped_set_is_the_disk(self):
        inside = np.abs(cell_centers(1.0, 33)) <= 1.0
        np.testing.assert_array_equal(self.grid.occupancy_s, inside)
        np.testing.assert_array_equal(self.grid.filled, inside)
        self.assertEqual(self.grid.indeterminate_count, 0)

    def test_origin_sits_at_the_central_cell(self):
        self.assertEqual(self.grid.origin, (16, 16))
        self.assertEqual(cell_centers(1.0, 33)[16, 16], 0)

    def test_even_resolution_keeps_zero_as_a_center(self):
        even = cell_centers(1.0, 4)
        np.testing.assert_allclose(even[0].real, [-1.0, -0.5, 0.0, 0.5])
        np.testing.assert_allclose(even[:, 0].imag, [-1.0, -0.5, 0.0, 0.5])
        self.assertEqual(even[2, 2], 0)
        odd = cell_centers(1.0, 5)[0].real
        np.testing.assert_allclose(odd, -odd[::-1])

    def test_shape_checks(self):
        self.assertEqual(zero_boundary_position(self.grid).kind, "interior")
        contact = boundary_contact(self.grid)
        self.assertTrue(contact.contact)
        self.assertTrue(contact.in_hypothesis)
        report = verify_complete_invariance(self.grid, self.disk.kernel)
        self.assertEqual(report.max_offset, 0)
        self.assertTrue(report.passed)

    def test_boundary_cells_lie_in_k(self):
        edge = boundary_cells(self.grid)
        self.assertTrue(edge.any())
        self.assertFalse((edge & ~self.grid.filled).any())
        self.assertFalse(edge[self.grid.origin])


class ParabolicTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.disk, cls.grid = filled_grid(SERRE, 1 / 3, 65, 200)

    def test_trapped_cells_follow_horizontal_lines(self):
        # xi = 1/w turns the map into xi -> xi - 1, so orbits keep Im(1/w)
        centers = cell_centers(1 / 3, 65)
        modulus = np.abs(centers)
        usable = (modulus >= 0.05) & (modulus <= 1 / 3 - 0.02)
        height = np.abs(np.imag(1 / np.where(usable, centers, 1)))
        trapped = self.grid.occupancy_s
        self.assertTrue(trapped[usable & (height > 3.5)].all())
        self.assertFalse(trapped[usable & (height < 2.5)].any())

    def test_zero_is_on_the_boundary(self):
        self.assertEqual(zero_boundary_position(self.grid).kind, "boundary")
        self.assertTrue(boundary_contact(self.grid).contact)

    def test_nesting_across_radii(self):
        _, small = filled_grid(SERRE, 1 / 4, 65, 200)
        report = nesting_check(small, self.grid)
        self.assertEqual(report.kind, "small_in_large")
        self.assertFalse(report.large_in_small)

    def test_matches_translation_oracle(self):
        assert_close_to_oracle(self, self.grid.filled, translation_oracle(1 / 3, 65), 2)

    def test_more_iterates_trap_fewer_cells(self):
        _, short = filled_grid(SERRE, 1 / 3, 65, 20)
        self.assertFalse((self.grid.occupancy_s & ~short.occupancy_s).any())
        self.assertGreaterEqual(short.occupancy_s.sum(), self.grid.occupancy_s.sum())

    def test_filling_is_idempotent(self):
        filled = self.grid.filled
        np.testing.assert_array_equal(fill_mask(filled), filled)
        self.assertFalse((self.grid.occupancy_s & ~filled).any())

    def test_disk_through_the_pole_is_inadmissible(self):
        with self.assertRaises(InadmissibleDisk):
            AdmissibleDisk.check(parse_map(SERRE), 1.0)


class FillTests(unittest.TestCase):
    def ring(self):
        mask = np.zeros((7, 7), dtype=bool)
        mask[1, 1:6] = mask[5, 1:6] = mask[1:6, 1] = mask[1:6, 5] = True
        return mask

    def test_closed_ring_is_filled(self):
        filled = fill_mask(self.ring())
        self.assertTrue(filled[2:5, 2:5].all())
        self.assertFalse(filled[0].any())

    def test_side_gap_leaks(self):
        mask = self.ring()
        mask[1, 3] = False
        np.testing.assert_array_equal(fill_mask(mask), mask)

    def test_corner_gap_does_not_leak(self):
        mask = self.ring()
        mask[1, 1] = False
        filled = fill_mask(mask)
        self.assertTrue(filled[2:5, 2:5].all())
        self.assertFalse(filled[1, 1])


class GridPolicyTests(unittest.TestCase):
    def test_worker_count_does_not_change_the_grid(self):
        disk = AdmissibleDisk.check(parse_map(SERRE), 1 / 3)
        one = trapped_set(disk, 40, 50, workers=1)
        two = trapped_set(disk, 40, 50, workers=2)
        np.testing.assert_array_equal(one.occupancy_s, two.occupancy_s)
        np.testing.assert_array_equal(one.indeterminate, two.indeterminate)

    def test_resolution_range(self):
        disk = AdmissibleDisk.check(parse_map("rot(golden)"), 1.0)
        with self.assertRaises(ConfigurationError):
            trapped_set(disk, 2, 10, workers=1)

    def test_common_set_of_two_rotations(self):
        disk = AdmissibleDisk.check(parse_map("lin(i)"), 1.0)
        grid = common_invariant_set(disk, parse_map("rot(golden)"), 33, max_iter=50, workers=1)
        np.testing.assert_array_equal(grid.filled, np.abs(cell_centers(1.0, 33)) <= 1.0)
        self.assertTrue(grid.indifferent)

    def test_common_set_of_two_translations_matches_lattice_oracle(self):
        # in xi = 1/w the pair translates by 1 and i, so only a cusp at 0 avoids the lattice disks
        disk = AdmissibleDisk.check(parse_map(SERRE), 1 / 4)
        grid = common_invariant_set(disk, parse_map("mobius(1,0,-i,1)"), 33, max_iter=100,
                                    word_bound=16, workers=1)
        assert_close_to_oracle(self, grid.filled, translation_oracle(1 / 4, 33, a_bound=16), 1)
        self.assertLess(np.abs(cell_centers(1 / 4, 33)[grid.filled]).max(), 0.1)

    def test_common_set_needs_commuting_maps(self):
        disk = AdmissibleDisk.check(parse_map("poly(1,1)"), 0.1)
        with self.assertRaises(NonCommutingPair):
            common_invariant_set(disk, parse_map("poly(1,0,1)"), 17, max_iter=10, workers=1)

    @unittest.skipUnless(SLOW, "set HOLONOMY_SLOW_TESTS=1")
    def test_full_resolution_parabolic(self):
        _, grid = filled_grid(SERRE, 1 / 3, 512, 10 ** 4, workers=None)
        self.assertEqual(zero_boundary_position(grid).kind, "boundary")
        self.assertTrue(boundary_contact(grid).contact)
        self.assertEqual(grid.indeterminate_count, 0)
        assert_close_to_oracle(self, grid.filled, translation_oracle(1 / 3, 512), 2)


if __name__ == "__main__":
    unittest.main()
