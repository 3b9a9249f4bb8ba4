"""
Grid approximations of completely invariant sets around an indifferent
fixed point.

The disk [-r, r]^2 is cut into N x N cells of side h = 2r/N whose centers
sit at (j - N//2) h, so the origin is the center of cell (N//2, N//2). A
cell belongs to the trapped set S when its center stays in the closed disk
under max_iter forward and max_iter backward iterates; the filled hull K
adds every cell enclosed by S. Rows index the imaginary part.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import ndimage

from dynamics.classify import DEFAULT_COMMUTATOR_TOLERANCE, VerdictPolicy, pair_from_maps, require_commuting
from dynamics.errors import ConfigurationError, InadmissibleDisk
from utils.helpers import status
from utils.parallel import map_blocks, row_blocks

DEFAULT_MAX_ITER = 10 ** 4
DEFAULT_WORD_BOUND = 16
MIN_RESOLUTION = 3
MAX_RESOLUTION = 4096
ESCAPE_SLACK = 1e-9
ADMISSIBLE_MARGIN = 1.05
COMMUTATOR_ORDER = 24

_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)
_EIGHT_CONNECTED = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class AdmissibleDisk:
    radius: float
    map: object
    kernel: object

    @classmethod
    def check(cls, map_, radius, rays=64):
        """
        Sample f and f^-1 on rings out to 1.05 r and require finite values
        and nonvanishing derivatives.

        Raises:
            InadmissibleDisk: a sample fails
        """
        if not radius > 0:
            raise InadmissibleDisk(f"radius must be positive, got {radius}")
        kernel = map_.kernel()
        rings = np.array([0.25, 0.5, 0.75, 1.0, ADMISSIBLE_MARGIN]) * radius
        angles = np.exp(2j * np.pi * np.arange(rays) / rays)
        mesh = np.concatenate([[0j], np.outer(rings, angles).ravel()])
        mesh = mesh[np.abs(mesh) <= map_.validity_radius]

        for direction, evaluate, derivative in (
                ("f", kernel.forward, kernel.derivative),
                ("f^-1", kernel.backward, lambda z: kernel.backward_derivative(z)[0])):
            values, bad = evaluate(mesh)
            slopes = derivative(mesh)
            if bad.any() or not np.all(np.isfinite(values)):
                where = mesh[bad | ~np.isfinite(values)][0]
                raise InadmissibleDisk(f"{direction} is not evaluable at {where:.4g} for r = {radius}")
            if not np.all(np.isfinite(slopes)) or np.any(np.abs(slopes) < 1e-12):
                where = mesh[~np.isfinite(slopes) | (np.abs(slopes) < 1e-12)][0]
                raise InadmissibleDisk(
                    f"the derivative of {direction} degenerates at {where:.4g} for r = {radius}")
        return cls(float(radius), map_, kernel)


@dataclass(frozen=True)
class InvariantSetGrid:
    radius: float
    resolution: int
    max_iter: int
    occupancy_s: np.ndarray
    occupancy_k: Optional[np.ndarray] = None
    indeterminate: Optional[np.ndarray] = None
    map_label: str = ""
    indifferent: bool = True

    @property
    def cell_size(self):
        return 2.0 * self.radius / self.resolution

    @property
    def origin(self):
        return self.resolution // 2, self.resolution // 2

    @property
    def filled(self):
        return self.occupancy_k if self.occupancy_k is not None else self.occupancy_s

    @property
    def indeterminate_count(self):
        return int(self.indeterminate.sum()) if self.indeterminate is not None else 0

    def centers(self):
        return cell_centers(self.radius, self.resolution)

    def cell_of(self, z):
        """Row and column of the cell nearest to each point; may fall outside the frame."""
        z = np.asarray(z, dtype=np.complex128)
        h = self.cell_size
        half = self.resolution // 2
        cols = np.rint(z.real / h).astype(np.int64) + half
        rows = np.rint(z.imag / h).astype(np.int64) + half
        return rows, cols


def cell_centers(radius, resolution):
    """
    Centers (j - N//2)*h of an N x N frame with h = 2r/N, so 0 is always a center.

    Odd N gives a frame symmetric about 0. Even N spans [-r, r - h] on both
    axes: the extra column and row sit on the negative side.
    """
    h = 2.0 * radius / resolution
    axis = (np.arange(resolution) - resolution // 2) * h
    return axis[np.newaxis, :] + 1j * axis[:, np.newaxis]


def _check_resolution(resolution):
    if not MIN_RESOLUTION <= resolution <= MAX_RESOLUTION:
        raise ConfigurationError(
            f"grid resolution must lie in {MIN_RESOLUTION}..{MAX_RESOLUTION}, got {resolution}")


def _bidirectional(kernel, z, radius, max_iter):
    """
    Trapped and indeterminate flags for points z under max_iter iterates in
    each direction. Points that escape drop out of the active set.
    """
    bound = radius * (1.0 + ESCAPE_SLACK)
    trapped = np.abs(z) <= bound
    unknown = np.zeros(z.shape, dtype=bool)
    for step in (kernel.forward, kernel.backward):
        index = np.flatnonzero(trapped)
        current = z[index]
        for _ in range(max_iter):
            if index.size == 0:
                break
            current, bad = step(current)
            escaped = ~bad & (np.abs(current) > bound)
            trapped[index[bad | escaped]] = False
            unknown[index[bad]] = True
            keep = ~(bad | escaped)
            index, current = index[keep], current[keep]
    return trapped, unknown


def _trap_rows(kernel, radius, resolution, start, stop, max_iter):
    z = cell_centers(radius, resolution)[start:stop].ravel()
    trapped, unknown = _bidirectional(kernel, z, radius, max_iter)
    shape = (stop - start, resolution)
    return trapped.reshape(shape), unknown.reshape(shape)


def _common_rows(f_kernel, g_kernel, radius, resolution, start, stop, max_iter, word_bound):
    z = cell_centers(radius, resolution)[start:stop].ravel()
    bound = radius * (1.0 + ESCAPE_SLACK)
    trapped = np.abs(z) <= bound
    unknown = np.zeros(z.shape, dtype=bool)
    for step in (None, f_kernel.forward, f_kernel.backward):
        index = np.flatnonzero(trapped)
        current = z[index]
        for _ in range(1 if step is None else word_bound):
            if index.size == 0:
                break
            if step is not None:
                current, bad = step(current)
                escaped = ~bad & (np.abs(current) > bound)
                trapped[index[bad | escaped]] = False
                unknown[index[bad]] = True
                keep = ~(bad | escaped)
                index, current = index[keep], current[keep]
            inner, inner_unknown = _bidirectional(g_kernel, current, radius, max_iter)
            trapped[index[~inner]] = False
            unknown[index[inner_unknown]] = True
            index, current = index[inner], current[inner]
    shape = (stop - start, resolution)
    return trapped.reshape(shape), unknown.reshape(shape)


def _assemble(blocks, resolution):
    trapped = np.vstack([b[0] for b in blocks]) if blocks else np.zeros((0, resolution), bool)
    unknown = np.vstack([b[1] for b in blocks]) if blocks else np.zeros((0, resolution), bool)
    return trapped, unknown


def _is_indifferent(kernel):
    slope = kernel.derivative(np.zeros(1, dtype=np.complex128))[0]
    return bool(abs(abs(slope) - 1.0) < 1e-12)


def trapped_set(disk, resolution, max_iter=DEFAULT_MAX_ITER, workers=None):
    """
    Cells whose centers stay in the closed disk for |n| <= max_iter.

    Args:
        disk: AdmissibleDisk carrying the map and its numeric kernel
        resolution: N
        max_iter: Iterates in each direction
        workers: joblib worker count; the result does not depend on it

    Returns:
        InvariantSetGrid with occupancy_s and the indeterminate mask
    """
    _check_resolution(resolution)
    tasks = [(disk.kernel, disk.radius, resolution, start, stop, max_iter)
             for start, stop in row_blocks(resolution)]
    trapped, unknown = _assemble(map_blocks(_trap_rows, tasks, workers), resolution)
    return _finish(disk, resolution, max_iter, trapped, unknown, disk.map.describe())


def _finish(disk, resolution, max_iter, trapped, unknown, label):
    row, col = resolution // 2, resolution // 2
    trapped[row, col] = True
    count = int(unknown.sum())
    if count:
        status(f"{count} cells left the validity region and are marked indeterminate", "⚠️")
    return InvariantSetGrid(
        radius=disk.radius,
        resolution=resolution,
        max_iter=max_iter,
        occupancy_s=trapped,
        indeterminate=unknown,
        map_label=label,
        indifferent=_is_indifferent(disk.kernel),
    )


def fill_mask(mask):
    """Add every unoccupied cell not 4-connected to the frame."""
    labels, _ = ndimage.label(~mask, structure=_FOUR_CONNECTED)
    border = np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    outside = np.isin(labels, np.unique(border[border > 0]))
    return mask | (~mask & ~outside)


def fill_complement(grid):
    """Populate occupancy_k by flood filling from the frame."""
    filled = fill_mask(grid.occupancy_s)
    filled[grid.origin] = True
    return replace(grid, occupancy_k=filled)


@dataclass(frozen=True)
class InvarianceReport:
    max_offset: int
    offending: int
    unevaluable: int
    checked: int
    tol_cells: int

    @property
    def passed(self):
        return self.max_offset <= self.tol_cells and self.unevaluable == 0

    def to_json(self):
        return {
            "max_offset": self.max_offset,
            "offending": self.offending,
            "unevaluable": self.unevaluable,
            "checked": self.checked,
            "tol_cells": self.tol_cells,
            "passed": self.passed,
        }


def _offsets(grid, points):
    """Chebyshev distance in cells from each point's cell to the nearest K cell, minus one."""
    k = grid.filled
    n = grid.resolution
    distance = ndimage.distance_transform_cdt(~k, metric="chessboard")
    rows, cols = grid.cell_of(points)
    clamped_rows = np.clip(rows, 0, n - 1)
    clamped_cols = np.clip(cols, 0, n - 1)
    overshoot = np.maximum(np.abs(rows - clamped_rows), np.abs(cols - clamped_cols))
    cells = distance[clamped_rows, clamped_cols] + overshoot
    return np.maximum(cells - 1, 0)


def verify_complete_invariance(grid, kernel, tol_cells=1):
    """
    Map every K cell center forward and backward and measure how far the
    images land from K, in cells beyond the one-cell sampling uncertainty.
    """
    rows, cols = np.nonzero(grid.filled)
    centers = grid.centers()[rows, cols]
    offsets, unevaluable = [], 0
    for step in (kernel.forward, kernel.backward):
        images, bad = step(centers)
        unevaluable += int(bad.sum())
        offsets.append(_offsets(grid, images[~bad]))
    offsets = np.concatenate(offsets) if offsets else np.zeros(0, dtype=np.int64)
    return InvarianceReport(
        max_offset=int(offsets.max()) if offsets.size else 0,
        offending=int((offsets > tol_cells).sum()),
        unevaluable=unevaluable,
        checked=int(centers.size),
        tol_cells=int(tol_cells),
    )


@dataclass(frozen=True)
class ContactReport:
    contact: bool
    cells: int
    in_hypothesis: bool

    def to_json(self):
        return {"kind": "contact" if self.contact else "no_contact", "cells": self.cells,
                "in_hypothesis": self.in_hypothesis}


def boundary_contact(grid):
    """Whether K reaches the annulus r - h <= |z| <= r."""
    modulus = np.abs(grid.centers())
    annulus = (modulus >= grid.radius - grid.cell_size) & (modulus <= grid.radius * (1.0 + ESCAPE_SLACK))
    cells = int((grid.filled & annulus).sum())
    if not grid.indifferent:
        status("Boundary contact requested for a non-indifferent fixed point", "⚠️")
    return ContactReport(cells > 0, cells, grid.indifferent)


@dataclass(frozen=True)
class ZeroPosition:
    kind: str
    in_hypothesis: bool

    def to_json(self):
        return {"kind": self.kind, "in_hypothesis": self.in_hypothesis}


def zero_boundary_position(grid):
    """Interior when all eight neighbours of the origin cell lie in K."""
    row, col = grid.origin
    window = grid.filled[max(row - 1, 0):row + 2, max(col - 1, 0):col + 2]
    interior = window.shape == (3, 3) and bool(window.all())
    return ZeroPosition("interior" if interior else "boundary", grid.indifferent)


def boundary_cells(grid):
    """K cells with an 8-neighbour outside K, or on the frame."""
    k = grid.filled
    eroded = ndimage.binary_erosion(k, structure=_EIGHT_CONNECTED, border_value=0)
    return k & ~eroded


@dataclass(frozen=True)
class NestingReport:
    kind: str
    small_in_large: bool
    large_in_small: bool
    tol_cells: int

    def to_json(self):
        return {"kind": self.kind, "small_in_large": self.small_in_large,
                "large_in_small": self.large_in_small, "tol_cells": self.tol_cells}


def _contained(inner, outer, tol_cells):
    """Every K cell of ``inner``, resampled onto ``outer``'s cells, hits dilated K of ``outer``."""
    rows, cols = np.nonzero(inner.filled)
    points = inner.centers()[rows, cols]
    target_rows, target_cols = outer.cell_of(points)
    n = outer.resolution
    inside = (target_rows >= 0) & (target_rows < n) & (target_cols >= 0) & (target_cols < n)
    if not inside.all():
        return False
    grown = outer.filled
    if tol_cells > 0:
        grown = ndimage.binary_dilation(grown, structure=_EIGHT_CONNECTED, iterations=tol_cells)
    return bool(grown[target_rows, target_cols].all())


def nesting_check(grid_small, grid_large, tol_cells=1):
    """Containment of one filled set in the other, up to tol_cells dilation."""
    small_in_large = _contained(grid_small, grid_large, tol_cells)
    large_in_small = _contained(grid_large, grid_small, tol_cells)
    if small_in_large:
        kind = "small_in_large"
    elif large_in_small:
        kind = "large_in_small"
    else:
        kind = "violation"
        status("Neither invariant set contains the other", "⚠️")
    return NestingReport(kind, small_in_large, large_in_small, int(tol_cells))


def common_invariant_set(f_disk, g_map, resolution, max_iter=DEFAULT_MAX_ITER,
                         word_bound=DEFAULT_WORD_BOUND, workers=None,
                         commutator_tolerance=DEFAULT_COMMUTATOR_TOLERANCE):
    """
    Cells trapped by every word f^a g^b with |a| <= word_bound, |b| <= max_iter.

    Commutativity lets each f^a(z) be followed by a bidirectional g orbit.

    Raises:
        NonCommutingPair: the germs of f and g do not commute

    Returns:
        Filled InvariantSetGrid
    """
    _check_resolution(resolution)
    pair = pair_from_maps(f_disk.map, g_map, VerdictPolicy(truncation=COMMUTATOR_ORDER))
    require_commuting(pair, commutator_tolerance)
    g_disk = AdmissibleDisk.check(g_map, f_disk.radius)
    tasks = [(f_disk.kernel, g_disk.kernel, f_disk.radius, resolution, start, stop,
              max_iter, word_bound)
             for start, stop in row_blocks(resolution)]
    trapped, unknown = _assemble(map_blocks(_common_rows, tasks, workers), resolution)
    label = f"<{f_disk.map.describe()}, {g_map.describe()}>"
    grid = _finish(f_disk, resolution, max_iter, trapped, unknown, label)
    if not _is_indifferent(g_disk.kernel):
        grid = replace(grid, indifferent=False)
    return fill_complement(grid)
