import os

import numpy as np

from utils.helpers import dumps_json, sha256_hex, write_bytes, write_text

OUTSIDE = 0
TRAPPED = 128
FILLED = 255


def grid_levels(grid):
    """
    Gray levels per cell: 0 outside K, 128 in S, 255 in K but not S.

    Args:
        grid: InvariantSetGrid, filled or not

    Returns:
        uint8 array with row 0 at the bottom (Im z = -r)
    """
    levels = np.full(grid.occupancy_s.shape, OUTSIDE, dtype=np.uint8)
    if grid.occupancy_k is not None:
        levels[grid.occupancy_k] = FILLED
    levels[grid.occupancy_s] = TRAPPED
    return levels


def pgm_bytes(grid):
    """
    Binary PGM (P5) image of the grid, imaginary axis pointing up.

    Args:
        grid: InvariantSetGrid

    Returns:
        bytes
    """
    levels = np.flipud(grid_levels(grid))
    n = grid.resolution
    header = f"P5\n{n} {n}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(levels).tobytes()


def grid_csv(grid):
    """CSV text with one line per cell: row, col, in_s, in_k."""
    s = grid.occupancy_s.astype(np.uint8)
    k = grid.filled.astype(np.uint8)
    rows, cols = np.indices(s.shape)
    lines = ["row,col,in_s,in_k"]
    lines.extend(f"{r},{c},{a},{b}" for r, c, a, b in
                 zip(rows.ravel(), cols.ravel(), s.ravel(), k.ravel()))
    return "\n".join(lines) + "\n"


def grid_metadata(grid, image):
    """
    JSON sidecar for a grid image.

    Args:
        grid: InvariantSetGrid
        image: The PGM bytes the checksum covers

    Returns:
        dict
    """
    return {
        "map": grid.map_label,
        "radius": grid.radius,
        "resolution": grid.resolution,
        "cell_size": grid.cell_size,
        "max_iter": grid.max_iter,
        "indeterminate": grid.indeterminate_count,
        "trapped_cells": int(grid.occupancy_s.sum()),
        "filled_cells": int(grid.filled.sum()),
        "checksum": sha256_hex(image),
    }


def write_grid_files(grid, stem, csv_path=None):
    """
    Write ``<stem>.pgm`` and ``<stem>.json``, plus the per-cell CSV on request.

    Args:
        grid: InvariantSetGrid
        stem: Output path without extension
        csv_path: Optional destination of the per-cell CSV

    Returns:
        (metadata dict, list of written paths)
    """
    stem = os.path.splitext(stem)[0] if stem.endswith(".pgm") else stem
    image = pgm_bytes(grid)
    metadata = grid_metadata(grid, image)
    written = [
        write_bytes(f"{stem}.pgm", image),
        write_text(f"{stem}.json", dumps_json(metadata)),
    ]
    if csv_path:
        written.append(write_text(csv_path, grid_csv(grid)))
    return metadata, written
