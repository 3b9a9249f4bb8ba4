"""
Orbit experiments: small periodic cycles of Cremer-type polynomials,
recurrence probes and boundary coverage of dense orbits.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from dynamics.arithmetic import continued_fraction
from dynamics.errors import ConfigurationError, OutsideValidity, PrecisionExhausted
from dynamics.invariant_set import boundary_cells
from providers import BinaryFloatField
from utils.helpers import sha256_hex, status
from utils.parallel import map_blocks

DEFAULT_CYCLE_BITS = 512
DEFAULT_SEARCH_RADIUS = 0.5
INNER_RADIUS = 1e-6
DEFAULT_RINGS = 16
DEFAULT_RAYS = 24
MAX_NEWTON_STEPS = 200
ESCAPE_FACTOR = 4.0
START_CHUNK = 32


@dataclass(frozen=True)
class PeriodicCycle:
    period: int
    points: Tuple[complex, ...]
    radius: float
    residual: float
    precision_bits: int
    multiplier: complex = 0j
    exact_points: Tuple[Tuple[str, str], ...] = ()

    def to_json(self):
        return {
            "period": self.period,
            "points": [[z.real, z.imag] for z in self.points],
            "radius": self.radius,
            "residual": self.residual,
            "precision_bits": self.precision_bits,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
        }


def certification_threshold(bits):
    return 10.0 ** (-bits / 8.0)


def _divisors(q):
    return [d for d in range(1, q) if q % d == 0]


def _orbit(coeffs, z, q, escape):
    """z, P(z), ..., P^q(z) and the chain-rule derivative of P^q at z."""
    points = [z]
    slope = 1
    for _ in range(q):
        w = points[-1]
        value, derivative = 0, 0
        for n in range(len(coeffs), 0, -1):
            value = (value + coeffs[n - 1]) * w
            derivative = derivative * w + n * coeffs[n - 1]
        slope = slope * derivative
        if abs(value) > escape:
            return None, None
        points.append(value)
    return points, slope


def _newton_chunk(bits, coefficient_text, q, starts, search_radius):
    """Newton on P^q(z) - z from each start; runs inside a worker."""
    field_ = BinaryFloatField(bits)
    ctx = field_.ctx
    coeffs = [field_.deserialize(c) for c in coefficient_text]
    escape = ESCAPE_FACTOR * search_radius
    tolerance = ctx.ldexp(1, -bits + 16)
    roots = []
    for re_, im_ in starts:
        z = ctx.mpc(re_, im_)
        for _ in range(MAX_NEWTON_STEPS):
            points, slope = _orbit(coeffs, z, q, escape)
            if points is None or slope == 1:
                break
            step = (points[-1] - z) / (slope - 1)
            z = z - step
            if abs(z) > escape:
                break
            if abs(step) <= tolerance * (1 + abs(z)):
                roots.append(tuple(field_.serialize(z)))
                break
    return roots


def start_mesh(search_radius, rings=DEFAULT_RINGS, rays=DEFAULT_RAYS, seed=None):
    """
    Log-spaced rings between 1e-6 and the search radius, crossed with rays.

    The ray angles of consecutive rings are staggered by half a step. A seed
    shuffles the order; the default order is fixed.
    """
    radii = np.geomspace(INNER_RADIUS, search_radius, rings)
    starts = []
    for k, rho in enumerate(radii):
        offset = 0.5 * (k % 2)
        for j in range(rays):
            angle = 2 * np.pi * (j + offset) / rays
            starts.append((float(rho * np.cos(angle)), float(rho * np.sin(angle))))
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(starts))
        starts = [starts[i] for i in order]
    return starts


def _poly_coefficients(poly, field_):
    return [poly.multiplier.value(field_)] + [field_.coerce(c) for c in poly.coeffs]


def _cycle_from_root(coeffs, z, q, field_, threshold):
    """Validate a Newton root and build its cycle, or None."""
    points, slope = _orbit(coeffs, z, q, float("inf"))
    if points is None:
        return None
    if abs(z) < INNER_RADIUS / 10:
        return None
    if abs(points[-1] - z) > threshold:
        return None
    for d in _divisors(q):
        if abs(points[d] - z) <= threshold:
            return None
    cycle = points[:q]
    residual = max(abs(points[k + 1] - cycle[(k + 1) % q]) for k in range(q))
    residual = max(residual, abs(points[-1] - z))
    if residual > threshold:
        return None
    first = min(range(q), key=lambda k: (abs(cycle[k]), k))
    cycle = cycle[first:] + cycle[:first]
    return PeriodicCycle(
        period=q,
        points=tuple(complex(p) for p in cycle),
        radius=float(max(abs(p) for p in cycle)),
        residual=float(residual),
        precision_bits=field_.bits,
        multiplier=complex(slope),
        exact_points=tuple(tuple(field_.serialize(p)) for p in cycle),
    )


def find_small_cycles(poly, periods, search_radius=DEFAULT_SEARCH_RADIUS, bits=DEFAULT_CYCLE_BITS,
                      rings=DEFAULT_RINGS, rays=DEFAULT_RAYS, seed=None, workers=None):
    """
    Periodic cycles of a polynomial near its fixed point 0.

    Newton runs on P^q(z) - z evaluated by iteration, never by expanding the
    composite, from a mesh of starts in the annulus 1e-6 <= |z| <= radius.
    Roots are kept when they certify to 10^(-bits/8), have exact period q
    and differ from 0; repeated cycles are merged.

    Args:
        poly: PolynomialMap
        periods: Iterable of periods to search
        search_radius: Outer radius of the start annulus
        bits: Working precision
        rings, rays: Shape of the start mesh
        seed: Optional shuffle seed for the start order
        workers: joblib worker count

    Returns:
        List of PeriodicCycle sorted by (period, radius)
    """
    if poly.degree < 2:
        raise ConfigurationError("small cycles need a polynomial of degree at least 2")
    field_ = BinaryFloatField(bits)
    coeffs = _poly_coefficients(poly, field_)
    coefficient_text = [field_.serialize(c) for c in coeffs]
    threshold = certification_threshold(bits)
    starts = start_mesh(search_radius, rings, rays, seed)
    chunks = [starts[k:k + START_CHUNK] for k in range(0, len(starts), START_CHUNK)]

    found = []
    for q in sorted(set(int(p) for p in periods)):
        if q < 1:
            raise ConfigurationError(f"periods must be positive, got {q}")
        tasks = [(bits, coefficient_text, q, chunk, search_radius) for chunk in chunks]
        roots = [root for chunk in map_blocks(_newton_chunk, tasks, workers) for root in chunk]
        cycles = []
        for text in roots:
            z = field_.deserialize(text)
            if any(min(abs(z - field_.deserialize(p)) for p in c.exact_points) < 10 * threshold
                   for c in cycles):
                continue
            cycle = _cycle_from_root(coeffs, z, q, field_, threshold)
            if cycle is not None and cycle.radius <= search_radius * ESCAPE_FACTOR:
                cycles.append(cycle)
        if not cycles:
            status(f"No period-{q} cycle found from {len(starts)} starts", "⚠️")
        found.extend(sorted(cycles, key=lambda c: (c.radius, c.points[0].real, c.points[0].imag)))
    return found


def certify_cycle(poly, cycle, bits=None):
    """
    Re-evaluate a cycle at higher precision.

    Returns:
        (residual, passed) where passed compares against the cycle's own threshold
    """
    bits = bits or 2 * cycle.precision_bits
    field_ = BinaryFloatField(bits)
    coeffs = _poly_coefficients(poly, field_)
    points = [field_.deserialize(p) for p in cycle.exact_points]
    q = cycle.period
    residual = 0
    for k, z in enumerate(points):
        image, _ = _orbit(coeffs, z, 1, float("inf"))
        residual = max(residual, abs(image[1] - points[(k + 1) % q]))
    residual = float(residual)
    return residual, residual <= certification_threshold(cycle.precision_bits)


def cycle_radius_trend(cycles):
    """
    Smallest radius per period and whether it shrinks as the period grows.

    A growing radius is reported, never raised.
    """
    best = {}
    for c in cycles:
        best[c.period] = min(best.get(c.period, c.radius), c.radius)
    radii = sorted(best.items())
    violations = [[a[0], b[0]] for a, b in zip(radii, radii[1:]) if b[1] >= a[1]]
    if violations:
        status("Cycle radii do not shrink along the periods searched", "⚠️")
    return {"radii": [[q, r] for q, r in radii], "monotone": not violations, "violations": violations}


def resolve_periods(text, theta=None, depth=8):
    """
    Parse a period list such as ``10,1001`` or ``q1,q2`` (continued-fraction
    denominators of theta).
    """
    periods = []
    denominators = None
    for item in (p.strip() for p in text.split(",") if p.strip()):
        if item.lower().startswith("q"):
            if theta is None:
                raise ConfigurationError("symbolic periods need a rotation number")
            if denominators is None:
                try:
                    denominators = continued_fraction(theta, depth).denominators
                except PrecisionExhausted as exc:
                    partial = getattr(exc, "partial", None)
                    denominators = partial.denominators if partial else (1,)
            try:
                index = int(item[1:])
                periods.append(denominators[index])
            except (ValueError, IndexError) as exc:
                raise ConfigurationError(f"bad period {item!r}") from exc
        else:
            try:
                periods.append(int(item))
            except ValueError as exc:
                raise ConfigurationError(f"bad period {item!r}") from exc
    if not periods:
        raise ConfigurationError("no periods given")
    return periods


@dataclass(frozen=True)
class OrbitTrace:
    seed: object
    samples: Tuple[Tuple[int, object], ...]
    min_modulus: float
    min_at: int
    precision_bits: Optional[int]
    field_name: str
    first_return: Optional[int] = None
    delta: Optional[float] = None
    truncated: bool = False
    outside_hypothesis: bool = False
    checksum: str = ""

    def to_json(self):
        return {
            "seed": [float(self.seed.real), float(self.seed.imag)],
            "n": self.samples[-1][0] if self.samples else 0,
            "min_modulus": self.min_modulus,
            "min_at": self.min_at,
            "first_return": self.first_return,
            "delta": self.delta,
            "precision_bits": self.precision_bits,
            "field": self.field_name,
            "truncated": self.truncated,
            "outside_hypothesis": self.outside_hypothesis,
            "empirical": True,
            "checksum": self.checksum,
        }


def orbit_probe(map_, z0, n, field_, delta=None):
    """
    Iterate a map from z0 at the field's precision and record recurrence data.

    The minimum modulus covers 0 <= k <= n; the first return is the least
    k >= 1 with |f^k(z0) - z0| <= delta. An orbit that leaves the map's
    validity region or hits a pole stops early and is flagged truncated.
    Germs that are not irrationally indifferent are flagged outside the
    recurrence hypothesis.
    """
    z = field_.coerce(z0)
    if field_.is_zero(z, 0.0):
        raise ConfigurationError("the orbit seed must be nonzero")
    samples = [(0, z)]
    truncated = False
    first_return = None
    for k in range(1, n + 1):
        try:
            z = map_.apply(z, field_)
        except (OutsideValidity, ZeroDivisionError):
            truncated = True
            break
        if not field_.is_exact and not field_.ctx.isfinite(z):
            truncated = True
            break
        samples.append((k, z))
        if delta is not None and first_return is None and float(field_.modulus(z - samples[0][1])) <= delta:
            first_return = k
    if truncated:
        status(f"Orbit truncated after {len(samples) - 1} steps", "⚠️")

    moduli = [float(field_.modulus(s)) for _, s in samples]
    min_at = int(np.argmin(moduli))
    mc = map_.multiplier.classify()
    return OrbitTrace(
        seed=field_.to_complex(samples[0][1]),
        samples=tuple(samples),
        min_modulus=moduli[min_at],
        min_at=min_at,
        precision_bits=field_.precision_bits,
        field_name=field_.name,
        first_return=first_return,
        delta=delta,
        truncated=truncated,
        outside_hypothesis=mc.kind != "non_torsion",
        checksum=sha256_hex(orbit_csv(samples, field_)),
    )


def orbit_csv(samples, field_):
    """CSV text with columns n, re, im, modulus."""
    lines = ["n,re,im,modulus"]
    for k, z in samples:
        re_, im_ = field_.serialize(z)
        lines.append(f"{k},{re_},{im_},{_modulus_text(field_, z)}")
    return "\n".join(lines) + "\n"


def _modulus_text(field_, z):
    if field_.is_exact:
        return repr(float(field_.modulus(z)))
    return field_.ctx.nstr(field_.modulus(z), field_.ctx.dps + 5)


@dataclass(frozen=True)
class CoverageCurve:
    checkpoints: Tuple[Tuple[int, float], ...]
    boundary_cells: int
    truncated: bool
    in_hypothesis: bool

    def to_json(self):
        return {
            "checkpoints": [[n, f] for n, f in self.checkpoints],
            "boundary_cells": self.boundary_cells,
            "truncated": self.truncated,
            "in_hypothesis": self.in_hypothesis,
        }


def boundary_seed(grid):
    """Center of the boundary cell of K farthest from 0, first in row-major order on ties."""
    rows, cols = np.nonzero(boundary_cells(grid))
    centers = grid.centers()[rows, cols]
    return complex(centers[int(np.argmax(np.abs(centers)))])


def _orbit_cells(grid, kernel, z0, n):
    """Cells of f^k(z0) for k = 0..n in one direction, stopping when the orbit leaves the frame."""
    rows, cols = [], []
    z = np.array([z0], dtype=np.complex128)
    size = grid.resolution
    for k in range(n + 1):
        if k:
            z, bad = kernel(z)
            if bad[0]:
                return rows, cols, True
        r, c = grid.cell_of(z)
        if not (0 <= r[0] < size and 0 <= c[0] < size):
            return rows, cols, True
        rows.append(int(r[0]))
        cols.append(int(c[0]))
    return rows, cols, False


def boundary_coverage(grid, kernel, z0, n, checkpoints=10):
    """
    Fraction of boundary cells of K visited, within one cell, by the orbit
    {f^k(z0) : |k| <= m} at m = n/10, 2n/10, ..., n.
    """
    if n < 1:
        raise ConfigurationError("coverage needs n >= 1")
    boundary = boundary_cells(grid)
    total = int(boundary.sum())
    forward = _orbit_cells(grid, kernel.forward, z0, n)
    backward = _orbit_cells(grid, kernel.backward, z0, n)
    truncated = forward[2] or backward[2]
    if truncated:
        status("Coverage orbit left the grid frame and was truncated", "⚠️")

    curve = []
    for step in range(1, checkpoints + 1):
        m = max(1, (n * step) // checkpoints)
        visited = np.zeros(boundary.shape, dtype=bool)
        for rows, cols, _ in (forward, backward):
            visited[rows[:m + 1], cols[:m + 1]] = True
        visited = ndimage.binary_dilation(visited, structure=np.ones((3, 3), dtype=bool))
        fraction = float((visited & boundary).sum()) / total if total else 0.0
        curve.append((m, fraction))
    in_hypothesis = grid.indifferent and total > 1
    if not in_hypothesis:
        status("Boundary coverage outside the dense-orbit hypothesis", "⚠️")
    return CoverageCurve(tuple(curve), total, truncated, in_hypothesis)
