import sys

from dynamics.orbits import orbit_csv
from utils.helpers import dumps_json, write_text


def emit_report(report, output=None, stream=None):
    """
    Print a JSON report on stdout and optionally save it.

    Args:
        report: JSON-ready dict
        output: Optional destination file
        stream: Data stream, sys.stdout by default

    Returns:
        The canonical JSON text
    """
    text = dumps_json(report)
    (stream or sys.stdout).write(text)
    if output:
        write_text(output, text)
    return text


def write_orbit_csv(trace, field_, path):
    """Save the samples of an OrbitTrace as n, re, im, modulus rows."""
    return write_text(path, orbit_csv(trace.samples, field_))


def cycles_report(poly, cycles, periods, trend, certifications, bits, search_radius):
    """
    Report for a small-cycle search.

    Args:
        poly: PolynomialMap searched
        cycles: PeriodicCycle list
        periods: Periods requested
        trend: cycle_radius_trend output
        certifications: (residual, passed) per cycle at doubled precision
        bits: Search precision
        search_radius: Outer radius of the start mesh
    """
    entries = []
    for cycle, (residual, passed) in zip(cycles, certifications):
        data = cycle.to_json()
        data["recheck_residual"] = residual
        data["certified"] = passed
        entries.append(data)
    return {
        "map": poly.describe(),
        "periods": list(periods),
        "precision_bits": bits,
        "search_radius": search_radius,
        "cycles": entries,
        "found_periods": sorted({c.period for c in cycles}),
        "trend": trend,
    }
