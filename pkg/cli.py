#!/usr/bin/env python3

import argparse
import asyncio
import json
import sys

from creators.grid_files import write_grid_files
from creators.reports import cycles_report, emit_report, write_orbit_csv
from dynamics import __version__ as VERSION
from dynamics import germ as germ_ops
from dynamics.arithmetic import parse_rotation_number
from dynamics.classify import VerdictPolicy
from dynamics.errors import (
    ConfigurationError,
    ExpressionError,
    HolonomyError,
    InadmissibleDisk,
    ModulusError,
    NonCommutingPair,
)
from dynamics.invariant_set import (
    AdmissibleDisk,
    boundary_contact,
    common_invariant_set,
    fill_complement,
    trapped_set,
    verify_complete_invariance,
    zero_boundary_position,
)
from dynamics.maps import EXACT, Multiplier, PolynomialMap
from dynamics.orbits import (
    boundary_coverage,
    boundary_seed,
    certify_cycle,
    cycle_radius_trend,
    find_small_cycles,
    orbit_probe,
    resolve_periods,
)
from dynamics.suspension import (
    catalog_model,
    classify_model,
    load_catalog_data,
    load_model_file,
    model_from_expressions,
)
from providers import BinaryFloatField, GaussianRationalField
from utils.config import load_config
from utils.expressions import parse_map, parse_scalar
from utils.helpers import set_quiet, status

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
EXIT_INCONSISTENT = 4
EXIT_INADMISSIBLE = 5

COMMANDS = ("classify", "linearize", "hedgehog", "cycles", "orbit", "catalog")

# Map shorthand commands to full commands
SHORTHAND_MAP = {
    "c": "classify",
    "lin": "linearize",
    "hh": "hedgehog",
    "cy": "cycles",
    "o": "orbit",
    "cat": "catalog",
}


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(
        prog="holonomy",
        description="Linearization, Ueda-type classification and invariant sets of commuting holomorphic germs")
    parser.add_argument("command", nargs="?", help="Command to run (" + ", ".join(COMMANDS) + ")")
    parser.add_argument("-v", "--version", action="store_true", help="Show the version number and exit")
    parser.add_argument("--quiet", action="store_true", help="Silence status lines on stderr")

    source = parser.add_argument_group("input")
    source.add_argument("--f", help="Holonomy along the first generator, as a map expression")
    source.add_argument("--g", help="Holonomy along the second generator, as a map expression")
    source.add_argument("--tau", default="i", help="Torus modulus with Im(tau) > 0 (default: i)")
    source.add_argument("--catalog", metavar="NAME", help="Use a model from the shipped catalog")
    source.add_argument("--model", metavar="FILE", help="Model file in the catalog schema")
    source.add_argument("--map", help="Single map expression (hedgehog, orbit, linearize)")
    source.add_argument("--theta", help="Rotation number for cycles: p/q, cf:[a0;a1,...], golden, ...")
    source.add_argument("--degree", type=int, default=2, help="Degree d of lambda z + z^d (default: 2)")

    numeric = parser.add_argument_group("numeric policy")
    numeric.add_argument("--config", metavar="FILE", help="JSON file with run configuration")
    numeric.add_argument("--order", type=int, help="Truncation order T (8..512, default: 64)")
    numeric.add_argument("--precision", type=int, help="Binary precision in bits (default: 256; 512 for cycles and orbit)")
    numeric.add_argument("--field", choices=["auto", "exact", "float"], help="Coefficient field (default: auto)")
    numeric.add_argument("--radius", type=float, help="Disk radius for hedgehog (default: 1)")
    numeric.add_argument("--grid", type=int, help="Grid resolution N (3..4096, default: 512)")
    numeric.add_argument("--iters", type=int, help="Iterates in each direction (default: 10000)")
    numeric.add_argument("--workers", type=int, help="Worker processes (default: all cores)")

    experiment = parser.add_argument_group("experiments")
    experiment.add_argument("--periods", default="q1", help="Cycle periods, e.g. 10,1001 or q1,q2 (default: q1)")
    experiment.add_argument("--search-radius", type=float, default=0.5, help="Outer radius of the Newton start mesh")
    experiment.add_argument("--mesh-seed", type=int, help="Shuffle seed for the Newton start mesh")
    experiment.add_argument("--seed", help="Orbit seed point, e.g. 0.5 or 1e-3i")
    experiment.add_argument("--n", type=int, default=1000, help="Orbit length (default: 1000)")
    experiment.add_argument("--delta", type=float, help="First-return radius for orbit")
    experiment.add_argument("--coverage", action="store_true", help="Add a boundary coverage curve to the orbit report")

    output = parser.add_argument_group("output")
    output.add_argument("--output", help="Report file, or file stem for hedgehog artifacts")
    output.add_argument("--csv", metavar="FILE", help="Orbit samples (orbit) or per-cell occupancy (hedgehog) as CSV")
    return parser.parse_args(argv)


def build_config(command, args):
    return load_config(command, args.config, {
        "truncation": args.order,
        "precision": args.precision,
        "field": args.field,
        "grid": args.grid,
        "max_iter": args.iters,
        "radius": args.radius,
        "workers": args.workers,
        "seed": args.mesh_seed,
        "output": args.output,
    })


def policy_for(config):
    return VerdictPolicy(
        truncation=config.truncation,
        precision=config.bits,
        field=config.field,
        zero_threshold=config.zero_threshold,
        commutator_tolerance=config.commutator_tolerance,
    )


def float_field(config):
    return GaussianRationalField() if config.field == "exact" else BinaryFloatField(config.bits)


def _single_map(args, what="--map"):
    text = args.map or args.f
    if text:
        return parse_map(text)
    if args.catalog:
        return catalog_model(args.catalog).pair.g_map
    raise ConfigurationError(f"{what} is required")


def cmd_classify(args, config):
    policy = policy_for(config)
    if args.catalog:
        model = catalog_model(args.catalog, policy)
    elif args.model:
        model = load_model_file(args.model, policy)
    elif args.f and args.g:
        model = model_from_expressions(args.f, args.g, args.tau, policy)
    else:
        raise ConfigurationError("classify needs --catalog, --model or both --f and --g")

    status(f"Classifying {model.label or model.f_source + ' / ' + model.g_source}", "🔄")
    report = classify_model(model, policy, workers=config.worker_count)
    emit_report(report, config.output)

    kind = report["ueda_type"]["kind"]
    if kind == "undetermined":
        return EXIT_INCONCLUSIVE
    if kind == "inconsistent":
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_linearize(args, config):
    map_ = _single_map(args, "--f")
    field_ = policy_for(config).field_for((map_,))
    f = map_.germ(config.truncation, field_)
    status(f"Linearizing {map_.describe()} to order {config.truncation} over {field_.name}", "🔄")
    result = germ_ops.formal_linearize(f, allow_resonance=True, tol=config.zero_threshold)

    report = {
        "map": map_.describe(),
        "field": field_.name,
        "order": config.truncation,
        "multiplier": map_.multiplier.classify().to_json(),
    }
    report.update(result.to_json())
    emit_report(report, config.output)
    if result.obstruction is not None:
        status(f"Resonance obstruction at order {result.obstruction}", "⚠️")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_hedgehog(args, config):
    if args.map or not (args.f and args.g):
        map_ = _single_map(args)
        disk = AdmissibleDisk.check(map_, config.radius)
        status(f"Trapping {map_.describe()} on a {config.grid}x{config.grid} grid", "🔄")
        grid = fill_complement(trapped_set(disk, config.grid, config.max_iter, config.worker_count))
    else:
        f_map, g_map = parse_map(args.f), parse_map(args.g)
        map_ = f_map
        disk = AdmissibleDisk.check(f_map, config.radius)
        status(f"Common invariant set of {f_map.describe()} and {g_map.describe()}", "🔄")
        grid = common_invariant_set(disk, g_map, config.grid, config.max_iter,
                                    workers=config.worker_count,
                                    commutator_tolerance=config.commutator_tolerance)

    metadata, written = write_grid_files(grid, config.output or "hedgehog", csv_path=args.csv)
    report = {
        "grid": metadata,
        "zero_position": zero_boundary_position(grid).to_json(),
        "boundary_contact": boundary_contact(grid).to_json(),
        "invariance": verify_complete_invariance(grid, disk.kernel).to_json(),
        "files": written,
    }
    emit_report(report)
    return EXIT_OK


def _cycle_polynomial(args):
    if args.map:
        poly = parse_map(args.map)
        if not isinstance(poly, PolynomialMap):
            raise ConfigurationError("cycles needs a poly(...) map")
        return poly, poly.multiplier.tag
    if not args.theta:
        raise ConfigurationError("cycles needs --theta or --map")
    if args.degree < 2:
        raise ConfigurationError(f"degree must be at least 2, got {args.degree}")
    theta = parse_rotation_number(args.theta)
    coeffs = (EXACT.zero,) * (args.degree - 2) + (EXACT.one,)
    return PolynomialMap(Multiplier.rotation(theta), coeffs), theta


def cmd_cycles(args, config):
    poly, theta = _cycle_polynomial(args)
    periods = resolve_periods(args.periods, theta)
    status(f"Searching {poly.describe()} for cycles of period {', '.join(map(str, periods))}", "🔄")
    cycles = find_small_cycles(poly, periods, args.search_radius, config.bits,
                               seed=config.seed, workers=config.worker_count)
    certifications = [certify_cycle(poly, c) for c in cycles]
    report = cycles_report(poly, cycles, periods, cycle_radius_trend(cycles), certifications,
                           config.bits, args.search_radius)
    emit_report(report, config.output)
    if not cycles or not all(passed for _, passed in certifications):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_orbit(args, config):
    map_ = _single_map(args)
    field_ = float_field(config)
    grid = disk = None
    if args.coverage:
        disk = AdmissibleDisk.check(map_, config.radius)
        grid = fill_complement(trapped_set(disk, config.grid, config.max_iter, config.worker_count))
    if args.seed is not None:
        z0 = parse_scalar(args.seed)
    elif grid is not None:
        z0 = boundary_seed(grid)
    else:
        raise ConfigurationError("orbit needs --seed")

    status(f"Iterating {map_.describe()} {args.n} times at {field_.name}", "🔄")
    trace = orbit_probe(map_, z0, args.n, field_, args.delta)
    report = {"map": map_.describe()}
    report.update(trace.to_json())
    if grid is not None:
        report["coverage"] = boundary_coverage(grid, disk.kernel, trace.seed, args.n).to_json()
    if args.csv:
        write_orbit_csv(trace, field_, args.csv)
    emit_report(report, config.output)
    return EXIT_INCONCLUSIVE if trace.truncated else EXIT_OK


def cmd_catalog(args, config):
    data = load_catalog_data()
    models = data["models"]
    if args.catalog:
        models = [m for m in models if m["name"] == args.catalog]
        if not models:
            raise ExpressionError(f"no catalog model named {args.catalog!r}")
    emit_report({"schema": data["schema"], "models": models}, config.output)
    return EXIT_OK


HANDLERS = {
    "classify": cmd_classify,
    "linearize": cmd_linearize,
    "hedgehog": cmd_hedgehog,
    "cycles": cmd_cycles,
    "orbit": cmd_orbit,
    "catalog": cmd_catalog,
}


def run_command(command, args):
    """
    Run one command and map every failure onto the exit-code contract.

    Returns:
        0 ok, 2 parse or configuration error, 3 undetermined or inconclusive,
        4 inconsistent or non-commuting, 5 inadmissible disk
    """
    try:
        config = build_config(command, args)
        return HANDLERS[command](args, config)
    except NonCommutingPair as e:
        status(str(e), "❌")
        return EXIT_INCONSISTENT
    except InadmissibleDisk as e:
        status(f"Inadmissible disk: {e}", "❌")
        return EXIT_INADMISSIBLE
    except (ConfigurationError, ExpressionError, ModulusError) as e:
        status(str(e), "❌")
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as e:
        status(f"Cannot read input: {e}", "❌")
        return EXIT_USAGE
    except HolonomyError as e:
        status(f"{type(e).__name__}: {e}", "⚠️")
        return EXIT_INCONCLUSIVE


def show_instructions():
    """Show usage instructions."""
    print("\nHolonomy toolkit - commuting germ dynamics", file=sys.stderr)
    print(f"Version: {VERSION}", file=sys.stderr)
    print("\nCommands:", file=sys.stderr)
    print("  holonomy classify --catalog serre           - Case and Ueda type of a pair", file=sys.stderr)
    print("  holonomy linearize --f \"poly(2,1)\"          - Formal linearizing series", file=sys.stderr)
    print("  holonomy hedgehog --map \"rot(golden)\"       - Invariant set image (PGM + JSON)", file=sys.stderr)
    print("  holonomy cycles --theta \"cf:[0;10,100]\"     - Small cycles of lambda z + z^d", file=sys.stderr)
    print("  holonomy orbit --map ... --seed 0.5         - Orbit recurrence probe", file=sys.stderr)
    print("  holonomy catalog                            - List the example models", file=sys.stderr)
    print("\nShorthand Commands:", file=sys.stderr)
    for short, full in SHORTHAND_MAP.items():
        print(f"  holonomy {short:<4} - same as {full}", file=sys.stderr)


async def main(argv=None):
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    set_quiet(args.quiet)

    if args.version:
        print(f"holonomy-toolkit version {VERSION}")
        return EXIT_OK

    if not args.command:
        show_instructions()
        return EXIT_USAGE

    command = args.command.lower()
    command = SHORTHAND_MAP.get(command, command)
    if command in ("help", "-h", "--help"):
        show_instructions()
        return EXIT_OK
    if command not in HANDLERS:
        status(f"Unknown command: {command}", "❌")
        print("Run 'holonomy help' for usage information", file=sys.stderr)
        return EXIT_USAGE

    return run_command(command, args)


def main_entry():
    """Entry point for console_scripts"""
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    main_entry()
