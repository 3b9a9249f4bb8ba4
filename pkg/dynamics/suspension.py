"""
Suspension models over the torus C / <1, tau> and the example catalog.

Only the holonomy representation is kept: f is the holonomy along the
first generator, g along the second. The catalog ships as
``templates/catalog.json`` and model files use the same schema.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

from dynamics import germ as germ_ops
from dynamics.classify import (
    DEFAULT_COMMUTATOR_TOLERANCE,
    UNKNOWN,
    VerdictPolicy,
    classify_case,
    consistency_check,
    linearizability_verdict,
    make_pair,
    pair_from_maps,
    ueda_type,
    UedaType,
)
from dynamics.errors import (
    ExpressionError,
    ModulusError,
    NonCommutingPair,
    OutOfTableScope,
    RepresentationError,
    UnclassifiedCase,
)
from dynamics.maps import EXACT, PolynomialMap, SeriesMap
from dynamics.orbits import find_small_cycles
from utils.expressions import parse_map, parse_scalar
from utils.helpers import load_json, status

SCHEMA_VERSION = 1
CATALOG_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                            "templates", "catalog.json")


@dataclass(frozen=True)
class SuspensionModel:
    tau: complex
    pair: object
    label: Optional[str] = None
    notes: str = ""
    f_source: str = ""
    g_source: str = ""
    assertions: dict = field(default_factory=dict)
    known_type: Optional[str] = None


def _tau_value(tau):
    if isinstance(tau, str):
        value = parse_scalar(tau)
        return complex(EXACT.to_complex(value))
    return complex(tau)


def build_suspension(f, g, tau, label=None, notes="", tolerance=DEFAULT_COMMUTATOR_TOLERANCE,
                     f_map=None, g_map=None, assertions=None, known_type=None):
    """
    Suspend a commuting pair over the torus with modulus tau.

    Raises:
        ModulusError: Im(tau) <= 0
        RepresentationError: f and g do not commute within tolerance
    """
    tau = _tau_value(tau)
    if not tau.imag > 0:
        raise ModulusError(f"the torus modulus must lie in the upper half plane, got {tau}")
    pair = make_pair(f, g, f_map=f_map, g_map=g_map)
    if pair.commutator_defect > tolerance:
        raise RepresentationError(pair.commutator_defect, tolerance)
    return SuspensionModel(
        tau=tau,
        pair=pair,
        label=label,
        notes=notes,
        f_source=f_map.describe() if f_map is not None else "",
        g_source=g_map.describe() if g_map is not None else "",
        assertions=dict(assertions or {}),
        known_type=known_type,
    )


def _side(entry):
    """A map for one generator: an expression string or a germ JSON object."""
    if isinstance(entry, str):
        return parse_map(entry)
    if isinstance(entry, dict):
        g = germ_ops.Germ.from_json(entry)
        return SeriesMap.from_germ(g)
    raise ExpressionError(f"cannot read a generator from {entry!r}")


def model_from_dict(data, policy=None):
    """
    Build a model from its catalog entry.

    Keys: ``name``, ``f``, ``g`` (expressions or germ JSON), ``tau``
    (default ``i``), optional ``notes``, ``assertions`` and ``known_type``.
    """
    policy = policy or VerdictPolicy()
    try:
        f_map = _side(data["f"])
        g_map = _side(data["g"])
    except KeyError as exc:
        raise ExpressionError(f"model entry is missing {exc}") from exc
    if isinstance(data["f"], dict) and isinstance(data["g"], dict):
        pair = make_pair(f_map.series, g_map.series, f_map=f_map, g_map=g_map)
    else:
        pair = pair_from_maps(f_map, g_map, policy)
    return build_suspension(
        pair.f, pair.g, data.get("tau", "i"),
        label=data.get("name"),
        notes=data.get("notes", ""),
        tolerance=policy.commutator_tolerance,
        f_map=f_map,
        g_map=g_map,
        assertions=data.get("assertions"),
        known_type=data.get("known_type"),
    )


def model_from_expressions(f_text, g_text, tau="i", policy=None, label=None):
    return model_from_dict({"name": label, "f": f_text, "g": g_text, "tau": tau}, policy)


def load_catalog_data(path=CATALOG_PATH):
    data = load_json(path)
    if data.get("schema") != SCHEMA_VERSION:
        raise ExpressionError(f"unsupported catalog schema {data.get('schema')!r}")
    return data


def catalog(policy=None, path=CATALOG_PATH):
    """All catalog models in file order."""
    return [model_from_dict(entry, policy) for entry in load_catalog_data(path)["models"]]


def catalog_model(name, policy=None, path=CATALOG_PATH):
    for entry in load_catalog_data(path)["models"]:
        if entry["name"] == name:
            return model_from_dict(entry, policy)
    raise ExpressionError(f"no catalog model named {name!r}")


def load_model_file(path, policy=None):
    """A model file holds one catalog entry, optionally wrapped as a one-model catalog."""
    data = load_json(path)
    if "models" in data:
        if len(data["models"]) != 1:
            raise ExpressionError("a model file must hold exactly one model")
        data = data["models"][0]
    return model_from_dict(data, policy)


def _cremer_period(verdict, policy):
    if verdict.kind != UNKNOWN:
        return None
    for evidence in verdict.evidence:
        if evidence.kind == "cremer" and evidence.data["min_value"] <= policy.cremer_bound:
            return evidence.data["at_n"]
    return None


def search_cycle_witnesses(pair, verdicts, policy=None, workers=1):
    """
    Small cycles for every polynomial generator whose sampled Cremer
    quantity reaches the policy bound, searched at the period where the
    minimum is attained.

    Returns:
        Dict from generator name ("f" or "g") to the cycles found
    """
    policy = policy or VerdictPolicy()
    witnesses = {}
    for name, verdict, map_ in (("f", verdicts[0], pair.f_map), ("g", verdicts[1], pair.g_map)):
        period = _cremer_period(verdict, policy)
        if period is None or not isinstance(map_, PolynomialMap):
            continue
        status(f"Searching {map_.describe()} for period-{period} cycles near 0", "🔄")
        witnesses[name] = find_small_cycles(map_, [period], workers=workers)
    return witnesses


def classify_model(model, policy=None, cycle_witnesses=None, workers=1):
    """
    Full classification report for a model.

    Verdicts, table cell, Ueda type and consistency violations are combined
    into one JSON-ready dict. When f is the identity, the type follows the
    trichotomy on g alone. A generator that is irrationally indifferent
    and non-linearizable forces type gamma even if the other verdict is
    Unknown. Without explicit cycle witnesses, polynomial generators whose
    Cremer quantity reaches the bound are searched for small cycles.

    Raises:
        NonCommutingPair: the pair's commutator defect exceeds the tolerance
    """
    policy = policy or VerdictPolicy()
    pair = model.pair
    if pair.commutator_defect > policy.commutator_tolerance:
        raise NonCommutingPair(pair.commutator_defect, policy.commutator_tolerance)

    def grade(witnesses):
        return (
            linearizability_verdict(pair.f, policy, pair.f_map, model.assertions.get("f"),
                                    witnesses.get("f", ())),
            linearizability_verdict(pair.g, policy, pair.g_map, model.assertions.get("g"),
                                    witnesses.get("g", ())),
        )

    verdicts = grade(cycle_witnesses or {})
    if cycle_witnesses is None:
        found = search_cycle_witnesses(pair, verdicts, policy, workers)
        if any(found.values()):
            verdicts = grade(found)
    violations = consistency_check(pair, verdicts, policy)

    case = None
    provenance = []
    f_is_identity = germ_ops.is_identity(pair.f, policy.zero_threshold)
    try:
        case = classify_case(pair, verdicts, policy)
        kind = ueda_type(case, pair, policy)
    except OutOfTableScope as exc:
        if f_is_identity and not verdicts[1].multiplier.is_unitary:
            kind = UedaType("beta", provenance=("f = id trichotomy: |mu| != 1, g linearizable by Koenigs",))
        else:
            kind = _gamma_rule(verdicts) or UedaType("undetermined", provenance=(f"out of table scope: {exc}",))
    except UnclassifiedCase as exc:
        kind = _gamma_rule(verdicts) or UedaType("undetermined", provenance=(f"unclassified: {exc}",))

    if f_is_identity and case is not None:
        provenance.append(_trichotomy_clause(verdicts[1]))
    provenance.extend(kind.provenance)
    if violations and kind.kind != "inconsistent":
        kind = UedaType("inconsistent")
        provenance.append("commuting-pair consistency violated")
    if kind.kind == "undetermined":
        status(f"Ueda type of {model.label or 'model'} is undetermined", "⚠️")

    report = {
        "schema": SCHEMA_VERSION,
        "model": model.label,
        "tau": [model.tau.real, model.tau.imag],
        "case": case.tag if case else None,
        "swapped": case.swapped if case else False,
        "ueda_type": kind.to_json(),
        "verdicts": {"f": verdicts[0].to_json(), "g": verdicts[1].to_json()},
        "evidence": {
            "commutator_defect": pair.commutator_defect,
            "field": pair.f.field.name,
            "truncation": pair.f.truncation,
            "normalization": case.to_json()["normalization"] if case else None,
        },
        "provenance": provenance,
        "violations": [v.to_json() for v in violations],
    }
    if model.known_type:
        report["known_type"] = model.known_type
    return report


def _gamma_rule(verdicts):
    for name, verdict in zip(("f", "g"), verdicts):
        if verdict.kind == "non_linearizable" and verdict.is_irrationally_indifferent:
            return UedaType("gamma", provenance=(
                f"{name} is irrationally indifferent and non-linearizable -> gamma",))
    return None


def _trichotomy_clause(g_verdict):
    if g_verdict.multiplier.is_torsion:
        if g_verdict.kind == "linearizable":
            return "f = id trichotomy: g of finite order -> beta"
        return "f = id trichotomy: g not of finite order -> alpha"
    if g_verdict.kind == "linearizable":
        return "f = id trichotomy: g linearizable -> beta"
    return "f = id trichotomy: g irrationally indifferent and non-linearizable -> gamma"


def summary(report):
    """The case and Ueda type of a report, the part kept as a golden file."""
    return {"case": report["case"], "ueda_type": report["ueda_type"]}
