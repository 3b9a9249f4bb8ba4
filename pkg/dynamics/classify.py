"""
Holonomy-pair classification.

A commuting pair (f, g) of germs is placed in one of ten cells according
to whether each multiplier is torsion and whether each germ is
linearizable; the cell decides the Ueda type of the pair. Torsion
multipliers are normalized to 1 by passing to f^k, the finite cover that
turns a root of unity of order k into 1.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from dynamics import germ as germ_ops
from dynamics.arithmetic import (
    DEFAULT_CREMER_SWEEP,
    DEFAULT_MAX_Q,
    arithmetic_verdict,
    brjuno_partial_sum,
    continued_fraction,
    multiplier_class,
    strong_cremer_sweep,
)
from dynamics.errors import (
    ConfigurationError,
    DefinedOnlyForIrrational,
    DegenerateTorsion,
    NonCommutingPair,
    NotCaseII,
    OutOfTableScope,
    OutsideValidity,
    PrecisionExhausted,
    ResonanceObstruction,
    UnclassifiedCase,
)
from dynamics.maps import koenigs_orbit_limit
from providers import BinaryFloatField, GaussianRationalField
from utils.helpers import status

DEFAULT_COMMUTATOR_TOLERANCE = 1e-20
KOENIGS_SAMPLE = 1e-3
KOENIGS_MAX_STEPS = 2000

LINEARIZABLE = "linearizable"
NON_LINEARIZABLE = "non_linearizable"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class VerdictPolicy:
    """Thresholds shared by every verdict in one classification run."""

    truncation: int = germ_ops.DEFAULT_TRUNCATION
    precision: int = 256
    field: str = "auto"
    zero_threshold: float = germ_ops.DEFAULT_ZERO_THRESHOLD
    commutator_tolerance: float = DEFAULT_COMMUTATOR_TOLERANCE
    max_q: int = DEFAULT_MAX_Q
    brjuno_depth: int = 30
    cremer_n: int = 64
    cremer_a: float = 2.0
    cremer_bound: float = 0.0

    def __post_init__(self):
        if not germ_ops.MIN_TRUNCATION <= self.truncation <= germ_ops.MAX_TRUNCATION:
            raise ConfigurationError(
                f"truncation must lie in {germ_ops.MIN_TRUNCATION}..{germ_ops.MAX_TRUNCATION}")
        if self.field not in ("auto", "exact", "float"):
            raise ConfigurationError(f"unknown field policy {self.field!r}")

    def field_for(self, maps):
        """Exact arithmetic when every multiplier is a Gaussian rational, else binary floats."""
        if self.field == "exact" or (
                self.field == "auto" and all(m.multiplier.exact is not None for m in maps)):
            return GaussianRationalField()
        return BinaryFloatField(self.precision)


@dataclass(frozen=True)
class HolonomyPair:
    f: germ_ops.Germ
    g: germ_ops.Germ
    commutator_defect: float
    generator_labels: Tuple[str, str] = ("gamma1", "gamma2")
    f_map: Optional[object] = None
    g_map: Optional[object] = None

    def swapped(self):
        return HolonomyPair(self.g, self.f, self.commutator_defect,
                            tuple(reversed(self.generator_labels)), self.g_map, self.f_map)


def make_pair(f, g, labels=("gamma1", "gamma2"), f_map=None, g_map=None):
    """Wrap two germs with their commutator defect."""
    return HolonomyPair(f, g, germ_ops.commutator_defect(f, g), tuple(labels), f_map, g_map)


def pair_from_maps(f_map, g_map, policy=None, labels=("gamma1", "gamma2")):
    """Expand two maps to germs in the field the policy picks for them."""
    policy = policy or VerdictPolicy()
    field_ = policy.field_for((f_map, g_map))
    f = f_map.germ(policy.truncation, field_)
    g = g_map.germ(policy.truncation, field_)
    return make_pair(f, g, labels, f_map, g_map)


def require_commuting(pair, tolerance=DEFAULT_COMMUTATOR_TOLERANCE):
    if pair.commutator_defect > tolerance:
        raise NonCommutingPair(pair.commutator_defect, tolerance)


@dataclass(frozen=True)
class Evidence:
    kind: str
    data: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.kind, **self.data}


@dataclass(frozen=True)
class LinearizabilityVerdict:
    kind: str
    multiplier: object
    evidence: Tuple[Evidence, ...] = ()
    witness: Optional[germ_ops.Germ] = None
    reason: Optional[str] = None

    @property
    def is_known(self):
        return self.kind != UNKNOWN

    @property
    def is_irrationally_indifferent(self):
        return self.multiplier.kind == "non_torsion"

    def to_json(self):
        data = {
            "kind": self.kind,
            "multiplier": self.multiplier.to_json(),
            "evidence": [e.to_json() for e in self.evidence],
        }
        if self.reason:
            data["reason"] = self.reason
        return data


def linearizability_verdict(f, policy=None, f_map=None, assertion=None, cycle_witness=()):
    """
    Decide whether a germ is linearizable, grading the answer by evidence.

    |lambda| != 1 is settled by Koenigs. A torsion multiplier of order q is
    settled by testing f^q = id. Irrationally indifferent germs are
    linearizable only through a closed form or a user assertion, and
    non-linearizable only through an assertion or Cremer evidence backed by
    a small-cycle witness; otherwise the verdict is Unknown with the
    coefficient growth and Brjuno sums attached.

    Args:
        f: Germ to grade
        policy: VerdictPolicy
        f_map: The map f came from, for closed-form reasons
        assertion: "linearizable" or "non_linearizable" supplied by a model
        cycle_witness: PeriodicCycle list found near 0

    Returns:
        LinearizabilityVerdict
    """
    policy = policy or VerdictPolicy()
    field_ = f.field
    mc = multiplier_class(field_, f.multiplier, f.multiplier_tag, policy.zero_threshold, policy.max_q)

    if mc.kind == "non_unitary":
        report = germ_ops.formal_linearize(f, tol=policy.zero_threshold)
        modulus = float(field_.modulus(f.multiplier))
        evidence = [Evidence("koenigs_modulus", {"modulus": modulus, "defect": report.defect})]
        if f_map is not None:
            limit = _koenigs_limit_evidence(report.h, f_map, policy)
            if limit is not None:
                evidence.append(limit)
        return LinearizabilityVerdict(
            LINEARIZABLE, mc, tuple(evidence), witness=report.h, reason="|lambda| != 1")

    if mc.is_torsion:
        power = germ_ops.iterate(f, mc.order)
        if germ_ops.is_identity(power, policy.zero_threshold):
            return LinearizabilityVerdict(
                LINEARIZABLE, mc, (Evidence("finite_order", {"k": mc.order}),),
                witness=germ_ops.finite_order_linearizer(f, mc.order),
                reason="finite order")
        order = germ_ops.first_nonlinear_order(power, policy.zero_threshold)
        return LinearizabilityVerdict(
            NON_LINEARIZABLE, mc,
            (Evidence("parabolic_non_identity", {"k": mc.order, "first_nonlinear_order": order}),))

    evidence = list(_irrational_evidence(f, policy, f_map))
    if assertion is not None:
        if assertion not in (LINEARIZABLE, NON_LINEARIZABLE):
            raise ConfigurationError(f"unknown linearizability assertion {assertion!r}")
        evidence.insert(0, Evidence("user_asserted", {"asserted": assertion}))
        return LinearizabilityVerdict(assertion, mc, tuple(evidence), reason="user asserted")

    reason = f_map.closed_form_linearization() if f_map is not None else None
    if reason is None and f.is_linear:
        reason = "linear by construction"
    if reason is not None:
        witness = germ_ops.identity(f.truncation, field_) if f.is_linear else None
        return LinearizabilityVerdict(LINEARIZABLE, mc, tuple(evidence), witness=witness, reason=reason)

    cremer = [e for e in evidence if e.kind == "cremer"]
    if cremer and cycle_witness and cremer[0].data["min_value"] <= policy.cremer_bound:
        evidence.append(Evidence("small_cycles", {
            "periods": sorted({c.period for c in cycle_witness}),
            "min_radius": min(c.radius for c in cycle_witness),
        }))
        return LinearizabilityVerdict(NON_LINEARIZABLE, mc, tuple(evidence),
                                      reason="Cremer evidence with small cycles")
    return LinearizabilityVerdict(UNKNOWN, mc, tuple(evidence))


def _koenigs_limit_evidence(h, f_map, policy):
    """Gap between the formal linearizer and the orbit-limit Koenigs map at a small point."""
    field_ = BinaryFloatField(policy.precision)
    rate = abs(math.log(float(field_.modulus(f_map.multiplier.value(field_)))))
    # |lambda|^-n drops below 2^-40
    n = KOENIGS_MAX_STEPS if rate == 0 else min(KOENIGS_MAX_STEPS, math.ceil(40 * math.log(2) / rate))
    z = field_.coerce(KOENIGS_SAMPLE)
    try:
        limit = koenigs_orbit_limit(f_map, z, n, field_)
    except (OutsideValidity, ConfigurationError) as exc:
        status(f"Koenigs orbit limit skipped: {exc}", "⚠️")
        return None
    series = germ_ops.from_coefficients([field_.coerce(c) for c in h.coeffs], h.truncation, field_)
    gap = abs(germ_ops.evaluate(series, z) - limit)
    return Evidence("koenigs_orbit_limit", {"z": KOENIGS_SAMPLE, "n": n, "gap": float(gap)})


def _irrational_evidence(f, policy, f_map):
    try:
        report = germ_ops.formal_linearize(f, tol=policy.zero_threshold, check_defect=False)
    except ResonanceObstruction as exc:
        yield Evidence("resonance_obstruction", {"order": exc.order})
    else:
        yield Evidence("coefficient_growth", {
            "rate": report.growth_rate,
            "max_coefficient": report.max_coefficient,
            "min_divisor": report.min_divisor,
        })

    theta = f.multiplier_tag
    if theta is None:
        return
    try:
        cf = continued_fraction(theta, policy.brjuno_depth + 1)
        terms = len(cf.convergents) - 2
        yield Evidence("brjuno", {"partial_sum": brjuno_partial_sum(cf, terms), "terms": terms,
                                  "theta": theta.describe()})
    except (PrecisionExhausted, DefinedOnlyForIrrational) as exc:
        status(f"Brjuno evidence skipped: {exc}", "⚠️")

    degree = getattr(f_map, "degree", None)
    if degree is None or degree < 2:
        return
    try:
        graded = arithmetic_verdict(theta, policy.brjuno_depth, cremer_bound=policy.cremer_bound,
                                    d=degree, a_value=policy.cremer_a, cremer_n=policy.cremer_n)
        data = graded.to_json()
        data["verdict"] = data.pop("kind")
        yield Evidence("arithmetic", data)
        a_values = sorted(set(DEFAULT_CREMER_SWEEP) | {policy.cremer_a})
        sweep = strong_cremer_sweep(theta, degree, policy.cremer_n, a_values)
        yield Evidence("cremer", sweep[policy.cremer_a].to_json())
        yield Evidence("cremer_sweep", {
            "N": policy.cremer_n,
            "min_values": [[float(a), sweep[a].min_value] for a in a_values],
        })
    except DegenerateTorsion as exc:
        status(f"Cremer evidence skipped: {exc}", "⚠️")


@dataclass(frozen=True)
class CaseLabel:
    tag: str
    swapped: bool = False
    f_order: Optional[int] = None
    g_order: Optional[int] = None

    def to_json(self):
        return {"tag": self.tag, "swapped": self.swapped,
                "normalization": {"f": self.f_order, "g": self.g_order}}


# (f torsion, f linearizable, g torsion, g linearizable) -> (tag, swapped)
_TABLE = {
    (True, True, True, True): ("I", False),
    (True, True, True, False): ("II", False),
    (True, True, False, True): ("III", False),
    (True, True, False, False): ("IV", False),
    (True, False, True, True): ("II", True),
    (True, False, True, False): ("V", False),
    (True, False, False, True): ("VI", False),
    (True, False, False, False): ("VII", False),
    (False, True, True, True): ("III", True),
    (False, True, True, False): ("VI", True),
    (False, True, False, True): ("VIII", False),
    (False, True, False, False): ("IX", False),
    (False, False, True, True): ("IV", True),
    (False, False, True, False): ("VII", True),
    (False, False, False, True): ("IX", True),
    (False, False, False, False): ("X", False),
}


def classify_case(pair, verdicts, policy=None):
    """
    Place a commuting pair in its table cell.

    Raises:
        NonCommutingPair: the commutator defect exceeds the tolerance
        OutOfTableScope: a multiplier is not unitary
        UnclassifiedCase: a verdict is Unknown
    """
    policy = policy or VerdictPolicy()
    require_commuting(pair, policy.commutator_tolerance)
    vf, vg = verdicts
    for name, verdict in (("f", vf), ("g", vg)):
        if not verdict.multiplier.is_unitary:
            raise OutOfTableScope(f"the multiplier of {name} is not unitary")
    for name, verdict in (("f", vf), ("g", vg)):
        if not verdict.is_known:
            raise UnclassifiedCase(f"linearizability of {name} is unknown")
    key = (vf.multiplier.is_torsion, vf.kind == LINEARIZABLE,
           vg.multiplier.is_torsion, vg.kind == LINEARIZABLE)
    tag, swapped = _TABLE[key]
    return CaseLabel(tag, swapped, vf.multiplier.order, vg.multiplier.order)


@dataclass(frozen=True)
class UedaType:
    kind: str
    index: Optional[int] = None
    provenance: Tuple[str, ...] = ()

    def to_json(self):
        data = {"kind": self.kind}
        if self.kind == "alpha":
            data["index"] = self.index if self.index is not None else "unknown"
        return data


_CASE_TYPES = {
    "I": "beta",
    "III": "beta",
    "IV": "gamma",
    "V": "alpha_or_beta",
    "VI": "inconsistent",
    "VII": "inconsistent",
    "VIII": "beta",
    "IX": "inconsistent",
    "X": "gamma",
}


def ueda_type(case, pair, policy=None):
    """Ueda type of a classified pair; Case II reads its index off the parabolic generator."""
    policy = policy or VerdictPolicy()
    require_commuting(pair, policy.commutator_tolerance)
    if case.tag != "II":
        kind = _CASE_TYPES[case.tag]
        return UedaType(kind, provenance=(f"table: case {case.tag} -> {kind}",))

    g, order = (pair.f, case.f_order) if case.swapped else (pair.g, case.g_order)
    normalized = germ_ops.iterate(g, order) if order and order > 1 else g
    provenance = ["table: case II -> alpha"]
    if order and order > 1:
        provenance.append(f"torsion normalization: generator replaced by its {order}-th iterate")
    try:
        index = case2_type_index(normalized, policy.zero_threshold)
    except NotCaseII:
        index = None
    provenance.append(f"type index = first nonlinear order - 1 = {index}")
    return UedaType("alpha", index, tuple(provenance))


def case2_type_index(g, tol=germ_ops.DEFAULT_ZERO_THRESHOLD):
    """
    n - 1 where n is the first order with a nonzero coefficient.

    Raises:
        ConfigurationError: the multiplier is not 1
        NotCaseII: g is the identity through its truncation order
    """
    field_ = g.field
    if not field_.is_zero(g.multiplier - field_.one, tol):
        raise ConfigurationError("the Case II index needs a tangent-to-identity germ")
    n = germ_ops.first_nonlinear_order(g, tol)
    if n is None:
        raise NotCaseII(f"g is the identity through order {g.truncation}")
    return n - 1


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str

    def to_json(self):
        return {"rule": self.rule, "message": self.message}


def consistency_check(pair, verdicts, policy=None):
    """
    Verdict combinations that cannot occur for commuting germs.

    If one generator is linearizable with a non-torsion multiplier, its
    linearizer linearizes the other. If one is non-linearizable with an
    irrational multiplier, the other must be non-linearizable when its
    multiplier is irrational and linearizable (of finite order) when it is
    torsion. Both orientations are checked; Unknown verdicts are skipped.
    """
    policy = policy or VerdictPolicy()
    require_commuting(pair, policy.commutator_tolerance)
    found = []
    names = pair.generator_labels
    for (x, x_name), (y, y_name) in (((verdicts[0], names[0]), (verdicts[1], names[1])),
                                     ((verdicts[1], names[1]), (verdicts[0], names[0]))):
        if not (x.is_known and y.is_known):
            continue
        y_free = not y.multiplier.is_torsion
        x_free = not x.multiplier.is_torsion
        if y.kind == LINEARIZABLE and y_free and x.kind == NON_LINEARIZABLE:
            found.append(Violation(
                "shared_linearizer",
                f"{y_name} is linearizable with non-torsion multiplier, so {x_name} must be too"))
        if y.kind == NON_LINEARIZABLE and y_free and x_free and x.kind == LINEARIZABLE:
            found.append(Violation(
                "irrational_non_linearizable",
                f"{y_name} is a Cremer-type germ, so a non-torsion {x_name} cannot be linearizable"))
        if y.kind == NON_LINEARIZABLE and y_free and not x_free and x.kind == NON_LINEARIZABLE:
            found.append(Violation(
                "torsion_partner_finite_order",
                f"{y_name} is a Cremer-type germ, so a torsion {x_name} must have finite order"))
    return found
