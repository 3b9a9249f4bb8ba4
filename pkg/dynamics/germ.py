"""
Truncated power-series germs fixing the origin.

A germ f(w) = a_1 w + a_2 w^2 + ... + a_T w^T is stored as the tuple
(a_1, ..., a_T) together with its coefficient field. Every operation
truncates at order T, returns a new germ and leaves its inputs untouched.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

from dynamics.arithmetic import RotationNumber
from dynamics.errors import (
    ConfigurationError,
    ExpressionError,
    NotDiffeomorphismError,
    ResonanceObstruction,
)
from providers import BinaryFloatField, field_from_name
from providers.binary_float import MINIMUM_PRECISION_BITS
from utils.helpers import status

DEFAULT_TRUNCATION = 64
MIN_TRUNCATION = 8
MAX_TRUNCATION = 512
MAX_ITERATE = 10 ** 6
DEFAULT_ZERO_THRESHOLD = 1e-30
TAG_CHECK_BITS = 64


@dataclass(frozen=True)
class Germ:
    coeffs: Tuple
    field: object
    multiplier_tag: Optional[RotationNumber] = None

    def __post_init__(self):
        if not self.coeffs:
            raise ConfigurationError("a germ needs a positive truncation order")
        if self.coeffs[0] == self.field.zero:
            raise NotDiffeomorphismError("the linear coefficient of a germ must be nonzero")
        if self.multiplier_tag is not None:
            _check_tag(self.coeffs[0], self.field, self.multiplier_tag)

    @property
    def truncation(self):
        return len(self.coeffs)

    @property
    def multiplier(self):
        return self.coeffs[0]

    def coefficient(self, n):
        """Coefficient of w^n, zero beyond the truncation order."""
        if 1 <= n <= len(self.coeffs):
            return self.coeffs[n - 1]
        return self.field.zero

    def series(self):
        """Coefficient list indexed by power, entry 0 included."""
        return [self.field.zero] + list(self.coeffs)

    @property
    def is_linear(self):
        zero = self.field.zero
        return all(c == zero for c in self.coeffs[1:])

    def to_json(self):
        data = {
            "truncation": self.truncation,
            "coeffs": [self.field.serialize(c) for c in self.coeffs],
            "field": self.field.name,
        }
        if self.multiplier_tag is not None:
            data["multiplier_tag"] = self.multiplier_tag.to_json()
        return data

    @classmethod
    def from_json(cls, data):
        try:
            field_ = field_from_name(data["field"])
            coeffs = tuple(field_.deserialize(pair) for pair in data["coeffs"])
            truncation = int(data.get("truncation", len(coeffs)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ExpressionError(f"malformed germ JSON: {exc}") from exc
        if truncation != len(coeffs):
            raise ExpressionError("germ JSON truncation does not match its coefficient count")
        tag = data.get("multiplier_tag")
        return cls(coeffs, field_, RotationNumber.from_json(tag) if tag else None)


def _tag_bits(field_, tag):
    bits = field_.precision_bits or TAG_CHECK_BITS
    if tag.kind == "real":
        bits = min(bits, tag.precision)
    return max(bits, MINIMUM_PRECISION_BITS)


@lru_cache(maxsize=512)
def _tag_point(tag, bits):
    """e^{2 pi i theta} at the given precision."""
    return BinaryFloatField(bits).root_of_unity(tag.approximate(bits))


def _check_tag(a1, field_, tag):
    """
    The tag must agree with a_1 to half the working precision.

    Raises:
        ExpressionError: |a_1 - e^{2 pi i theta}| exceeds 2^(-bits/2)
    """
    bits = _tag_bits(field_, tag)
    working = BinaryFloatField(bits)
    gap = abs(working.coerce(a1) - _tag_point(tag, bits))
    if gap > working.ctx.ldexp(1, -(bits // 2)):
        raise ExpressionError(
            f"multiplier tag {tag.describe()} does not match a_1 = {field_.to_complex(a1)} "
            f"(gap {float(gap):.3e})")


def from_coefficients(values, truncation, field_, tag=None):
    """
    Build a germ from leading coefficients a_1, a_2, ...; missing ones are 0.

    Args:
        values: Iterable of numbers the field can coerce
        truncation: Order T
        field_: Coefficient field
        tag: Optional exact rotation number of a_1

    Returns:
        Germ
    """
    _check_truncation(truncation)
    values = [field_.coerce(v) for v in values][:truncation]
    values += [field_.zero] * (truncation - len(values))
    return Germ(tuple(values), field_, tag)


def identity(truncation, field_):
    return from_coefficients([1], truncation, field_, RotationNumber.rational(0))


def linear(multiplier, truncation, field_, tag=None):
    return from_coefficients([multiplier], truncation, field_, tag)


def _check_truncation(truncation):
    if not 1 <= truncation <= MAX_TRUNCATION:
        raise ConfigurationError(f"truncation order must lie in 1..{MAX_TRUNCATION}, got {truncation}")


def _require_compatible(f, g):
    if f.truncation != g.truncation:
        raise ConfigurationError(
            f"truncation orders differ: {f.truncation} and {g.truncation}")
    if f.field != g.field:
        raise ConfigurationError(f"coefficient fields differ: {f.field.name} and {g.field.name}")


def _product(a, b, low_a, low_b, order, zero):
    """Truncated product of two power-indexed coefficient lists."""
    out = [zero] * (order + 1)
    for n in range(low_a + low_b, order + 1):
        total = zero
        for i in range(low_a, n - low_b + 1):
            total = total + a[i] * b[n - i]
        out[n] = total
    return out


def _powers(series, order, zero):
    """Table of f^k (ordinary powers) for k = 1..order."""
    table = [None, series]
    for k in range(2, order + 1):
        table.append(_product(table[-1], series, k - 1, 1, order, zero))
    return table


def _tag_sum(f, g):
    if f.multiplier_tag is None or g.multiplier_tag is None:
        return None
    return f.multiplier_tag.add(g.multiplier_tag)


def compose(f, g):
    """
    Return f o g truncated at order T.

    Raises:
        ConfigurationError: mismatched truncation or field
    """
    _require_compatible(f, g)
    order = f.truncation
    zero = f.field.zero
    tag = _tag_sum(f, g)
    if g.is_linear:
        mu = g.multiplier
        coeffs, power = [], f.field.one
        for a in f.coeffs:
            power = power * mu
            coeffs.append(a * power)
        return Germ(tuple(coeffs), f.field, tag)
    if f.is_linear:
        lam = f.multiplier
        return Germ(tuple(lam * c for c in g.coeffs), f.field, tag)

    powers = _powers(g.series(), order, zero)
    result = [zero] * (order + 1)
    for k in range(1, order + 1):
        a = f.coeffs[k - 1]
        if a == zero:
            continue
        row = powers[k]
        for n in range(k, order + 1):
            result[n] = result[n] + a * row[n]
    return Germ(tuple(result[1:]), f.field, tag)


def invert(f):
    """
    Compositional inverse by back-substitution: compose(invert(f), f) = w.

    Raises:
        NotDiffeomorphismError: a_1 = 0
    """
    lam = f.multiplier
    tag = f.multiplier_tag.negate() if f.multiplier_tag is not None else None
    if f.is_linear:
        return Germ((f.field.one / lam,) + tuple(f.coeffs[1:]), f.field, tag)

    order = f.truncation
    zero = f.field.zero
    powers = _powers(f.series(), order, zero)
    g = [zero, f.field.one / lam]
    lam_power = lam
    for n in range(2, order + 1):
        lam_power = lam_power * lam
        total = zero
        for k in range(1, n):
            if g[k] != zero:
                total = total + g[k] * powers[k][n]
        g.append(-total / lam_power)
    return Germ(tuple(g[1:]), f.field, tag)


def iterate(f, n):
    """f^n by binary splitting; f^0 is the identity and f^-1 the inverse."""
    if abs(n) > MAX_ITERATE:
        raise ConfigurationError(f"iterate count {n} exceeds {MAX_ITERATE}")
    if n == 0:
        return identity(f.truncation, f.field)
    base = f if n > 0 else invert(f)
    remaining = abs(n)
    result = None
    while remaining:
        if remaining & 1:
            result = base if result is None else compose(result, base)
        remaining >>= 1
        if remaining:
            base = compose(base, base)
    tag = f.multiplier_tag.scale(n) if f.multiplier_tag is not None else None
    return replace(result, multiplier_tag=tag)


def conjugate(f, h):
    """h o f o h^-1; the multiplier and its tag are those of f."""
    _require_compatible(f, h)
    result = compose(h, compose(f, invert(h)))
    return replace(result, multiplier_tag=f.multiplier_tag)


def difference_norm(f, g):
    """Largest coefficient modulus of f - g."""
    _require_compatible(f, g)
    field_ = f.field
    return max(float(field_.modulus(a - b)) for a, b in zip(f.coeffs, g.coeffs))


def commutator_defect(f, g):
    """max_n |coefficient n of (f o g - g o f)|."""
    return difference_norm(compose(f, g), compose(g, f))


def is_identity(f, tol=DEFAULT_ZERO_THRESHOLD):
    field_ = f.field
    if not field_.is_zero(f.multiplier - field_.one, tol):
        return False
    return all(field_.is_zero(c, tol) for c in f.coeffs[1:])


def first_nonlinear_order(f, tol=DEFAULT_ZERO_THRESHOLD):
    """Smallest n >= 2 with a_n != 0, or None for a linear germ."""
    for n, c in enumerate(f.coeffs[1:], start=2):
        if not f.field.is_zero(c, tol):
            return n
    return None


@dataclass(frozen=True)
class FiniteOrderResult:
    kind: str
    k: int

    @property
    def is_finite(self):
        return self.kind == "finite_order"

    def to_json(self):
        key = "k" if self.is_finite else "max_k"
        return {"kind": self.kind, key: self.k}


def is_finite_order(f, max_k, tol=DEFAULT_ZERO_THRESHOLD):
    """Smallest k <= max_k with f^k = id through order T."""
    if max_k < 1:
        raise ConfigurationError("max_k must be at least 1")
    power = f
    for k in range(1, max_k + 1):
        if is_identity(power, tol):
            return FiniteOrderResult("finite_order", k)
        if k < max_k:
            power = compose(power, f)
    return FiniteOrderResult("not_finite_order_up_to", max_k)


def finite_order_linearizer(f, order):
    """
    Averaging linearizer of a germ of finite order q.

    phi = (1/q) sum_{j<q} lambda^-j f^j is tangent to the identity and
    satisfies phi o f = lambda phi whenever f^q = id.
    """
    field_ = f.field
    zero = field_.zero
    lam_inverse = field_.one / f.multiplier
    total = [zero] * f.truncation
    power = identity(f.truncation, field_)
    weight = field_.one
    for _ in range(order):
        total = [t + weight * c for t, c in zip(total, power.coeffs)]
        power = compose(f, power)
        weight = weight * lam_inverse
    scale = field_.one / field_.coerce(order)
    return Germ(tuple(scale * t for t in total), field_, RotationNumber.rational(0))


@dataclass(frozen=True)
class LinearizationReport:
    h: Optional[Germ]
    multiplier: object
    min_divisor: Optional[float]
    max_coefficient: float
    growth_rate: Optional[float]
    free_choices: Tuple[int, ...] = ()
    defect: Optional[float] = None
    obstruction: Optional[int] = None

    def to_json(self):
        data = {
            "min_divisor": self.min_divisor,
            "max_coefficient": self.max_coefficient,
            "growth_rate": self.growth_rate,
            "free_choices": list(self.free_choices),
            "defect": self.defect,
            "obstruction": self.obstruction,
        }
        if self.h is not None:
            data["h"] = self.h.to_json()
        return data


def formal_linearize(f, allow_resonance=False, tol=DEFAULT_ZERO_THRESHOLD, check_defect=True):
    """
    Solve h o f = lambda h order by order with h tangent to the identity.

    Order n reads h_n (lambda - lambda^n) = sum_{k<n} h_k [w^n] f^k, so every
    h_n is divided by the small divisor lambda^n - lambda. A vanishing divisor
    with vanishing numerator is a free choice and h_n is set to 0.

    Args:
        f: Germ to linearize
        allow_resonance: Return a report with ``obstruction`` set instead of raising
        tol: Zero threshold for float fields
        check_defect: Also measure max |h o f - lambda h|

    Raises:
        ResonanceObstruction: lambda^n = lambda with a nonzero right-hand side
    """
    field_ = f.field
    zero = field_.zero
    lam = f.multiplier
    order = f.truncation
    powers = _powers(f.series(), order, zero)

    h = [zero, field_.one]
    lam_power = lam
    min_divisor = None
    free = []
    for n in range(2, order + 1):
        lam_power = lam_power * lam
        total = zero
        for k in range(1, n):
            if h[k] != zero:
                total = total + h[k] * powers[k][n]
        divisor = lam_power - lam
        if field_.is_zero(divisor, tol):
            if field_.is_zero(total, tol):
                free.append(n)
                status(f"Resonant order {n}: free coefficient set to 0")
                h.append(zero)
                continue
            if allow_resonance:
                return LinearizationReport(
                    h=None, multiplier=lam, min_divisor=min_divisor,
                    max_coefficient=_max_modulus(field_, h[1:]), growth_rate=None,
                    free_choices=tuple(free), obstruction=n)
            raise ResonanceObstruction(n, float(field_.modulus(total)))
        size = float(field_.modulus(divisor))
        min_divisor = size if min_divisor is None else min(min_divisor, size)
        h.append(-total / divisor)

    germ = Germ(tuple(h[1:]), field_, RotationNumber.rational(0))
    defect = None
    if check_defect:
        lhs = compose(germ, f)
        defect = max(float(field_.modulus(a - lam * b)) for a, b in zip(lhs.coeffs, germ.coeffs))
    return LinearizationReport(
        h=germ,
        multiplier=lam,
        min_divisor=min_divisor,
        max_coefficient=_max_modulus(field_, h[1:]),
        growth_rate=_growth_rate(field_, h, tol),
        free_choices=tuple(free),
        defect=defect,
    )


def _max_modulus(field_, values):
    return max((float(field_.modulus(v)) for v in values), default=0.0)


def _growth_rate(field_, h, tol):
    """max |h_n|^(1/n) over the upper half of the orders, a limsup proxy."""
    order = len(h) - 1
    rates = []
    for n in range(max(2, order // 2), order + 1):
        if field_.is_zero(h[n], tol):
            continue
        rates.append(float(field_.modulus(h[n]) ** (1.0 / n)))
    return max(rates) if rates else 0.0


def shared_linearization_defect(f, g, tol=DEFAULT_ZERO_THRESHOLD):
    """
    Linearize g and measure how far the same map is from linearizing f.

    Returns:
        max over n >= 2 of |coefficient n of k o f o k^-1| where k linearizes g
    """
    _require_compatible(f, g)
    report = formal_linearize(g, tol=tol, check_defect=False)
    conjugated = conjugate(f, report.h)
    return max((float(f.field.modulus(c)) for c in conjugated.coeffs[1:]), default=0.0)


def evaluate(f, z):
    """Horner evaluation of the truncated series at a field element z."""
    total = f.field.zero
    for c in reversed(f.coeffs):
        total = (total + c) * z
    return total
