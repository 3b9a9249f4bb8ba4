"""
Concrete holomorphic maps fixing 0.

A map knows its germ at any truncation, evaluates pointwise in a coefficient
field (for orbits and Newton) and hands out a :class:`NumericKernel`, a
picklable complex128 evaluator used by the grid code and its workers.
Parameters are exact Gaussian rationals; irrational multipliers are carried
by their rotation number.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from dynamics import germ as germ_ops
from dynamics.arithmetic import RotationNumber, multiplier_class
from dynamics.errors import ConfigurationError, ExpressionError, OutsideValidity
from providers import BinaryFloatField, GaussianRationalField

EXACT = GaussianRationalField()
_PROBE = BinaryFloatField(128)
_NEWTON_STEPS = 8
_SERIES_GUESS_ORDER = 24

_UNIT_TAGS = {(1, 0): (0, 1), (0, 1): (1, 4), (-1, 0): (1, 2), (0, -1): (3, 4)}


def _unit_tag(value):
    re_, im_ = EXACT.parts(value)
    if re_.denominator != 1 or im_.denominator != 1:
        return None
    key = (int(re_), int(im_))
    if key in _UNIT_TAGS:
        return RotationNumber.rational(*_UNIT_TAGS[key])
    return None


@dataclass(frozen=True)
class Multiplier:
    """A multiplier known exactly, by its rotation number, or both."""

    exact: Optional[object] = None
    tag: Optional[RotationNumber] = None

    @classmethod
    def of(cls, value):
        value = EXACT.coerce(value)
        return cls(exact=value, tag=_unit_tag(value))

    @classmethod
    def rotation(cls, theta):
        exact = None
        if theta.is_rational and 4 % theta.q == 0:
            exact = EXACT.root_of_unity(Fraction(theta.p, theta.q))
        return cls(exact=exact, tag=theta)

    def value(self, field_):
        if self.exact is not None:
            return field_.coerce(self.exact)
        if field_.is_exact:
            raise ConfigurationError(
                f"multiplier e^(2 pi i {self.tag.describe()}) is not a Gaussian rational")
        return field_.root_of_unity(self.tag.approximate(field_.bits))

    def as_complex(self):
        return complex(self.value(_PROBE))

    def times(self, other):
        exact = self.exact * other.exact if self.exact is not None and other.exact is not None else None
        tag = self.tag.add(other.tag) if self.tag is not None and other.tag is not None else None
        if exact is not None and tag is None:
            tag = _unit_tag(exact)
        return Multiplier(exact, tag)

    def inverse(self):
        exact = EXACT.one / self.exact if self.exact is not None else None
        tag = self.tag.negate() if self.tag is not None else None
        return Multiplier(exact, tag)

    def classify(self):
        """Torsion, non-torsion or non-unitary, from the tag when there is one."""
        return multiplier_class(EXACT, self.exact, self.tag)

    def describe(self):
        if self.tag is not None and (self.exact is None or not self.tag.is_rational):
            return f"rot({self.tag.describe()})"
        return _format_exact(self.exact)


def _format_exact(value):
    re_, im_ = EXACT.parts(value)
    if im_ == 0:
        return str(re_)
    if re_ == 0:
        return f"({im_})*i"
    return f"({re_}+({im_})*i)"


@dataclass(frozen=True)
class NumericKernel:
    """
    complex128 evaluator for grid work.

    ``forward`` and ``backward`` return ``(values, bad)`` where ``bad`` marks
    entries that are non-finite or left a truncated series' validity disk.
    """

    kind: str
    params: Tuple[complex, ...] = ()
    inverse_params: Tuple[complex, ...] = ()
    parts: Tuple["NumericKernel", ...] = ()
    validity: float = float("inf")

    def forward(self, z):
        with np.errstate(all="ignore"):
            return self._forward(np.asarray(z, dtype=np.complex128))

    def backward(self, z):
        with np.errstate(all="ignore"):
            return self._backward(np.asarray(z, dtype=np.complex128))

    def derivative(self, z):
        with np.errstate(all="ignore"):
            return self._derivative(np.asarray(z, dtype=np.complex128))

    def backward_derivative(self, z):
        with np.errstate(all="ignore"):
            w, bad = self._backward(np.asarray(z, dtype=np.complex128))
            return 1.0 / self._derivative(w), bad

    def _forward(self, z):
        kind = self.kind
        if kind == "linear":
            w = self.params[0] * z
            return w, ~np.isfinite(w)
        if kind == "mobius":
            a, b, c, d = self.params
            w = (a * z + b) / (c * z + d)
            return w, ~np.isfinite(w)
        if kind in ("polynomial", "series"):
            w = _horner(self.params, z)
            bad = ~np.isfinite(w)
            if kind == "series":
                bad |= np.abs(z) > self.validity
            return w, bad
        if kind == "inverse":
            return self.parts[0]._backward(z)
        if kind == "composite":
            bad = np.zeros(z.shape, dtype=bool)
            for part in reversed(self.parts):
                z, part_bad = part._forward(z)
                bad |= part_bad
            return z, bad
        raise ConfigurationError(f"unknown kernel kind {kind!r}")

    def _backward(self, z):
        kind = self.kind
        if kind == "linear":
            w = z / self.params[0]
            return w, ~np.isfinite(w)
        if kind == "mobius":
            a, b, c, d = self.params
            w = (d * z - b) / (-c * z + a)
            return w, ~np.isfinite(w)
        if kind == "series":
            w = _horner(self.inverse_params, z)
            return w, ~np.isfinite(w) | (np.abs(z) > self.validity)
        if kind == "polynomial":
            w = _horner(self.inverse_params, z)
            for _ in range(_NEWTON_STEPS):
                w = w - (_horner(self.params, w) - z) / _horner_derivative(self.params, w)
            residual = np.abs(_horner(self.params, w) - z)
            bad = ~np.isfinite(w) | (residual > 1e-10 * (1.0 + np.abs(z)))
            return w, bad
        if kind == "inverse":
            return self.parts[0]._forward(z)
        if kind == "composite":
            bad = np.zeros(z.shape, dtype=bool)
            for part in self.parts:
                z, part_bad = part._backward(z)
                bad |= part_bad
            return z, bad
        raise ConfigurationError(f"unknown kernel kind {kind!r}")

    def _derivative(self, z):
        kind = self.kind
        if kind == "linear":
            return np.full(z.shape, self.params[0], dtype=np.complex128)
        if kind == "mobius":
            a, b, c, d = self.params
            return (a * d - b * c) / (c * z + d) ** 2
        if kind in ("polynomial", "series"):
            return _horner_derivative(self.params, z)
        if kind == "inverse":
            inner = self.parts[0]
            w, _ = inner._backward(z)
            return 1.0 / inner._derivative(w)
        if kind == "composite":
            total = np.ones(z.shape, dtype=np.complex128)
            for part in reversed(self.parts):
                total = total * part._derivative(z)
                z, _ = part._forward(z)
            return total
        raise ConfigurationError(f"unknown kernel kind {kind!r}")


def _horner(coeffs, z):
    """sum_{n>=1} coeffs[n-1] z^n."""
    total = np.zeros(z.shape, dtype=np.complex128)
    for c in reversed(coeffs):
        total = (total + c) * z
    return total


def _horner_derivative(coeffs, z):
    total = np.zeros(z.shape, dtype=np.complex128)
    for n in range(len(coeffs), 0, -1):
        total = total * z + n * coeffs[n - 1]
    return total


class HolomorphicMap:
    """Interface shared by every concrete map."""

    def germ(self, truncation, field_):
        raise NotImplementedError

    def apply(self, z, field_):
        raise NotImplementedError

    def apply_inverse(self, z, field_):
        raise NotImplementedError

    def derivative(self, z, field_):
        raise NotImplementedError

    def kernel(self):
        raise NotImplementedError

    def inverse(self):
        return InverseMap(self)

    def describe(self):
        raise NotImplementedError

    def closed_form_linearization(self):
        """Reason string when the map is linearizable in closed form, else None."""
        return None

    @property
    def validity_radius(self):
        return float("inf")


@dataclass(frozen=True)
class LinearMap(HolomorphicMap):
    multiplier: Multiplier

    def germ(self, truncation, field_):
        return germ_ops.linear(self.multiplier.value(field_), truncation, field_, self.multiplier.tag)

    def apply(self, z, field_):
        return self.multiplier.value(field_) * z

    def apply_inverse(self, z, field_):
        return z / self.multiplier.value(field_)

    def derivative(self, z, field_):
        return self.multiplier.value(field_)

    def kernel(self):
        return NumericKernel("linear", (self.multiplier.as_complex(),))

    def inverse(self):
        return LinearMap(self.multiplier.inverse())

    def describe(self):
        if self.multiplier.exact is not None and self.multiplier.exact == EXACT.one:
            return "id"
        if self.multiplier.tag is not None and not self.multiplier.tag.is_rational:
            return self.multiplier.describe()
        return f"lin({self.multiplier.describe()})"

    def closed_form_linearization(self):
        return "linear by construction"


def identity_map():
    return LinearMap(Multiplier.of(1))


@dataclass(frozen=True)
class MobiusMap(HolomorphicMap):
    """w -> (a w + b) / (c w + d) with b = 0 so that 0 is fixed."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        if self.b != EXACT.zero:
            raise ExpressionError("mobius(a,b,c,d) must fix 0, so b has to vanish")
        if self.d == EXACT.zero or self.a * self.d - self.b * self.c == EXACT.zero:
            raise ExpressionError("mobius(a,b,c,d) needs d != 0 and ad - bc != 0")

    @classmethod
    def of(cls, a, b, c, d):
        return cls(*(EXACT.coerce(x) for x in (a, b, c, d)))

    @property
    def multiplier(self):
        return Multiplier.of(self.a / self.d)

    def germ(self, truncation, field_):
        lam = field_.coerce(self.a / self.d)
        ratio = field_.coerce(-self.c / self.d)
        coeffs, term = [], lam
        for _ in range(truncation):
            coeffs.append(term)
            term = term * ratio
        return germ_ops.Germ(tuple(coeffs), field_, self.multiplier.tag)

    def _params(self, field_):
        return tuple(field_.coerce(x) for x in (self.a, self.b, self.c, self.d))

    def apply(self, z, field_):
        a, b, c, d = self._params(field_)
        return (a * z + b) / (c * z + d)

    def apply_inverse(self, z, field_):
        a, b, c, d = self._params(field_)
        return (d * z - b) / (-c * z + a)

    def derivative(self, z, field_):
        a, b, c, d = self._params(field_)
        return (a * d - b * c) / ((c * z + d) * (c * z + d))

    def kernel(self):
        return NumericKernel("mobius", tuple(EXACT.to_complex(x) for x in (self.a, self.b, self.c, self.d)))

    def inverse(self):
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def describe(self):
        return "mobius({})".format(",".join(_format_exact(x) for x in (self.a, self.b, self.c, self.d)))

    def closed_form_linearization(self):
        if self.c == EXACT.zero:
            return "linear by construction"
        if self.a != self.d:
            return "Möbius map with multiplier != 1 (second fixed point at (a - d)/c)"
        return None


@dataclass(frozen=True)
class PolynomialMap(HolomorphicMap):
    """w -> lambda w + c_2 w^2 + ... + c_d w^d."""

    multiplier: Multiplier
    coeffs: Tuple[object, ...] = ()

    @property
    def degree(self):
        return len(self.coeffs) + 1

    def germ(self, truncation, field_):
        values = [self.multiplier.value(field_)] + [field_.coerce(c) for c in self.coeffs]
        return germ_ops.from_coefficients(values, truncation, field_, self.multiplier.tag)

    def _coefficients(self, field_):
        return [self.multiplier.value(field_)] + [field_.coerce(c) for c in self.coeffs]

    def apply(self, z, field_):
        total = field_.zero
        for c in reversed(self._coefficients(field_)):
            total = (total + c) * z
        return total

    def derivative(self, z, field_):
        coeffs = self._coefficients(field_)
        total = field_.zero
        for n in range(len(coeffs), 0, -1):
            total = total * z + n * coeffs[n - 1]
        return total

    def apply_inverse(self, z, field_):
        """Newton on P(w) = z from w = z / lambda, at the field precision."""
        if field_.is_exact:
            raise ConfigurationError("polynomial inverses are not exact; use a float field")
        ctx = field_.ctx
        lam = self.multiplier.value(field_)
        w = z / lam
        tolerance = ctx.ldexp(1, -field_.bits + 8)
        for _ in range(4 * field_.bits):
            step = (self.apply(w, field_) - z) / self.derivative(w, field_)
            w = w - step
            if abs(step) <= tolerance * (1 + abs(w)):
                return w
        raise OutsideValidity(f"Newton inverse of {self.describe()} did not converge at {z}")

    def kernel(self):
        coeffs = tuple(complex(c) for c in self._coefficients(_PROBE))
        guess = germ_ops.invert(self.germ(_SERIES_GUESS_ORDER, _PROBE))
        return NumericKernel("polynomial", coeffs, tuple(complex(c) for c in guess.coeffs))

    def describe(self):
        return "poly({})".format(",".join([self.multiplier.describe()] + [_format_exact(c) for c in self.coeffs]))

    def closed_form_linearization(self):
        if all(c == EXACT.zero for c in self.coeffs):
            return "linear by construction"
        return None


def estimate_validity_radius(g, tol=germ_ops.DEFAULT_ZERO_THRESHOLD):
    """Half the root-test estimate of the radius of convergence."""
    field_ = g.field
    rates = []
    for n in range(max(2, g.truncation // 2), g.truncation + 1):
        c = g.coefficient(n)
        if not field_.is_zero(c, tol):
            rates.append(float(field_.modulus(c)) ** (1.0 / n))
    if not rates:
        return float("inf")
    return 0.5 / max(rates)


@dataclass(frozen=True)
class SeriesMap(HolomorphicMap):
    """A truncated series trusted only inside ``radius``."""

    series: germ_ops.Germ
    radius: float = float("inf")

    @classmethod
    def from_germ(cls, g, radius=None):
        return cls(g, estimate_validity_radius(g) if radius is None else radius)

    @property
    def multiplier(self):
        g = self.series
        if g.field.is_exact:
            return Multiplier(g.multiplier, g.multiplier_tag or _unit_tag(g.multiplier))
        if g.multiplier_tag is not None:
            return Multiplier(tag=g.multiplier_tag)
        return Multiplier(exact=EXACT.coerce(g.field.to_complex(g.multiplier)))

    @property
    def validity_radius(self):
        return self.radius

    def germ(self, truncation, field_):
        source = self.series.field
        values = [c if field_ == source else field_.coerce(source.serialize(c))
                  for c in self.series.coeffs]
        return germ_ops.from_coefficients(values, truncation, field_, self.series.multiplier_tag)

    def _check(self, z, field_):
        if float(field_.modulus(z)) > self.radius:
            raise OutsideValidity(f"|z| exceeds the validity radius {self.radius:.3g}")

    def apply(self, z, field_):
        self._check(z, field_)
        return germ_ops.evaluate(self.germ(self.series.truncation, field_), z)

    def apply_inverse(self, z, field_):
        self._check(z, field_)
        return germ_ops.evaluate(germ_ops.invert(self.germ(self.series.truncation, field_)), z)

    def derivative(self, z, field_):
        g = self.germ(self.series.truncation, field_)
        total = field_.zero
        for n in range(g.truncation, 0, -1):
            total = total * z + n * g.coefficient(n)
        return total

    def kernel(self):
        field_ = self.series.field
        coeffs = tuple(field_.to_complex(c) for c in self.series.coeffs)
        inverse = germ_ops.invert(self.series)
        return NumericKernel("series", coeffs, tuple(field_.to_complex(c) for c in inverse.coeffs),
                             validity=self.radius)

    def inverse(self):
        return SeriesMap(germ_ops.invert(self.series), self.radius)

    def describe(self):
        return f"series(T={self.series.truncation})"


@dataclass(frozen=True)
class InverseMap(HolomorphicMap):
    base: HolomorphicMap

    @property
    def multiplier(self):
        return self.base.multiplier.inverse()

    @property
    def validity_radius(self):
        return self.base.validity_radius

    def germ(self, truncation, field_):
        return germ_ops.invert(self.base.germ(truncation, field_))

    def apply(self, z, field_):
        return self.base.apply_inverse(z, field_)

    def apply_inverse(self, z, field_):
        return self.base.apply(z, field_)

    def derivative(self, z, field_):
        return field_.one / self.base.derivative(self.base.apply_inverse(z, field_), field_)

    def kernel(self):
        return NumericKernel("inverse", parts=(self.base.kernel(),))

    def inverse(self):
        return self.base

    def describe(self):
        return f"invert({self.base.describe()})"

    def closed_form_linearization(self):
        return self.base.closed_form_linearization()


@dataclass(frozen=True)
class CompositeMap(HolomorphicMap):
    """maps[0] o maps[1] o ... o maps[-1]; the last one acts first."""

    maps: Tuple[HolomorphicMap, ...]
    label: Optional[str] = None

    @property
    def multiplier(self):
        result = self.maps[0].multiplier
        for m in self.maps[1:]:
            result = result.times(m.multiplier)
        return result

    @property
    def validity_radius(self):
        return min(m.validity_radius for m in self.maps)

    def germ(self, truncation, field_):
        result = self.maps[-1].germ(truncation, field_)
        for m in reversed(self.maps[:-1]):
            result = germ_ops.compose(m.germ(truncation, field_), result)
        return result

    def apply(self, z, field_):
        for m in reversed(self.maps):
            z = m.apply(z, field_)
        return z

    def apply_inverse(self, z, field_):
        for m in self.maps:
            z = m.apply_inverse(z, field_)
        return z

    def derivative(self, z, field_):
        total = field_.one
        for m in reversed(self.maps):
            total = total * m.derivative(z, field_)
            z = m.apply(z, field_)
        return total

    def kernel(self):
        return NumericKernel("composite", parts=tuple(m.kernel() for m in self.maps))

    def inverse(self):
        return CompositeMap(tuple(m.inverse() for m in reversed(self.maps)),
                            f"invert({self.describe()})")

    def describe(self):
        if self.label:
            return self.label
        return "compose({})".format(",".join(m.describe() for m in self.maps))

    def closed_form_linearization(self):
        if len(self.maps) == 3 and self.label and self.label.startswith("conj("):
            return self.maps[1].closed_form_linearization()
        if all(m.closed_form_linearization() == "linear by construction" for m in self.maps):
            return "linear by construction"
        return None


def conjugate_map(f, h):
    """h o f o h^-1 as a map."""
    return CompositeMap((h, f, h.inverse()), f"conj({f.describe()},{h.describe()})")


def iterate_map(f, n):
    if n == 0:
        return identity_map()
    base = f if n > 0 else f.inverse()
    if abs(n) == 1:
        return base
    return CompositeMap(tuple([base] * abs(n)), f"iterate({f.describe()},{n})")


def koenigs_orbit_limit(f, z, n, field_):
    """
    Orbit-limit Koenigs coordinate at z.

    Attracting multipliers use lambda^-n f^n(z); repelling ones use
    lambda^n f^-n(z). Both tend to the tangent-to-identity linearizer.
    """
    lam = f.multiplier.value(field_)
    size = float(field_.modulus(lam))
    if size == 1.0:
        raise ConfigurationError("the orbit-limit Koenigs map needs |lambda| != 1")
    w = z
    if size < 1:
        for _ in range(n):
            w = f.apply(w, field_)
        return w / lam ** n
    for _ in range(n):
        w = f.apply_inverse(w, field_)
    return w * lam ** n
