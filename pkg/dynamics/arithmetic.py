"""
Rotation-number arithmetic.

A rotation number theta stands for the multiplier e^{2 pi i theta}. It is
carried in one of three forms:

- ``rational``: exact p/q with 0 <= p < q.
- ``cf``: an irrational given by its leading partial quotients; the
  expansion continues with 1s, or repeats the last quotient when the
  ``repeat`` tail is selected (``cf:[0;2,2,...]``).
- ``real``: a decimal value known to a stated binary precision.

Verdicts that depend on irrationality are only certain for the first two
forms; everything derived from ``real`` values is labelled heuristic.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional, Tuple

import mpmath

from dynamics.errors import (
    ConfigurationError,
    DefinedOnlyForIrrational,
    DegenerateTorsion,
    ExpressionError,
    PrecisionExhausted,
)
from providers.binary_float import DEFAULT_PRECISION_BITS, context

DEFAULT_MAX_Q = 10 ** 6
DEFAULT_TORSION_TOL = 1e-30
DEFAULT_CREMER_SWEEP = (2, 10, 100)

NAMED_ANGLES = {
    "golden": ((1,), "repeat"),
    "silver": ((2,), "repeat"),
    "sqrt2-1": ((2,), "repeat"),
}

_MAX_DIGIT_EXPONENT = 10 ** 5


@dataclass(frozen=True)
class RotationNumber:
    kind: str
    p: int = 0
    q: int = 1
    digits: Tuple[int, ...] = ()
    tail: str = "ones"
    value: str = ""
    precision: int = 0

    @classmethod
    def rational(cls, p, q=1):
        if q <= 0:
            raise ConfigurationError("rotation number denominator must be positive")
        p, q = int(p), int(q)
        p %= q
        g = gcd(p, q) or 1
        return cls(kind="rational", p=p // g, q=q // g)

    @classmethod
    def from_cf(cls, digits, tail="ones"):
        digits = tuple(int(a) for a in digits)
        if not digits:
            raise ConfigurationError("a continued fraction needs at least one partial quotient")
        if any(a <= 0 for a in digits):
            raise ConfigurationError("partial quotients must be positive integers")
        if tail not in ("ones", "repeat"):
            raise ConfigurationError(f"unknown continued fraction tail {tail!r}")
        return cls(kind="cf", digits=digits, tail=tail)

    @classmethod
    def real(cls, value, precision=DEFAULT_PRECISION_BITS):
        ctx = context(precision)
        x = ctx.mpf(value)
        x = x - ctx.floor(x)
        return cls(kind="real", value=ctx.nstr(x, ctx.dps + 3), precision=int(precision))

    @property
    def is_rational(self):
        return self.kind == "rational"

    @property
    def is_certain(self):
        return self.kind in ("rational", "cf")

    def partial_quotient(self, n):
        """a_n for n >= 1 of a cf-kind number, following the tail rule."""
        if n <= len(self.digits):
            return self.digits[n - 1]
        return 1 if self.tail == "ones" else self.digits[-1]

    def leading_digits(self, count):
        return tuple(self.partial_quotient(n) for n in range(1, count + 1))

    def as_fraction(self):
        if not self.is_rational:
            raise DefinedOnlyForIrrational("not an exact rational rotation number")
        return Fraction(self.p, self.q)

    def approximate(self, bits=DEFAULT_PRECISION_BITS):
        """Value of theta as an mpf of the given precision."""
        ctx = context(bits)
        if self.kind == "rational":
            return ctx.mpf(self.p) / self.q
        if self.kind == "real":
            return ctx.mpf(self.value)
        target = 1 << (bits + 16)
        p_prev, q_prev, p, q = 1, 0, 0, 1
        n = 0
        while n < len(self.digits) + 1 or q * q <= target:
            n += 1
            a = self.partial_quotient(n)
            p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        return ctx.mpf(p) / q

    def negate(self):
        """Rotation number of the inverse germ, 1 - theta mod 1."""
        if self.kind == "rational":
            return RotationNumber.rational(-self.p, self.q)
        if self.kind == "real":
            return RotationNumber.real(1 - context(self.precision).mpf(self.value), self.precision)
        digits = self.leading_digits(len(self.digits) + 2)
        if digits[0] > 1:
            flipped = (1, digits[0] - 1) + digits[1:]
        else:
            flipped = (digits[1] + 1,) + digits[2:]
        return RotationNumber.from_cf(flipped, self.tail)

    def scale(self, n):
        """Rotation number of the n-th iterate."""
        if n == 1:
            return self
        if n == -1:
            return self.negate()
        if self.kind == "rational":
            return RotationNumber.rational(n * self.p, self.q)
        if n == 0:
            return RotationNumber.rational(0, 1)
        bits = self.precision or DEFAULT_PRECISION_BITS
        return RotationNumber.real(n * self.approximate(bits), bits)

    def add(self, other):
        """Rotation number of a product of multipliers."""
        if other is None:
            return None
        if other.is_rational and other.p == 0:
            return self
        if self.is_rational and self.p == 0:
            return other
        if self.is_rational and other.is_rational:
            return RotationNumber.rational(self.p * other.q + other.p * self.q, self.q * other.q)
        bits = max(self.precision or DEFAULT_PRECISION_BITS, other.precision or DEFAULT_PRECISION_BITS)
        return RotationNumber.real(self.approximate(bits) + other.approximate(bits), bits)

    def describe(self):
        if self.kind == "rational":
            return f"{self.p}/{self.q}"
        if self.kind == "real":
            return self.value
        body = ",".join(str(a) if a.bit_length() < 64 else f"2^{a.bit_length() - 1}"
                        if a & (a - 1) == 0 else str(a) for a in self.digits)
        return f"cf:[0;{body}{',...' if self.tail == 'repeat' else ''}]"

    def to_json(self):
        if self.kind == "rational":
            return {"kind": "rational", "p": self.p, "q": self.q}
        if self.kind == "cf":
            return {"kind": "cf", "digits": [str(a) for a in self.digits], "tail": self.tail}
        return {"kind": "real", "value": self.value, "precision": self.precision}

    @classmethod
    def from_json(cls, data):
        kind = data.get("kind")
        if kind == "rational":
            return cls.rational(int(data["p"]), int(data["q"]))
        if kind == "cf":
            return cls.from_cf([int(a) for a in data["digits"]], data.get("tail", "ones"))
        if kind == "real":
            return cls.real(data["value"], int(data.get("precision", DEFAULT_PRECISION_BITS)))
        raise ExpressionError(f"unknown rotation number kind {kind!r}")


def _digit(text):
    text = text.strip()
    match = re.fullmatch(r"(\d+)\s*(?:\^|\*\*)\s*(\d+)", text)
    if match:
        base, exponent = int(match.group(1)), int(match.group(2))
        if exponent > _MAX_DIGIT_EXPONENT:
            raise ExpressionError(f"partial quotient exponent too large: {text}")
        return base ** exponent
    if not text.isdigit():
        raise ExpressionError(f"bad partial quotient {text!r}")
    return int(text)


def parse_rotation_number(text, precision=DEFAULT_PRECISION_BITS):
    """
    Parse a rotation number.

    Accepted forms: ``golden``, ``silver`` (also ``sqrt2-1``), ``p/q``, an
    integer, a decimal such as ``0.1234`` (read as a real of the given
    precision) and ``cf:[a0;a1,a2,...]``.

    Args:
        text: The rotation number as written by the user
        precision: Binary precision attached to decimal input

    Returns:
        RotationNumber
    """
    raw = text.strip()
    lowered = raw.lower()
    if lowered in NAMED_ANGLES:
        digits, tail = NAMED_ANGLES[lowered]
        return RotationNumber.from_cf(digits, tail)
    if lowered.startswith("cf:"):
        match = re.fullmatch(r"cf:\s*\[\s*([^;\]]*?)\s*;\s*(.*?)\s*\]", raw, flags=re.IGNORECASE)
        if not match:
            raise ExpressionError(f"bad continued fraction {raw!r}")
        body = match.group(2).replace("…", "...")
        parts = [p.strip() for p in body.split(",") if p.strip()]
        tail = "ones"
        if parts and parts[-1] == "...":
            tail = "repeat"
            parts = parts[:-1]
        if not parts:
            raise ExpressionError(f"continued fraction {raw!r} has no partial quotients")
        return RotationNumber.from_cf([_digit(p) for p in parts], tail)
    if re.fullmatch(r"-?\d+\s*/\s*\d+", raw):
        num, den = raw.split("/")
        return RotationNumber.rational(int(num), int(den))
    if re.fullmatch(r"-?\d+", raw):
        return RotationNumber.rational(int(raw), 1)
    try:
        return RotationNumber.real(raw, precision)
    except (ValueError, TypeError) as exc:
        raise ExpressionError(f"cannot parse rotation number {raw!r}") from exc


@dataclass(frozen=True)
class ContinuedFraction:
    partial_quotients: Tuple[int, ...]
    convergents: Tuple[Tuple[int, int], ...]
    terminating: bool = False

    @property
    def depth(self):
        return len(self.partial_quotients) - 1

    @property
    def denominators(self):
        return tuple(q for _, q in self.convergents)


def convergents_of(quotients):
    """Convergents p_n/q_n from the standard recurrence."""
    p_prev, q_prev, p, q = 1, 0, quotients[0], 1
    result = [(p, q)]
    for a in quotients[1:]:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        result.append((p, q))
    return tuple(result)


def _expand_fraction(x, depth):
    quotients = []
    terminating = False
    while len(quotients) <= depth:
        a = x.numerator // x.denominator
        quotients.append(a)
        rest = x - a
        if rest == 0:
            terminating = True
            break
        x = 1 / rest
    return quotients, terminating


def _mpf_to_fraction(x):
    man, exp = x.man_exp
    if man is None:
        return Fraction(0)
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


def continued_fraction(theta, depth):
    """
    Expand theta to ``depth`` partial quotients after a_0.

    Real values are expanded from both ends of their error interval at once;
    a quotient is accepted only when both ends agree.

    Raises:
        PrecisionExhausted: the real value cannot certify the next quotient
    """
    if depth < 1:
        raise ConfigurationError("continued fraction depth must be at least 1")
    if theta.kind == "rational":
        quotients, terminating = _expand_fraction(Fraction(theta.p, theta.q), depth)
        return ContinuedFraction(tuple(quotients), convergents_of(quotients), terminating)
    if theta.kind == "cf":
        quotients = (0,) + theta.leading_digits(depth)
        return ContinuedFraction(quotients, convergents_of(quotients), False)

    ctx = context(theta.precision)
    centre = _mpf_to_fraction(ctx.mpf(theta.value))
    eps = Fraction(1, 2 ** (theta.precision - 2))
    lo, hi = centre - eps, centre + eps
    quotients = []
    while len(quotients) <= depth:
        a_lo = lo.numerator // lo.denominator
        a_hi = hi.numerator // hi.denominator
        if a_lo != a_hi:
            partial = ContinuedFraction(tuple(quotients), convergents_of(quotients)) if quotients else None
            q_last = partial.denominators[-1] if partial else 1
            needed = 2 * q_last.bit_length() + 8
            error = PrecisionExhausted(
                len(quotients) - 1,
                f"{theta.precision} bits certify only {max(len(quotients) - 1, 0)} partial quotients "
                f"(next quotient needs roughly {needed} bits)")
            error.partial = partial
            raise error
        quotients.append(a_lo)
        lo, hi = lo - a_lo, hi - a_lo
        if lo <= 0 or hi <= 0:
            error = PrecisionExhausted(len(quotients) - 1)
            error.partial = ContinuedFraction(tuple(quotients), convergents_of(quotients))
            raise error
        lo, hi = 1 / hi, 1 / lo
    return ContinuedFraction(tuple(quotients), convergents_of(quotients), False)


@dataclass(frozen=True)
class TorsionResult:
    kind: str
    q: Optional[int] = None
    max_q: Optional[int] = None
    heuristic: bool = False

    @property
    def is_torsion(self):
        return self.kind == "torsion"

    def to_json(self):
        data = {"kind": self.kind, "heuristic": self.heuristic}
        if self.q is not None:
            data["q"] = self.q
        if self.max_q is not None:
            data["max_q"] = self.max_q
        return data


def is_torsion(theta, max_q=DEFAULT_MAX_Q, tol=DEFAULT_TORSION_TOL):
    """
    Decide whether e^{2 pi i theta} is a root of unity of order at most max_q.

    Exact rationals and symbolic continued fractions are decided exactly.
    Real values are scanned along their (uncertified) convergents, which
    realise the minimum of |q theta - p| over q up to each denominator.
    """
    if theta.kind == "rational":
        return TorsionResult("torsion", q=theta.q)
    if theta.kind == "cf":
        return TorsionResult("non_torsion", max_q=max_q)
    ctx = context(theta.precision)
    x = ctx.mpf(theta.value)
    remainder = x
    p_prev, q_prev, p, q = 1, 0, 0, 1
    while q <= max_q:
        if abs(q * x - p) < tol:
            return TorsionResult("torsion", q=q, heuristic=True)
        fractional = remainder - ctx.floor(remainder)
        if fractional == 0:
            break
        remainder = 1 / fractional
        a = int(ctx.floor(remainder))
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
    return TorsionResult("non_torsion", max_q=max_q, heuristic=True)


def brjuno_partial_sum(cf, n_terms):
    """
    Sum of log(q_{n+1}) / q_n for n = 0..N.

    Raises:
        DefinedOnlyForIrrational: the expansion terminates
    """
    if cf.terminating:
        raise DefinedOnlyForIrrational("Brjuno sums are defined only for irrational angles")
    if len(cf.convergents) < n_terms + 2:
        raise ConfigurationError(
            f"need {n_terms + 2} convergents for N = {n_terms}, have {len(cf.convergents)}")
    ctx = context(64)
    q = cf.denominators
    total = ctx.mpf(0)
    for n in range(n_terms + 1):
        total += ctx.log(q[n + 1]) / q[n]
    return float(total)


@dataclass(frozen=True)
class CremerEvidence:
    """Log-domain samples of n log A + log|1 - mu^n| / (d^n - 1)."""

    min_value: float
    at_n: int
    A: float
    d: int
    n_max: int
    trusted_up_to: Optional[int]
    values_at_denominators: Tuple[Tuple[int, float], ...] = field(default_factory=tuple)

    def to_json(self):
        return {
            "kind": "cremer",
            "min_value": self.min_value,
            "at_n": self.at_n,
            "A": self.A,
            "d": self.d,
            "N": self.n_max,
            "trusted_up_to": self.trusted_up_to,
            "at_denominators": [[q, v] for q, v in self.values_at_denominators],
        }


def _cremer_precision(theta, n_max):
    if theta.kind == "real":
        return theta.precision
    if theta.kind == "rational":
        return 64 + 2 * theta.q.bit_length() + n_max.bit_length()
    cf = continued_fraction(theta, len(theta.digits) + 1)
    return 96 + 2 * cf.denominators[-1].bit_length() + n_max.bit_length()


def strong_cremer_check(mu_tag, d, A, n_max):
    """
    Evaluate the strong Cremer quantity for n = 1..N in the log domain.

    Returns:
        CremerEvidence with the minimum over the range and the values at the
        continued-fraction denominators inside it

    Raises:
        DegenerateTorsion: mu^n = 1 for some n <= N
    """
    if d < 2 or A <= 1 or n_max < 1:
        raise ConfigurationError("strong Cremer check needs d >= 2, A > 1, N >= 1")
    if mu_tag.kind == "rational" and mu_tag.q <= n_max:
        raise DegenerateTorsion(mu_tag.q)

    bits = _cremer_precision(mu_tag, n_max)
    ctx = context(bits)
    theta = mu_tag.approximate(bits)
    log_a = ctx.log(A)
    trusted = None
    denominators = set()
    if mu_tag.kind != "real":
        try:
            cf = continued_fraction(mu_tag, max(len(mu_tag.digits), 1) + 1)
            denominators = {q for q in cf.denominators if 1 <= q <= n_max}
            if mu_tag.kind == "cf":
                trusted = cf.denominators[-1]
        except PrecisionExhausted:
            pass

    best_value, best_n = None, None
    at_denominators = []
    power = ctx.mpf(1)
    for n in range(1, n_max + 1):
        power *= d
        angle = n * theta
        angle -= ctx.floor(angle)
        chord = abs(2 * ctx.sinpi(angle))
        if chord == 0:
            raise DegenerateTorsion(n)
        value = n * log_a + ctx.log(chord) / (power - 1)
        if best_value is None or value < best_value:
            best_value, best_n = value, n
        if n in denominators:
            at_denominators.append((n, float(value)))
    return CremerEvidence(
        min_value=float(best_value),
        at_n=best_n,
        A=float(A),
        d=d,
        n_max=n_max,
        trusted_up_to=trusted,
        values_at_denominators=tuple(at_denominators),
    )


def strong_cremer_sweep(mu_tag, d, n_max, a_values=DEFAULT_CREMER_SWEEP):
    """Run strong_cremer_check for each A in the sweep."""
    return {a: strong_cremer_check(mu_tag, d, a, n_max) for a in a_values}


@dataclass(frozen=True)
class ArithmeticVerdict:
    kind: str
    depth: int
    value: Optional[float] = None
    at_n: Optional[int] = None
    trail: Tuple[Tuple[str, float], ...] = ()

    def to_json(self):
        data = {"kind": self.kind, "depth": self.depth}
        if self.value is not None:
            data["value"] = self.value
        if self.at_n is not None:
            data["at_n"] = self.at_n
        if self.trail:
            data["trail"] = {k: v for k, v in self.trail}
        return data


def arithmetic_verdict(theta, depth=30, diophantine_exponent=2.0, brjuno_bound=50.0,
                       cremer_bound=0.0, d=2, a_value=2, cremer_n=64):
    """
    Grade theta from its continued fraction.

    Torsion first, then a Diophantine exponent bound on log q_{n+1}/log q_n,
    then the strong Cremer minimum over n <= cremer_n, then a bounded Brjuno
    partial sum. The result is reproducible from (theta, depth, thresholds).

    Raises:
        DegenerateTorsion: mu^n = 1 inside the Cremer range
    """
    torsion = is_torsion(theta)
    if torsion.is_torsion:
        return ArithmeticVerdict("torsion", depth=0, value=float(torsion.q))
    try:
        cf = continued_fraction(theta, depth)
    except PrecisionExhausted as exc:
        cf = getattr(exc, "partial", None)
        if cf is None or len(cf.convergents) < 3:
            return ArithmeticVerdict("inconclusive", depth=0)
    used = len(cf.convergents) - 2
    q = cf.denominators
    ratios = [float(mpmath.log(q[n + 1]) / mpmath.log(q[n])) for n in range(len(q) - 1) if q[n] >= 2]
    exponent = max(ratios) if ratios else 1.0
    brjuno = brjuno_partial_sum(cf, used)
    trail = (("diophantine_exponent", exponent), ("brjuno_partial_sum", brjuno))
    if exponent <= diophantine_exponent:
        return ArithmeticVerdict("diophantine", depth=used, value=exponent, trail=trail)
    evidence = strong_cremer_check(theta, d, a_value, cremer_n)
    trail += (("cremer_min", evidence.min_value),)
    if evidence.min_value <= cremer_bound:
        return ArithmeticVerdict("cremer", depth=used, value=evidence.min_value,
                                 at_n=evidence.at_n, trail=trail)
    if brjuno <= brjuno_bound:
        return ArithmeticVerdict("brjuno", depth=used, value=brjuno, trail=trail)
    return ArithmeticVerdict("inconclusive", depth=used, trail=trail)


@dataclass(frozen=True)
class MultiplierClass:
    """Where a multiplier sits in the table: torsion, non-torsion or non-unitary."""

    kind: str
    order: Optional[int] = None
    certain: bool = True
    theta: Optional[RotationNumber] = None

    @property
    def is_torsion(self):
        return self.kind == "torsion"

    @property
    def is_unitary(self):
        return self.kind != "non_unitary"

    def to_json(self):
        data = {"kind": self.kind, "certain": self.certain}
        if self.order is not None:
            data["order"] = self.order
        if self.theta is not None:
            data["theta"] = self.theta.describe()
        return data


_GAUSSIAN_UNIT_ORDERS = {(1, 0): 1, (-1, 0): 2, (0, 1): 4, (0, -1): 4}
_GAUSSIAN_UNIT_ANGLES = {(1, 0): (0, 1), (-1, 0): (1, 2), (0, 1): (1, 4), (0, -1): (3, 4)}


def multiplier_class(field_, multiplier, tag=None, threshold=DEFAULT_TORSION_TOL,
                     max_q=DEFAULT_MAX_Q):
    """
    Classify a multiplier, preferring its exact tag when one is attached.

    Gaussian rationals on the unit circle other than the four units are
    never roots of unity, so the exact field decides every case.
    """
    if tag is not None:
        result = is_torsion(tag, max_q, threshold)
        if result.is_torsion:
            return MultiplierClass("torsion", order=result.q, certain=not result.heuristic, theta=tag)
        return MultiplierClass("non_torsion", certain=not result.heuristic, theta=tag)
    if field_.is_exact:
        if field_.modulus_squared(multiplier) != 1:
            return MultiplierClass("non_unitary")
        re_, im_ = field_.parts(multiplier)
        key = (int(re_), int(im_)) if re_.denominator == 1 and im_.denominator == 1 else None
        if key in _GAUSSIAN_UNIT_ORDERS:
            p, q = _GAUSSIAN_UNIT_ANGLES[key]
            return MultiplierClass("torsion", order=_GAUSSIAN_UNIT_ORDERS[key],
                                   theta=RotationNumber.rational(p, q))
        return MultiplierClass("non_torsion")
    if not field_.is_unitary(multiplier, threshold):
        return MultiplierClass("non_unitary", certain=False)
    ctx = field_.ctx
    theta = RotationNumber.real(ctx.arg(multiplier) / (2 * ctx.pi), field_.bits)
    result = is_torsion(theta, max_q, threshold)
    if result.is_torsion:
        return MultiplierClass("torsion", order=result.q, certain=False, theta=theta)
    return MultiplierClass("non_torsion", certain=False, theta=theta)
