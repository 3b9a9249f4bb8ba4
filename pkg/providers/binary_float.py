"""
High-precision binary floating-point coefficients backed by mpmath.

Each precision gets its own ``mpmath.MPContext`` so that fields of different
precision never disturb one another or the global ``mpmath.mp`` settings.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from dynamics.errors import ConfigurationError

DEFAULT_PRECISION_BITS = 256
MINIMUM_PRECISION_BITS = 53


@lru_cache(maxsize=None)
def context(bits):
    """Shared read-only mpmath context for a precision."""
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


@dataclass(frozen=True)
class BinaryFloatField:
    """Complex numbers rounded to ``bits`` of binary precision."""

    bits: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        if self.bits < MINIMUM_PRECISION_BITS:
            raise ConfigurationError(
                f"precision must be at least {MINIMUM_PRECISION_BITS} bits, got {self.bits}")

    @property
    def name(self):
        return f"float{self.bits}"

    @property
    def is_exact(self):
        return False

    @property
    def precision_bits(self):
        return self.bits

    @property
    def ctx(self):
        return context(self.bits)

    @property
    def zero(self):
        return self.ctx.mpc(0)

    @property
    def one(self):
        return self.ctx.mpc(1)

    def real(self, value):
        """Coerce a real number (including Fractions and huge ints) into an mpf."""
        ctx = self.ctx
        if isinstance(value, str) and "/" in value:
            value = Fraction(value.strip())
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, (int, float)):
            return ctx.mpf(int(value.numerator)) / int(value.denominator)
        return ctx.mpf(value)

    def element(self, real, imag=0):
        return self.ctx.mpc(self.real(real), self.real(imag))

    def coerce(self, value):
        """
        Bring a number into the field, rounding to the field precision.

        Args:
            value: int, Fraction, float, complex, mpf/mpc, string or QQ_I element

        Returns:
            An mpc of this field's context
        """
        if hasattr(value, "x") and hasattr(value, "y"):
            return self.element(value.x, value.y)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return self.element(value[0], value[1])
        if isinstance(value, complex):
            return self.ctx.mpc(value.real, value.imag)
        if isinstance(value, (int, Fraction, str)):
            return self.element(value)
        try:
            return self.ctx.mpc(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"cannot coerce {value!r} into {self.name}") from exc

    def parts(self, x):
        return x.real, x.imag

    def to_complex(self, x):
        return complex(x)

    def modulus(self, x):
        return abs(x)

    def is_zero(self, x, threshold):
        return abs(x) <= threshold

    def is_unitary(self, x, threshold):
        return abs(abs(x) - 1) <= threshold

    def root_of_unity(self, theta):
        """Return e^{2 pi i theta} for a real theta (mpf, Fraction or float)."""
        return self.ctx.expjpi(2 * self.real(theta))

    def serialize(self, x):
        digits = self.ctx.dps + 5
        return [self.ctx.nstr(x.real, digits), self.ctx.nstr(x.imag, digits)]

    def deserialize(self, pair):
        return self.element(str(pair[0]), str(pair[1]))
