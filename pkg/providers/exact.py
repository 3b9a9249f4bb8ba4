"""
Exact Gaussian-rational coefficients.

Elements are sympy ``QQ_I`` values, so every sum, product and quotient is
exact. This backend is the oracle for the germ algebra tests; coefficient
sizes grow without bound, so keep truncation orders modest.
"""

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from sympy.polys.domains import QQ, QQ_I

from dynamics.errors import ConfigurationError

# e^{2 pi i p/q} is a Gaussian rational only for these angles.
_GAUSSIAN_ROOTS = {
    Fraction(0): (0, 0, 1, 0),
    Fraction(1, 4): (0, 0, 0, 1),
    Fraction(1, 2): (0, 0, -1, 0),
    Fraction(3, 4): (0, 0, 0, -1),
}


def _rational(value):
    """Convert ints, Fractions, floats and rational strings into a QQ element."""
    if isinstance(value, str):
        value = Fraction(value.strip())
    elif isinstance(value, float):
        value = Fraction(value)
    elif not isinstance(value, Fraction):
        value = Fraction(int(value.numerator), int(value.denominator)) if hasattr(value, "denominator") else Fraction(value)
    return QQ(value.numerator, value.denominator)


def to_fraction(q):
    """Convert a QQ element (python or gmpy flavour) into a Fraction."""
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass(frozen=True)
class GaussianRationalField:
    """Exact arithmetic over Q(i); no rounding ever happens."""

    name: str = "exact"

    @property
    def is_exact(self):
        return True

    @property
    def precision_bits(self):
        return None

    @property
    def zero(self):
        return QQ_I(QQ(0), QQ(0))

    @property
    def one(self):
        return QQ_I(QQ(1), QQ(0))

    def element(self, real, imag=0):
        return QQ_I(_rational(real), _rational(imag))

    def coerce(self, value):
        """
        Bring a number into the field.

        Args:
            value: int, Fraction, float, complex, rational string or QQ_I element

        Returns:
            The QQ_I element equal to value
        """
        if isinstance(value, QQ_I.dtype):
            return value
        if isinstance(value, complex):
            return self.element(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return self.element(value[0], value[1])
        try:
            return self.element(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"cannot represent {value!r} exactly") from exc

    def parts(self, x):
        """Return (real, imag) as Fractions."""
        return to_fraction(x.x), to_fraction(x.y)

    def to_complex(self, x):
        re, im = self.parts(x)
        return complex(float(re), float(im))

    def modulus_squared(self, x):
        re, im = self.parts(x)
        return re * re + im * im

    def modulus(self, x):
        square = self.modulus_squared(x)
        return mpmath.sqrt(mpmath.mpf(square.numerator) / square.denominator)

    def is_zero(self, x, threshold=None):
        return x == self.zero

    def is_unitary(self, x, threshold=None):
        return self.modulus_squared(x) == 1

    def root_of_unity(self, theta):
        """
        Return e^{2 pi i theta} for a rational theta with denominator dividing 4.

        Raises:
            ConfigurationError: the root is not a Gaussian rational
        """
        key = Fraction(theta) % 1
        if key not in _GAUSSIAN_ROOTS:
            raise ConfigurationError(
                f"e^(2 pi i {key}) is not a Gaussian rational; use a float field")
        _, _, re, im = _GAUSSIAN_ROOTS[key]
        return self.element(re, im)

    def serialize(self, x):
        re, im = self.parts(x)
        return [str(re), str(im)]

    def deserialize(self, pair):
        return self.element(Fraction(str(pair[0])), Fraction(str(pair[1])))
