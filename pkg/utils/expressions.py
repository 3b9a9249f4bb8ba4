"""
Map expression mini-language.

    id                      identity
    rot(theta)              w -> e^{2 pi i theta} w
    lin(c)                  w -> c w
    mobius(a,b,c,d)         w -> (a w + b) / (c w + d), b must be 0
    poly(lambda,c2,...,cd)  w -> lambda w + c2 w^2 + ... + cd w^d
    conj(f,h)               h o f o h^-1
    compose(f,g,...)        f o g o ...
    invert(f)               f^-1
    iterate(f,n)            f^n

Numbers are exact Gaussian rationals built from integers, decimals, ``i``
and + - * / ^ with parentheses. ``lambda`` in ``poly`` and ``c`` in ``lin``
may also be written ``rot(theta)``. ``theta`` is any rotation number
accepted by :func:`dynamics.arithmetic.parse_rotation_number`.
"""

import re
from fractions import Fraction

from dynamics.arithmetic import parse_rotation_number
from dynamics.errors import ExpressionError
from dynamics.maps import (
    EXACT,
    LinearMap,
    MobiusMap,
    Multiplier,
    PolynomialMap,
    CompositeMap,
    conjugate_map,
    identity_map,
    iterate_map,
)

MAX_EXPRESSION_ITERATE = 1000
MAX_SCALAR_EXPONENT = 10 ** 5

_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def fail(self, message):
        raise ExpressionError(f"{message} at position {self.pos} in {self.text!r}")

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char):
        if self.peek() != char:
            self.fail(f"expected {char!r}")
        self.pos += 1

    def accept(self, char):
        if self.peek() == char:
            self.pos += 1
            return True
        return False

    def name(self):
        self.skip()
        match = _NAME.match(self.text, self.pos)
        if not match:
            self.fail("expected a name")
        self.pos = match.end()
        return match.group(0)

    def at_name(self, word):
        self.skip()
        match = _NAME.match(self.text, self.pos)
        return bool(match) and match.group(0) == word

    def done(self):
        if self.peek():
            self.fail("unexpected trailing input")

    def raw_argument(self):
        """Text up to the next top-level ',' or ')'."""
        self.skip()
        depth, start = 0, self.pos
        while self.pos < len(self.text):
            char = self.text[self.pos]
            if char in "([":
                depth += 1
            elif char in ")]":
                if depth == 0:
                    break
                depth -= 1
            elif char == "," and depth == 0:
                break
            self.pos += 1
        raw = self.text[start:self.pos].strip()
        if not raw:
            self.fail("empty argument")
        return raw

    # maps

    def map_expr(self):
        word = self.name().lower()
        if word == "id":
            return identity_map()
        self.expect("(")
        if word == "rot":
            result = LinearMap(Multiplier.rotation(self.rotation_number()))
        elif word == "lin":
            result = LinearMap(self.multiplier())
        elif word == "mobius":
            values = self.scalars()
            if len(values) != 4:
                self.fail("mobius takes exactly four arguments")
            result = MobiusMap.of(*values)
        elif word == "poly":
            lam = self.multiplier()
            coeffs = []
            while self.accept(","):
                coeffs.append(self.scalar())
            while coeffs and coeffs[-1] == EXACT.zero:
                coeffs.pop()
            result = PolynomialMap(lam, tuple(coeffs))
        elif word == "conj":
            f = self.map_expr()
            self.expect(",")
            result = conjugate_map(f, self.map_expr())
        elif word == "compose":
            maps = [self.map_expr()]
            while self.accept(","):
                maps.append(self.map_expr())
            result = maps[0] if len(maps) == 1 else CompositeMap(tuple(maps))
        elif word == "invert":
            result = self.map_expr().inverse()
        elif word == "iterate":
            f = self.map_expr()
            self.expect(",")
            count = self.integer()
            if abs(count) > MAX_EXPRESSION_ITERATE:
                self.fail(f"iterate count above {MAX_EXPRESSION_ITERATE}")
            result = iterate_map(f, count)
        else:
            self.fail(f"unknown map {word!r}")
        self.expect(")")
        return result

    def rotation_number(self):
        try:
            return parse_rotation_number(self.raw_argument())
        except ExpressionError as exc:
            self.fail(str(exc))

    def multiplier(self):
        if self.at_name("rot"):
            self.name()
            self.expect("(")
            theta = self.rotation_number()
            self.expect(")")
            return Multiplier.rotation(theta)
        value = self.scalar()
        if value == EXACT.zero:
            self.fail("the multiplier must be nonzero")
        return Multiplier.of(value)

    def integer(self):
        value = self.scalar()
        re_, im_ = EXACT.parts(value)
        if im_ != 0 or re_.denominator != 1:
            self.fail("expected an integer")
        return int(re_)

    # scalars

    def scalars(self):
        values = [self.scalar()]
        while self.accept(","):
            values.append(self.scalar())
        return values

    def scalar(self):
        value = self.term()
        while True:
            if self.accept("+"):
                value = value + self.term()
            elif self.accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            if self.accept("*"):
                value = value * self.factor()
            elif self.accept("/"):
                divisor = self.factor()
                if divisor == EXACT.zero:
                    self.fail("division by zero")
                value = value / divisor
            else:
                return value

    def factor(self):
        if self.accept("-"):
            return -self.factor()
        if self.accept("+"):
            return self.factor()
        base = self.atom()
        if self.accept("^"):
            exponent = self.factor()
            re_, im_ = EXACT.parts(exponent)
            if im_ != 0 or re_.denominator != 1:
                self.fail("exponents must be integers")
            return _power(base, int(re_))
        return base

    def atom(self):
        char = self.peek()
        if char == "(":
            self.pos += 1
            value = self.scalar()
            self.expect(")")
            return value
        match = _NUMBER.match(self.text, self.pos)
        if match:
            self.pos = match.end()
            value = EXACT.coerce(Fraction(match.group(0)))
            if self.peek() == "i" and not _NAME.match(self.text, self.pos + 1):
                self.pos += 1
                value = value * EXACT.element(0, 1)
            return value
        if self.at_name("i"):
            self.name()
            return EXACT.element(0, 1)
        self.fail("expected a number")


def _power(base, exponent):
    if abs(exponent) > MAX_SCALAR_EXPONENT:
        raise ExpressionError(f"exponent {exponent} exceeds {MAX_SCALAR_EXPONENT}")
    if exponent == 0:
        return EXACT.one
    if exponent < 0:
        if base == EXACT.zero:
            raise ExpressionError("zero raised to a negative power")
        base, exponent = EXACT.one / base, -exponent
    return base ** exponent


def parse_map(text):
    """
    Parse a map expression.

    Args:
        text: Expression such as ``mobius(1,0,-1,1)`` or ``poly(rot(golden),1)``

    Returns:
        A HolomorphicMap

    Raises:
        ExpressionError: malformed input
    """
    parser = _Parser(text)
    result = parser.map_expr()
    parser.done()
    return result


def parse_scalar(text):
    """Parse an exact Gaussian rational such as ``0.5``, ``1e-3*i`` or ``(1+2i)/3``."""
    parser = _Parser(text)
    value = parser.scalar()
    parser.done()
    return value
