"""Exception types raised across the holonomy toolkit."""


class HolonomyError(Exception):
    """Base class for every failure the toolkit reports."""


class ConfigurationError(HolonomyError):
    """Mismatched truncation orders, fields or out-of-range settings."""


class NotDiffeomorphismError(HolonomyError):
    """The linear coefficient of a germ vanishes."""


class ResonanceObstruction(HolonomyError):
    def __init__(self, order, residual=None):
        self.order = order
        self.residual = residual
        super().__init__(f"resonance obstruction at order {order}")


class PrecisionExhausted(HolonomyError):
    def __init__(self, depth, message=None):
        self.depth = depth
        super().__init__(message or f"precision exhausted after {depth} partial quotients")


class DefinedOnlyForIrrational(HolonomyError):
    """A Brjuno or Cremer quantity was requested for a rational angle."""


class DegenerateTorsion(HolonomyError):
    def __init__(self, n):
        self.n = n
        super().__init__(f"1 - mu^n vanishes at n = {n}")


class NotCaseII(HolonomyError):
    """The germ is the identity through the truncation order."""


class OutOfTableScope(HolonomyError):
    """A multiplier is not unitary, so the ten-case table does not apply."""


class UnclassifiedCase(HolonomyError):
    """A linearizability verdict is Unknown."""


class NonCommutingPair(HolonomyError):
    def __init__(self, defect, tolerance):
        self.defect = defect
        self.tolerance = tolerance
        super().__init__(f"commutator defect {defect:.3e} exceeds tolerance {tolerance:.1e}")


class RepresentationError(NonCommutingPair):
    """The pair cannot be the holonomy of a torus: f and g do not commute."""


class ModulusError(HolonomyError):
    """The torus modulus does not lie in the upper half plane."""


class InadmissibleDisk(HolonomyError):
    """The map or its inverse fails the univalence check on the closed disk."""


class ExpressionError(HolonomyError):
    """A map expression, rotation number or model file could not be parsed."""


class OutsideValidity(HolonomyError):
    """A truncated-series map was evaluated beyond its validity radius."""
