"""Coefficient fields for germ arithmetic."""

from providers.binary_float import DEFAULT_PRECISION_BITS, BinaryFloatField
from providers.exact import GaussianRationalField

__all__ = ["BinaryFloatField", "GaussianRationalField", "DEFAULT_PRECISION_BITS", "field_from_name"]


def field_from_name(name, default_bits=DEFAULT_PRECISION_BITS):
    """
    Resolve a field name such as "exact", "float" or "float512".

    Args:
        name: Field name as written in JSON or on the command line
        default_bits: Precision used for a bare "float"

    Returns:
        A coefficient field instance
    """
    from dynamics.errors import ConfigurationError

    name = (name or "float").strip().lower()
    if name == "exact":
        return GaussianRationalField()
    if name == "float":
        return BinaryFloatField(default_bits)
    if name.startswith("float"):
        try:
            return BinaryFloatField(int(name[len("float"):]))
        except ValueError as exc:
            raise ConfigurationError(f"unknown field {name!r}") from exc
    raise ConfigurationError(f"unknown field {name!r}")
