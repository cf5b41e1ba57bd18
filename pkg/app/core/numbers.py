from fractions import Fraction


def as_fraction(value: int | float | Fraction) -> Fraction:
    """Exact rational for a parameter; floats are read by their shortest decimal repr (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(repr(float(value)))
