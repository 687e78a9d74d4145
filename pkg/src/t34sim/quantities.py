"""Exact fixed-point quantities.

Volumes, rates and diameters are exact rationals constrained to hundredths
(two decimals) at the boundaries where values enter or leave the system.
Intermediate safety math (tolerances) may produce finer fractions and stays
exact; nothing in this package rounds floats.
"""

from fractions import Fraction


def centi(value) -> Fraction:
    """Parse a quantity that must be representable in hundredths.

    Accepts int, str ("15.36"), Fraction, or a float whose shortest repr is
    already a hundredths value. Anything else (float noise, finer fractions)
    is rejected rather than silently rounded.
    """
    if isinstance(value, bool):
        raise TypeError("boolean is not a quantity")
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, int):
        frac = Fraction(value)
    elif isinstance(value, float):
        frac = Fraction(repr(value))
    elif isinstance(value, str):
        frac = Fraction(value.strip())
    else:
        raise TypeError(f"cannot read a quantity from {type(value).__name__}")
    if 100 % frac.denominator != 0:
        raise ValueError(f"{value!r} is not representable in hundredths")
    return frac


def hundredths(value) -> int:
    """The quantity as a whole number of hundredths."""
    frac = centi(value) * 100
    return frac.numerator  # denominator is 1 after the centi check
