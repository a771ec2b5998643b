"""Exact rational scalars and their "p/q" text form."""
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def Q(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to a Fraction.

    Floats are rejected on purpose: they would silently smuggle binary
    rounding into equality decisions.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"decimal rational literal not allowed: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def fmt(value: Fraction) -> str:
    """Serialize as "p/q" (always with a denominator)."""
    value = Q(value)
    return f"{value.numerator}/{value.denominator}"


def dyadic(x: float, bits: int = 32) -> Fraction:
    """Round a float to the nearest multiple of 2**-bits."""
    return Fraction(round(x * (1 << bits)), 1 << bits)
