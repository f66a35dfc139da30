"""Helpers for exact rationals and their "num/den" text form."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

__all__ = ["Fraction", "as_fraction", "fmt", "lcm", "lcm_all"]


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction.

    Floats are rejected: every quantity in this library is exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def fmt(value) -> str:
    """Render a rational as "num/den" (denominator always written)."""
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def lcm_all(values) -> int:
    out = 1
    for v in values:
        out = lcm(out, int(v))
    return out
