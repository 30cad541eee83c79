"""Exact rational helpers: canonical "num/den" strings and parsing.

All probabilities in this package are `fractions.Fraction` values.  The
serialized form is always "num/den" with the fraction fully reduced and a
positive denominator, so equal rationals serialize to identical strings.
"""

from fractions import Fraction

from .errors import DimensionMismatch


def format_rational(q) -> str:
    """Render a rational as a canonical "num/den" string (e.g. "1/2", "4/1")."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text) -> Fraction:
    """Parse "num/den" (or a bare integer string) into a Fraction."""
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/", 1)
        den_i = int(den)
        if den_i == 0:
            raise DimensionMismatch(f"zero denominator in rational {text!r}")
        return Fraction(int(num), den_i)
    return Fraction(int(s))
