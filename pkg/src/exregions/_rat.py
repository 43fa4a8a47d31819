"""Exact rational/integer scalars shared by the exact-arithmetic modules.

gmpy2 is used when present (big speedup for the degree-24 field and the
Groebner runs); the stdlib types are a drop-in fallback.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as QQ, mpz as ZZ

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    from fractions import Fraction as QQ

    ZZ = int
    HAVE_GMPY2 = False

QQ_ZERO = QQ(0)
QQ_ONE = QQ(1)


def qq(num, den=1):
    """Exact rational from ints (or anything QQ accepts)."""
    return QQ(num, den)


def is_rational(x) -> bool:
    return isinstance(x, (int,)) or type(x) is type(QQ_ZERO) or type(x) is type(ZZ(0))


def parse_decimal(text: str):
    """Parse a decimal string (optional sign, optional fractional part,
    optional exponent) into an exact rational.  No binary-float round trip.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty decimal string")
    sign = 1
    if s[0] in "+-":
        if s[0] == "-":
            sign = -1
        s = s[1:]
    mant, _, exp = s.partition("e") if "e" in s else s.partition("E")
    exponent = int(exp) if exp else 0
    intpart, _, fracpart = mant.partition(".")
    digits = (intpart + fracpart) or "0"
    if not digits.isdigit():
        raise ValueError(f"malformed decimal string: {text!r}")
    exponent -= len(fracpart)
    value = QQ(int(digits))
    if exponent >= 0:
        value *= ZZ(10) ** exponent
    else:
        value /= ZZ(10) ** (-exponent)
    return sign * value


def decimal_str(value, places: int = 30) -> str:
    """Render an exact rational as a decimal string, truncated to `places`."""
    num, den = value.numerator, value.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    whole, rem = divmod(num, den)
    if rem == 0:
        return f"{sign}{whole}"
    frac = rem * ZZ(10) ** places // den
    return f"{sign}{whole}." + str(frac).rjust(places, "0").rstrip("0")
