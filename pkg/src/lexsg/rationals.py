"""Exact rational helpers shared by the model and the solvers.

All probabilities and exact-mode values are gmpy2.mpq rationals; floats only
appear inside the value-iteration path.
"""

from fractions import Fraction

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)


def parse_rational(text):
    """Parse 'a/b', an integer, or a decimal literal into an exact rational.

    Decimals are read as exact decimal fractions, e.g. '0.1' -> 1/10.
    """
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return mpq(int(num), int(den))
        return mpq(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(value):
    return str(mpq(value))


def format_value(value):
    """Render a solver value: exact rationals verbatim, floats to 9 sig digits."""
    if isinstance(value, float):
        return f"{value:.9g}"
    return format_rational(value)
