"""Exact rational arithmetic used throughout the package.

All model data (exchange rates, payoffs, probabilities) is converted to
arbitrary-precision rationals on ingestion and every downstream computation
is exact; no floating point enters the polyhedral algebra.  Backed by
``gmpy2.mpq`` when available (about an order of magnitude faster), with a
``fractions.Fraction`` fallback so the package works on a bare interpreter.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Iterable

try:
    from gmpy2 import mpq as _mpq

    Rational = type(_mpq(0))

    def _raw(n: int, d: int):
        return _mpq(n, d)

except ImportError:  # pragma: no cover - exercised only without gmpy2
    Rational = Fraction

    def _raw(n: int, d: int):
        return Fraction(n, d)


ZERO = _raw(0, 1)
ONE = _raw(1, 1)


def rational(value: Any, den: Any = None) -> Rational:
    """Convert ``value`` to an exact rational.

    Accepts ints, rationals, ``Fraction``, strings (``"3"``, ``"-5/7"``,
    decimal forms like ``"1.25625"`` or ``"2.5e-3"``) and floats.  Floats are
    converted binary-exactly, so a value that was written as a decimal string
    should be parsed as a string to get the decimal-exact rational.
    """
    if den is not None:
        return rational(value) / rational(den)
    if isinstance(value, Rational):
        return value
    if isinstance(value, int):
        return _raw(value, 1)
    if isinstance(value, Fraction):
        return _raw(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, d = text.partition("/")
            f = Fraction(num.strip()) / Fraction(d.strip())
        else:
            f = Fraction(text)  # handles "3", "1.25", "2e-3" exactly
        return _raw(f.numerator, f.denominator)
    if isinstance(value, float):
        f = Fraction(value)  # binary-exact
        return _raw(f.numerator, f.denominator)
    if hasattr(value, "__index__"):  # integer-likes such as gmpy2.mpz
        return _raw(value.__index__(), 1)
    raise TypeError(f"cannot convert {value!r} to a rational")


def rational_from_significand(x: float, digits: int = 15) -> Rational:
    """Round ``x`` to ``digits`` significant decimal digits, then convert exactly.

    Used when ingesting irrational model inputs (e.g. exponential lattice
    factors): the decimal rounding fixes a reproducible rational value whose
    error is far below table tolerances.
    """
    if digits < 1:
        raise ValueError("digits must be positive")
    return rational(f"{x:.{digits}g}")


def qvec(values: Iterable[Any]) -> tuple:
    """Tuple of rationals."""
    return tuple(rational(v) for v in values)


def qdot(a, b) -> Rational:
    s = ZERO
    for x, y in zip(a, b):
        s += x * y
    return s


def format_decimal(q, places: int = 6) -> str:
    """Fixed-point decimal string, round half to even (banker's rounding)."""
    negative = q < 0
    if negative:
        q = -q
    scale = 10**places
    num = int(q.numerator) * scale
    den = int(q.denominator)
    whole, rem = divmod(num, den)
    if 2 * rem > den or (2 * rem == den and whole % 2 == 1):
        whole += 1
    text = str(whole).rjust(places + 1, "0")
    out = f"{text[:-places]}.{text[-places:]}" if places else text
    if negative and whole != 0:
        out = "-" + out
    return out


def format_exact(q) -> str:
    """Canonical ``p`` or ``p/q`` string."""
    n, d = q.numerator, q.denominator
    return str(n) if d == 1 else f"{n}/{d}"
