"""Deterministic fixed-point arithmetic: 64-bit values with 6 decimal places.

All market-model quantities that are not whole tokens (multipliers, scores,
shares) are integers scaled by ``SCALE`` = 10**6 and rounded half-even. No
floats touch consensus-relevant state: identical inputs give identical bytes
on every platform.

Where an operation is defined as a ratio of integers, callers should prefer
:func:`div_half_even` on the exact numerator and denominator over chaining
``mul``/``div``, so that algebraic identities (for example symmetry cases
that are exactly 1) survive rounding.
"""

from __future__ import annotations

SCALE = 10**6
ONE = SCALE
HALF = SCALE // 2


def div_half_even(num: int, den: int) -> int:
    """Round num/den to the nearest integer, ties to even. den must be > 0."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    q, r = divmod(num, den)  # floor division, 0 <= r < den
    twice = 2 * r
    if twice > den or (twice == den and q % 2 != 0):
        q += 1
    return q


def mul(a: int, b: int) -> int:
    """Product of two fixed-point values."""
    return div_half_even(a * b, SCALE)


def div(a: int, b: int) -> int:
    """Quotient of two fixed-point values. b must be positive."""
    return div_half_even(a * SCALE, b)


def ratio(num: int, den: int) -> int:
    """num/den as a fixed-point value, rounded half-even."""
    return div_half_even(num * SCALE, den)


def sqrt_tokens(tokens: int) -> int:
    """Square root of a whole-token amount as a fixed-point value.

    Computes the integer nearest to sqrt(tokens) * SCALE. Ties cannot occur:
    tokens * SCALE**2 is never exactly (k + 1/2)**2 for integer k.
    """
    if tokens < 0:
        raise ValueError("negative spend")
    import math

    x = tokens * SCALE * SCALE
    r = math.isqrt(x)
    if x - r * r > r:
        r += 1
    return r


def parse(text: str) -> int:
    """Parse a decimal string ("0.25", "1", "0.123456") to fixed point.

    At most 6 fractional digits are allowed; this is a config-file format,
    not a general decimal parser.
    """
    s = text.strip()
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    if not s or s.count(".") > 1:
        raise ValueError(f"bad decimal: {text!r}")
    whole, _, frac = s.partition(".")
    whole = whole or "0"
    if len(frac) > 6:
        raise ValueError(f"more than 6 decimal places: {text!r}")
    if not whole.isdigit() or (frac and not frac.isdigit()):
        raise ValueError(f"bad decimal: {text!r}")
    v = int(whole) * SCALE + int(frac.ljust(6, "0") or 0)
    return -v if neg else v


def format_fp(v: int) -> str:
    """Render a fixed-point value as a decimal string with 6 places."""
    sign = "-" if v < 0 else ""
    v = abs(v)
    return f"{sign}{v // SCALE}.{v % SCALE:06d}"
