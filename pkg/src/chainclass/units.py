"""Token denomination: 1 token = 10**18 subunits, the Ether/Wei split.

All on-chain balances, fees, and transfers are integer subunits; game rules
quote whole tokens. With the default gas price of 20000000000 subunits per
gas unit, a simple transaction costs well under a thousandth of a token,
invisible next to the 10,000-token weekly budget.
"""

from __future__ import annotations

TOKEN = 10**18
DECIMALS = 18


def tokens(n: int) -> int:
    """Whole tokens -> subunits."""
    return n * TOKEN


def parse_tokens(text: str) -> int:
    """Decimal token string -> subunits, exact; at most 12 fractional digits."""
    text = text.strip()
    if not text:
        raise ValueError("empty amount")
    sign = 1
    if text.startswith("-"):
        sign = -1
        text = text[1:]
    whole, _, frac = text.partition(".")
    if not whole and not frac:
        raise ValueError("empty amount")
    if len(frac) > DECIMALS:
        raise ValueError(f"more than {DECIMALS} decimal places")
    whole_i = int(whole) if whole else 0
    frac_i = int(frac.ljust(DECIMALS, "0")) if frac else 0
    return sign * (whole_i * TOKEN + frac_i)


def format_subunits(amount: int) -> str:
    """Subunits -> decimal token string, trailing zeros trimmed."""
    sign = "-" if amount < 0 else ""
    amount = abs(amount)
    whole, frac = divmod(amount, TOKEN)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{str(frac).zfill(DECIMALS).rstrip('0')}"
