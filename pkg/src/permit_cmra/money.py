"""Money helpers. All amounts are integers in minor units (cents)."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal

MINOR_PER_UNIT = 100
CURRENCY_SCALE = 2  # decimal places represented by one minor unit


def to_decimal(value: float | int | str | Decimal) -> Decimal:
    """Exact decimal for a config number, using the shortest float repr."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)


def to_minor(amount: float | int | str | Decimal) -> int:
    """Convert a money amount to minor units, rounding half up."""
    dec = to_decimal(amount) * MINOR_PER_UNIT
    return int(dec.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def from_minor(minor: int) -> float:
    """Minor units back to a float money amount (display only)."""
    return minor / MINOR_PER_UNIT
