"""Display formatting for byte counts, FLOP counts, and delta multipliers.

All internal arithmetic in this package is exact (int / Fraction); rounding
happens only here, at the presentation edge. Units are decimal (MB = 10^6 B,
GF = 10^9 FLOPs), matching how the reference tables print quantities.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

_BYTE_UNITS = ("B", "KB", "MB", "GB", "TB", "PB")
_FLOP_UNITS = ("F", "KF", "MF", "GF", "TF", "PF")


def round_sig(value: int | float | Fraction, digits: int) -> Decimal:
    """Round to `digits` significant figures, half away from zero."""
    if value == 0:
        return Decimal(0)
    if isinstance(value, Fraction):
        d = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        d = Decimal(str(value)) if isinstance(value, float) else Decimal(value)
    exponent = d.adjusted()  # position of the leading digit
    quantum = Decimal(1).scaleb(exponent - digits + 1)
    return d.quantize(quantum, rounding=ROUND_HALF_UP)


def _format_scaled(value: int, units: tuple[str, ...], sig: int = 3) -> str:
    unit_idx = 0
    scaled = Decimal(value)
    while abs(scaled) >= 1000 and unit_idx < len(units) - 1:
        scaled /= 1000
        unit_idx += 1
    rounded = round_sig(scaled, sig)
    if abs(rounded) >= 1000 and unit_idx < len(units) - 1:
        # 999.6 -> 1.00 of the next unit
        rounded = round_sig(rounded / 1000, sig)
        unit_idx += 1
    mantissa = abs(rounded)
    if mantissa >= 100 or mantissa == 0:
        text = f"{rounded:.0f}"
    elif mantissa >= 10:
        text = f"{rounded:.1f}"
    else:
        text = f"{rounded:.2f}"
    return f"{text} {units[unit_idx]}"


def format_bytes(n: int) -> str:
    """30380704 -> '30.4 MB' (decimal units, 3 significant figures)."""
    return _format_scaled(n, _BYTE_UNITS)


def format_flops(n: int) -> str:
    """2266325286912 -> '2.27 TF'."""
    return _format_scaled(n, _FLOP_UNITS)


def format_multiplier(ratio: Fraction | None, sig: int = 2) -> str:
    """Format a delta multiplier at 2 significant figures: 1.2858 -> '1.3x'.

    None (quantity absent on one side, e.g. 0/0) renders as '-'.
    """
    if ratio is None:
        return "-"
    rounded = round_sig(ratio, sig)
    mantissa = abs(rounded)
    if mantissa >= 10 or mantissa == mantissa.to_integral_value() and mantissa >= 10:
        text = f"{rounded:.0f}"
    elif mantissa >= 1:
        text = f"{rounded:.1f}"
    else:
        text = f"{rounded}"
    return f"{text}x"


def multiplier_decimal_string(ratio: Fraction | None, places: int = 6) -> str | None:
    """Exact-ish wire form: decimal string with fixed precision ('1.285800')."""
    if ratio is None:
        return None
    d = Decimal(ratio.numerator) / Decimal(ratio.denominator)
    return str(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))
