"""Small shared helpers: reporting-style rounding and RFC-3339 timestamps."""

from __future__ import annotations

from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal


def round_half_up(value: float, digits: int = 1) -> float:
    """Round to ``digits`` decimals, half away from zero.

    Goes through the shortest decimal repr so the result matches what the
    printed number rounds to (reporting convention used by every table).
    """
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def percentage(part: float, whole: float, digits: int = 1) -> float:
    """``part / whole`` as a percentage, 0.0 when the denominator is zero."""
    if whole == 0:
        return 0.0
    return round_half_up(part / whole * 100.0, digits)


def parse_timestamp(raw: str) -> datetime:
    """Parse an RFC-3339 timestamp; naive inputs are taken as UTC."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def format_timestamp(moment: datetime) -> str:
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.isoformat()
