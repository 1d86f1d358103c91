from decimal import Decimal
from decimal import ROUND_HALF_UP


def half_up_percent(part: int, total: int) -> int:
    """Whole percent of part/total, halves rounded up (61.875 -> 62, 8.125 -> 8)."""
    if total <= 0:
        raise ValueError(f"total must be positive, got {total}")

    exact = Decimal(100 * part) / Decimal(total)
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))
