"""Percent rounding and plain-text table rendering shared by reports."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence


def round_half_up(value: float, places: int = 2) -> float:
    """Round the shortest decimal repr of ``value`` half away from zero."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP))


def format_table(header: Sequence[str], rows: Sequence[Sequence], align: str | None = None) -> str:
    """Aligned plain-text table; ``align`` holds one of ``l``/``r`` per column."""
    cells = [[str(h) for h in header]] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    align = align or "l" + "r" * (len(header) - 1)

    def line(row):
        return "  ".join(c.ljust(w) if a == "l" else c.rjust(w) for c, w, a in zip(row, widths, align))

    rule = "-" * len(line(cells[0]))
    return "\n".join([rule, line(cells[0]), rule] + [line(r) for r in cells[1:]] + [rule])


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)
