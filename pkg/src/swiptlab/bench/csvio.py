"""Bit-exact CSV output.

The reproducibility contract is byte identity, so formatting is pinned
here instead of leaning on csv-module defaults: floats get exactly six
fractional digits ('.' separator, so -inf renders as "-inf"), bools are
"true"/"false", lines end with '\n', and the header is always written.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Sequence

__all__ = ["format_cell", "write_csv"]


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        if "," in value or "\n" in value or '"' in value:
            raise ValueError(f"cell text needs quoting, refusing: {value!r}")
        return value
    raise TypeError(f"unsupported cell type: {type(value).__name__}")


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        lines.append(",".join(format_cell(v) for v in row))
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
