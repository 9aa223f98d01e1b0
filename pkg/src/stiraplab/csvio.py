"""Deterministic CSV output: UTF-8, comma separator, LF endings, 12
significant digits for floats."""

from __future__ import annotations

SIG_DIGITS = 12


def fmt(value, precision: int = SIG_DIGITS) -> str:
    if isinstance(value, float):
        return format(value, f".{precision}g")
    return str(value)


def format_row(row, precision: int = SIG_DIGITS) -> str:
    return ",".join(fmt(v, precision) for v in row) + "\n"


def write_csv(path, header, rows, precision: int = SIG_DIGITS):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(format_row(row, precision))


def append_rows(path, rows, precision: int = SIG_DIGITS):
    with open(path, "a", encoding="utf-8", newline="") as fh:
        for row in rows:
            fh.write(format_row(row, precision))


def count_data_rows(path) -> int:
    with open(path, encoding="utf-8") as fh:
        return max(0, sum(1 for _ in fh) - 1)
