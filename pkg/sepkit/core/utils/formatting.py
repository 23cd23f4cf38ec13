from __future__ import annotations

import math
from typing import Any, Iterable

from rich import box
from rich.table import Table

from sepkit.core.models import SeparabilityReport


def format_number(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return str(value)
        if value != 0 and (abs(value) < 1e-3 or abs(value) >= 1e6):
            return f"{value:.4E}"
        return f"{value:.4f}"
    return str(value)


def mapping_table(title: str, content: dict[str, Any]) -> Table:
    table = Table(title=title, box=box.SIMPLE)
    table.add_column("Name", style="cyan")
    table.add_column("Value", justify="right", style="green")
    for key, value in content.items():
        if isinstance(value, dict):
            for subkey, subvalue in value.items():
                table.add_row(f"{key}.{subkey}", format_number(subvalue))
        else:
            table.add_row(key, format_number(value))
    return table


def rows_table(title: str, header: list[str], rows: Iterable[list[Any]]) -> Table:
    table = Table(title=title, box=box.SIMPLE)
    for index, name in enumerate(header):
        table.add_column(name, style="cyan" if index == 0 else None, justify="right")
    for row in rows:
        table.add_row(*(format_number(x) for x in row))
    return table


def report_table(report: SeparabilityReport) -> Table:
    """
    The report with one column per alpha, as separability tables are usually printed.
    """
    title = f"Separability of {report.n_points} points in dimension {report.dim}"
    if report.sphere:
        title += " (unit sphere)"
    table = Table(title=title, box=box.SIMPLE)
    table.add_column("α", style="cyan")
    for row in report.rows:
        table.add_column(format_number(row.alpha), justify="right")
    for name, *_ in report.table()[1:]:
        table.add_row(name, *(format_number(getattr(row, name)) for row in report.rows))
    return table
