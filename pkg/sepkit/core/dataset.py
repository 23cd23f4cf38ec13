"""
Reading and writing point clouds as delimited text.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from pathlib import Path

import numpy as np

from sepkit.core.errors import (
    MissingFile,
    NoLabels,
    NonNumericCell,
    RaggedRows,
    UnknownLabelColumn,
    ValidationError,
)
from sepkit.core.models import DataMatrix, LabeledDataset
from sepkit.core.utils.io import atomic_write, provenance_lines

log = logging.getLogger("sepkit.core.dataset")

COMMENT_PREFIX = "#"


def _parse_cell(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NonNumericCell(row, column, cell) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, column, cell)
    return value


def parse_csv(
    text: str, label_column: str | None = None, delimiter: str = ","
) -> LabeledDataset:
    """
    Parse CSV text into a dataset.

    Leading lines starting with ``#`` are skipped, the first remaining line is the header.
    Data rows are numbered from 1 in error messages, the header excluded.
    """
    lines = text.splitlines()
    start = 0
    while start < len(lines) and lines[start].startswith(COMMENT_PREFIX):
        start += 1
    reader = csv.reader(io.StringIO("\n".join(lines[start:])), delimiter=delimiter, strict=True)
    try:
        header = [x.strip() for x in next(reader)]
    except StopIteration:
        raise ValidationError("The file has no header row.") from None

    label_index: int | None = None
    if label_column is not None:
        if label_column not in header:
            raise UnknownLabelColumn(label_column)
        label_index = header.index(label_column)
    feature_index = [i for i in range(len(header)) if i != label_index]
    if not feature_index:
        raise ValidationError("The file has no numeric column.")

    rows: list[list[float]] = []
    labels: list[str] = []
    for number, record in enumerate(reader, start=1):
        if not record:
            continue
        if len(record) != len(header):
            raise RaggedRows(number, len(header), len(record))
        rows.append([_parse_cell(record[i], number, header[i]) for i in feature_index])
        if label_index is not None:
            labels.append(record[label_index])
    if not rows:
        raise ValidationError("The file has no data row.")

    data = DataMatrix(np.array(rows, dtype=np.float64), tuple(header[i] for i in feature_index))
    return LabeledDataset(
        data, tuple(labels) if label_index is not None else None, label_column=label_column
    )


def ingest_csv(
    path: Path | str, label_column: str | None = None, delimiter: str = ","
) -> LabeledDataset:
    """
    Load a labeled point cloud from a CSV file.

    Parameters
    ----------
    path: Path | str
        UTF-8 file with a header row.
    label_column: str | None
        Name of the column holding class identifiers. It is removed from the features.
    delimiter: str
        Field separator, comma by default.

    Returns
    -------
    LabeledDataset
        The points in file order, with labels if a label column was given.

    Raises
    ------
    MissingFile
        The file does not exist.
    RaggedRows
        A row does not have as many fields as the header.
    NonNumericCell
        A feature cell is not a finite decimal number.
    UnknownLabelColumn
        ``label_column`` is not in the header.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)
    dataset = parse_csv(path.read_text(encoding="utf-8"), label_column, delimiter)
    log.debug(
        f"Loaded {dataset.data.n_points}x{dataset.data.dim} points from {path}"
        + (f" with labels from {label_column!r}" if label_column else "")
    )
    return dataset


def class_partition(ds: LabeledDataset) -> dict[str, list[int]]:
    """
    Group point indices by class, keeping both the first-seen class order and the point order.
    """
    if ds.labels is None:
        raise NoLabels()
    partition: dict[str, list[int]] = {}
    for index, label in enumerate(ds.labels):
        partition.setdefault(label, []).append(index)
    return partition


def format_value(value: float) -> str:
    # 17 significant digits always round-trip a float64
    return format(float(value), ".17g")


def dataset_to_csv(
    ds: LabeledDataset, delimiter: str = ",", header_lines: list[str] | None = None
) -> str:
    columns = list(ds.data.columns or (f"x{i + 1}" for i in range(ds.data.dim)))
    label_column = ds.label_column or "label"
    buffer = io.StringIO()
    for line in header_lines or ():
        buffer.write(line + "\n")
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow(columns + ([label_column] if ds.labels is not None else []))
    for index, point in enumerate(ds.data.points):
        row = [format_value(x) for x in point]
        if ds.labels is not None:
            row.append(ds.labels[index])
        writer.writerow(row)
    return buffer.getvalue()


def export_csv(
    ds: LabeledDataset,
    path: Path | str,
    delimiter: str = ",",
    provenance: dict | None = None,
):
    """
    Write a dataset so that `ingest_csv` reads back the exact same values.
    """
    header = provenance_lines(provenance) if provenance else None
    atomic_write(Path(path), dataset_to_csv(ds, delimiter, header))
    log.debug(f"Wrote {ds.data.n_points} points to {path}")
