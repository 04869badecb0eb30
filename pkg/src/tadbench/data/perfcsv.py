"""CSV serialization of performance matrices.

Format: UTF-8, comma-separated, first row ``row_label,<col1>,...,<colN>``.
Empty cells encode missing (NaN) values.
"""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path

from ..errors import MatrixFormatError
from .types import PerformanceMatrix


def load_performance_matrix(
    path: str | os.PathLike, dataset: str | None = None
) -> PerformanceMatrix:
    """Parse a performance-matrix CSV.

    Args:
        path: CSV file to read.
        dataset: dataset name to record; defaults to the file stem.

    Raises:
        MatrixFormatError: on a bad header, ragged rows, or non-numeric
            cells; carries the 0-based data-row index where applicable.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MatrixFormatError("empty file") from None
        if len(header) < 2 or header[0] != "row_label":
            raise MatrixFormatError(
                f"header must start with 'row_label', got {header[:3]}"
            )
        col_labels = tuple(header[1:])

        row_labels: list[str] = []
        rows: list[list[float]] = []
        for i, record in enumerate(reader):
            if len(record) != len(header):
                raise MatrixFormatError(
                    f"expected {len(header)} fields, got {len(record)}", row=i
                )
            row_labels.append(record[0])
            values = []
            for label, cell in zip(col_labels, record[1:]):
                cell = cell.strip()
                if not cell:
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise MatrixFormatError(
                        f"non-numeric cell {cell!r} in column {label!r}", row=i
                    ) from None
            rows.append(values)

    if not rows:
        raise MatrixFormatError("no data rows")
    return PerformanceMatrix(
        dataset=dataset if dataset is not None else path.stem,
        row_labels=tuple(row_labels),
        col_labels=col_labels,
        values=rows,
    )


def _format_cell(value: float) -> str:
    if math.isnan(value):
        return ""
    return repr(float(value))


def save_performance_matrix(pm: PerformanceMatrix, path: str | os.PathLike) -> None:
    """Write ``pm`` as CSV; NaN cells become empty fields.

    Values use the shortest round-tripping decimal representation, so
    writing the same matrix twice produces byte-identical files.
    """
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row_label", *pm.col_labels])
        for label, row in zip(pm.row_labels, pm.values):
            writer.writerow([label, *[_format_cell(v) for v in row]])
