"""Delimited-file ingestion, validation and CSV output conventions.

Design and response files are plain comma-separated numeric tables with
an optional single header row (auto-detected: any non-numeric field in
the first row).  Values are parsed as IEEE doubles with no locale
handling, so identical files always yield identical in-memory arrays.

Every CSV written by this package formats floats with 17 significant
digits, which round-trips doubles exactly and makes output files
byte-comparable across runs.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError
from .families import Dataset, GlmFamily, validate_family_response

__all__ = [
    "DatasetDiagnostics",
    "load_dataset",
    "diagnose",
    "read_numeric_csv",
    "format_value",
    "write_csv",
    "write_matrix",
]


@dataclass(frozen=True)
class DatasetDiagnostics:
    """Summary statistics surfaced before fitting.

    ``max_abs_covariate`` is the empirical sup-norm bound on the design
    entries, the quantity boundedness assumptions on the covariates are
    judged against in practice.
    """

    n: int
    p: int
    max_abs_covariate: float
    response_range: tuple[float, float]


def _is_numeric(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def read_numeric_csv(path) -> tuple[np.ndarray, list[str] | None]:
    """Read a CSV file into a float matrix.

    Returns (matrix, header) where header is None when the first row is
    fully numeric.  Raises DataError naming the offending row/column on
    any parse failure, ragged row, or non-finite value.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: file is empty")

    header = None
    if any(not _is_numeric(field) for field in rows[0]):
        header = [field.strip() for field in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: header but no data rows")

    width = len(rows[0])
    data = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + 1} has {len(row)} fields, expected {width}"
            )
        for j, field in enumerate(row):
            try:
                data[i, j] = float(field)
            except ValueError:
                raise DataError(
                    f"{path}: row {i + 1}, column {j + 1}: "
                    f"cannot parse {field!r} as a number"
                )
    if not np.all(np.isfinite(data)):
        i, j = np.argwhere(~np.isfinite(data))[0]
        raise DataError(f"{path}: non-finite value at row {i + 1}, column {j + 1}")
    return data, header


def load_dataset(
    design_path,
    response_path=None,
    *,
    response_col: str | None = None,
    family: GlmFamily,
) -> Dataset:
    """Load and validate a dataset from delimited files.

    The response comes either from its own single-column file
    (``response_path``) or from a named column of the design file
    (``response_col``); exactly one of the two must be given.  Family
    response constraints (e.g. {0, 1} for logistic) are enforced here.
    """
    if (response_path is None) == (response_col is None):
        raise DataError("give exactly one of response_path or response_col")

    design, header = read_numeric_csv(design_path)

    if response_col is not None:
        if header is None:
            raise DataError(
                f"{design_path}: --response-col needs a header row naming the columns"
            )
        try:
            j = header.index(response_col)
        except ValueError:
            raise DataError(
                f"{design_path}: no column named {response_col!r} in header {header}"
            )
        response = design[:, j]
        design = np.delete(design, j, axis=1)
    else:
        resp, _ = read_numeric_csv(response_path)
        if resp.ndim != 2 or resp.shape[1] != 1:
            raise DataError(
                f"{response_path}: response file must have exactly one column, "
                f"got {resp.shape[1]}"
            )
        if resp.shape[0] != design.shape[0]:
            raise DataError(
                f"row-count mismatch: design has {design.shape[0]} rows, "
                f"response has {resp.shape[0]}"
            )
        response = resp[:, 0]

    data = Dataset(design, response)
    validate_family_response(data, family)
    return data


def diagnose(data: Dataset) -> DatasetDiagnostics:
    """Dimension and range summary of a validated dataset."""
    return DatasetDiagnostics(
        n=data.n,
        p=data.p,
        max_abs_covariate=float(np.max(np.abs(data.design))) if data.design.size else 0.0,
        response_range=(float(np.min(data.response)), float(np.max(data.response))),
    )


# -- output conventions -------------------------------------------------------

def format_value(v) -> str:
    """Render one CSV field: floats at 17 significant digits, ints plain."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _atomic_write(path, text: str) -> None:
    """Write via a temp file and rename so failures leave no partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: list[str] | None, rows) -> None:
    """Write rows of mixed numeric values using the 17-digit convention."""
    lines = []
    if header is not None:
        lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_matrix(path, matrix: np.ndarray) -> None:
    """Write a bare numeric matrix (no header) using the 17-digit convention."""
    matrix = np.asarray(matrix)
    write_csv(path, None, matrix)
