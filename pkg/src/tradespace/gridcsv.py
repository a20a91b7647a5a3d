"""Grid CSV layout shared by all persisted matrices.

First row = column codes (with a corner label), first column = row codes.
Floats are written with shortest round-trip repr and read back with
pandas' round_trip parser, so write -> read is bit-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import MissingColumn


def write_grid(
    path: str | Path,
    row_codes: tuple[str, ...],
    col_codes: tuple[str, ...],
    values: np.ndarray,
    corner: str = "product",
) -> None:
    values = np.asarray(values)
    if values.shape != (len(row_codes), len(col_codes)):
        raise ValueError(f"grid shape {values.shape} does not match registries")
    integral = np.issubdtype(values.dtype, np.integer)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow([corner, *col_codes])
        for code, row in zip(row_codes, values):
            if integral:
                out.writerow([code, *(str(int(v)) for v in row)])
            else:
                out.writerow([code, *(repr(float(v)) for v in row)])


def read_grid(
    path: str | Path, dtype=np.float64
) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    """Returns (row_codes, col_codes, values). Codes are kept as strings."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    if not header.strip():
        raise MissingColumn(f"{path}: empty grid file")
    corner = next(csv.reader([header]))[0]
    frame = pd.read_csv(
        path,
        dtype={corner: str},
        index_col=corner,
        float_precision="round_trip",
    )
    row_codes = tuple(str(c) for c in frame.index)
    col_codes = tuple(str(c) for c in frame.columns)
    return row_codes, col_codes, np.ascontiguousarray(frame.to_numpy(dtype=dtype))
