"""Export-panel ingestion and persistence.

A panel holds one m x n matrix of export values per year over shared
registries (rows = products, columns = countries, both sorted
lexicographically so registry order never depends on input row order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .errors import (
    BadGroupId,
    BadValue,
    DuplicateKey,
    EmptyPanel,
    EmptyRowOrColumn,
    MissingColumn,
    NegativeValue,
    RegistryMismatch,
)
from .gridcsv import read_grid, write_grid

EXPORT_COLUMNS = ("year", "country", "product", "value")
LALL_GROUP_IDS = tuple(range(1, 12))


@dataclass(frozen=True)
class Registry:
    """Ordered, unique code list with a code -> position map."""

    codes: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.codes)) != len(self.codes):
            raise DuplicateKey("registry codes must be unique")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.codes)})

    @classmethod
    def from_codes(cls, codes: Iterable[str]) -> "Registry":
        return cls(tuple(sorted(set(str(c) for c in codes))))

    def index(self, code: str) -> int:
        return self._index[code]

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, code: str) -> bool:
        return code in self._index


@dataclass(frozen=True)
class ExportPanel:
    """Immutable per-year export matrices on shared registries.

    ``inactive_products[year]`` / ``inactive_countries[year]`` list codes
    with no positive value in that year (panel churn); they are excluded
    from that year's RCA computation downstream.
    """

    products: Registry
    countries: Registry
    years: tuple[int, ...]
    values: Mapping[int, np.ndarray]
    inactive_products: Mapping[int, tuple[str, ...]]
    inactive_countries: Mapping[int, tuple[str, ...]]

    def matrix(self, year: int) -> np.ndarray:
        return self.values[year]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.products), len(self.countries)


@dataclass(frozen=True)
class LallConcordance:
    """Product code -> technology-group id (1..11) with group names."""

    groups: Mapping[str, int]
    names: Mapping[int, str]

    def group_of(self, code: str) -> int | None:
        return self.groups.get(code)

    def unmapped(self, codes: Iterable[str]) -> tuple[str, ...]:
        """Panel products absent from the concordance (flagged, never dropped)."""
        return tuple(c for c in codes if c not in self.groups)

    def __len__(self) -> int:
        return len(self.groups)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _read_table(source, columns: tuple[str, ...], dtype: dict) -> pd.DataFrame:
    if isinstance(source, pd.DataFrame):
        frame = source.copy()
        for col, dt in dtype.items():
            if col in frame.columns and dt is str:
                frame[col] = frame[col].astype(str)
    else:
        frame = pd.read_csv(source, dtype=dtype, float_precision="round_trip")
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise MissingColumn(f"missing column(s): {', '.join(missing)}")
    return frame


def ingest_exports(
    source,
    *,
    sum_duplicates: bool = False,
    strict: bool = True,
) -> ExportPanel:
    """Build an ExportPanel from long-format rows (year, country, product, value).

    Registries are the union of codes over all years; absent combinations are
    filled with zero.  A code with no positive value in some year violates the
    per-year well-definedness assumption: with ``strict`` this is an
    EmptyRowOrColumn error, otherwise the code is recorded as inactive for
    that year and excluded from that year's RCA computation downstream.
    """
    frame = _read_table(source, EXPORT_COLUMNS, {"country": str, "product": str})
    if frame.empty:
        raise EmptyPanel("no data rows")

    try:
        years_col = frame["year"].astype(np.int64)
    except (ValueError, TypeError) as exc:
        raise BadValue(f"year does not parse as an integer: {exc}") from None
    values_col = pd.to_numeric(frame["value"], errors="coerce").astype(np.float64)
    if values_col.isna().any():
        bad = frame["value"][values_col.isna()].iloc[0]
        raise BadValue(f"value does not parse as a real number: {bad!r}")
    if not np.isfinite(values_col).all():
        raise BadValue("non-finite export value")
    if (values_col < 0).any():
        bad = values_col[values_col < 0].iloc[0]
        raise NegativeValue(f"negative export value: {bad}")

    frame = pd.DataFrame(
        {
            "year": years_col,
            "country": frame["country"],
            "product": frame["product"],
            "value": values_col,
        }
    )
    dups = frame.duplicated(subset=["year", "country", "product"])
    if dups.any():
        if not sum_duplicates:
            row = frame[dups].iloc[0]
            raise DuplicateKey(
                f"duplicate (year,country,product) = "
                f"({row['year']},{row['country']},{row['product']})"
            )
        frame = (
            frame.groupby(["year", "country", "product"], as_index=False)["value"].sum()
        )

    products = Registry.from_codes(frame["product"])
    countries = Registry.from_codes(frame["country"])
    years = tuple(sorted(frame["year"].unique().tolist()))

    m, n = len(products), len(countries)
    prod_idx = frame["product"].map(products.index).to_numpy()
    ctry_idx = frame["country"].map(countries.index).to_numpy()

    values: dict[int, np.ndarray] = {}
    inactive_p: dict[int, tuple[str, ...]] = {}
    inactive_c: dict[int, tuple[str, ...]] = {}
    year_arr = frame["year"].to_numpy()
    val_arr = frame["value"].to_numpy()
    for year in years:
        sel = year_arr == year
        grid = np.zeros((m, n), dtype=np.float64)
        grid[prod_idx[sel], ctry_idx[sel]] = val_arr[sel]
        dead_p = [products.codes[i] for i in np.flatnonzero(~(grid > 0).any(axis=1))]
        dead_c = [countries.codes[j] for j in np.flatnonzero(~(grid > 0).any(axis=0))]
        if strict and dead_p:
            raise EmptyRowOrColumn(int(year), "product", dead_p[0])
        if strict and dead_c:
            raise EmptyRowOrColumn(int(year), "country", dead_c[0])
        values[int(year)] = _freeze(grid)
        inactive_p[int(year)] = tuple(dead_p)
        inactive_c[int(year)] = tuple(dead_c)

    return ExportPanel(
        products=products,
        countries=countries,
        years=years,
        values=values,
        inactive_products=inactive_p,
        inactive_countries=inactive_c,
    )


def ingest_lall(source) -> LallConcordance:
    """Read a product -> Lall-group concordance (columns product, group_id)."""
    frame = _read_table(source, ("product", "group_id"), {"product": str})
    groups: dict[str, int] = {}
    for code, gid in zip(frame["product"], frame["group_id"]):
        try:
            gid = int(gid)
        except (TypeError, ValueError):
            raise BadGroupId(f"group_id {gid!r} is not an integer") from None
        if gid not in LALL_GROUP_IDS:
            raise BadGroupId(f"group_id {gid} outside 1..11 for product {code!r}")
        if code in groups and groups[code] != gid:
            raise DuplicateKey(f"product {code!r} mapped to groups {groups[code]} and {gid}")
        groups[code] = gid
    if "group_name" in frame.columns:
        names = {
            int(g): str(n)
            for g, n in zip(frame["group_id"], frame["group_name"])
            if not (isinstance(n, float) and math.isnan(n))
        }
    else:
        names = {}
    for gid in sorted(set(groups.values())):
        names.setdefault(gid, f"group {gid}")
    return LallConcordance(groups=groups, names=names)


def export_filename(year: int) -> str:
    return f"exports_{year}.csv"


def save_panel(panel: ExportPanel, outdir: str | Path) -> list[Path]:
    """Persist one exports_<year>.csv grid per year."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for year in panel.years:
        path = outdir / export_filename(year)
        write_grid(path, panel.products.codes, panel.countries.codes, panel.values[year])
        paths.append(path)
    return paths


def load_panel(directory: str | Path, *, strict: bool = True) -> ExportPanel:
    """Rebuild a panel from exports_<year>.csv grids (bit-identical round trip)."""
    directory = Path(directory)
    files = sorted(directory.glob("exports_*.csv"))
    if not files:
        raise EmptyPanel(f"no exports_<year>.csv files in {directory}")
    years, grids = [], {}
    products = countries = None
    for path in files:
        year = int(path.stem.split("_")[1])
        row_codes, col_codes, grid = read_grid(path)
        if products is None:
            products, countries = Registry(row_codes), Registry(col_codes)
        elif row_codes != products.codes or col_codes != countries.codes:
            raise RegistryMismatch(f"{path}: registries differ across year files")
        if not np.isfinite(grid).all():
            raise BadValue(f"{path}: non-finite value")
        if (grid < 0).any():
            raise NegativeValue(f"{path}: negative value")
        years.append(year)
        grids[year] = grid

    values: dict[int, np.ndarray] = {}
    inactive_p: dict[int, tuple[str, ...]] = {}
    inactive_c: dict[int, tuple[str, ...]] = {}
    for year in sorted(years):
        grid = grids[year]
        dead_p = [products.codes[i] for i in np.flatnonzero(~(grid > 0).any(axis=1))]
        dead_c = [countries.codes[j] for j in np.flatnonzero(~(grid > 0).any(axis=0))]
        if strict and dead_p:
            raise EmptyRowOrColumn(year, "product", dead_p[0])
        if strict and dead_c:
            raise EmptyRowOrColumn(year, "country", dead_c[0])
        values[year] = _freeze(grid)
        inactive_p[year] = tuple(dead_p)
        inactive_c[year] = tuple(dead_c)

    return ExportPanel(
        products=products,
        countries=countries,
        years=tuple(sorted(years)),
        values=values,
        inactive_products=inactive_p,
        inactive_countries=inactive_c,
    )


def panel_to_frame(panel: ExportPanel) -> pd.DataFrame:
    """Long-format view (year, country, product, value) of all non-zero cells."""
    rows = []
    for year in panel.years:
        grid = panel.values[year]
        pi, ci = np.nonzero(grid)
        rows.append(
            pd.DataFrame(
                {
                    "year": year,
                    "country": [panel.countries.codes[j] for j in ci],
                    "product": [panel.products.codes[i] for i in pi],
                    "value": grid[pi, ci],
                }
            )
        )
    return pd.concat(rows, ignore_index=True)
