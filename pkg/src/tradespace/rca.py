"""Comparative-advantage matrices: continuous and binary RCA, complements,
and change matrices over year pairs.

The continuous value is the Balassa index (a country's export share in a
product over the world share); the symmetric transform maps it to [-1, 1].
Binary RCA applies an inclusive threshold (default 1.0).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateTotals,
    NonIncreasingYears,
    RegistryMismatch,
    TooFewYears,
    YearNotFound,
)
from .panel import ExportPanel, Registry


@dataclass(frozen=True)
class BinaryRca:
    """0/1 specialization matrix for one year, with cached marginals."""

    x: np.ndarray            # m x n over {0,1}, uint8
    year: int
    products: Registry
    countries: Registry
    total_rca: int           # number of ones
    ubiquity: np.ndarray     # row sums: countries holding RCA per product
    diversification: np.ndarray  # column sums: products held per country

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.shape

    def transposed(self) -> "BinaryRca":
        """Swap roles of products and countries (ubiquity <-> diversification)."""
        return BinaryRca(
            x=np.ascontiguousarray(self.x.T),
            year=self.year,
            products=self.countries,
            countries=self.products,
            total_rca=self.total_rca,
            ubiquity=self.diversification,
            diversification=self.ubiquity,
        )


@dataclass(frozen=True)
class AntiRca:
    """Complement of a BinaryRca: marks absent specializations."""

    z: np.ndarray
    year: int
    products: Registry
    countries: Registry
    anti_ubiquity: np.ndarray        # countries lacking RCA per product
    anti_diversification: np.ndarray  # products lacking per country

    def transposed(self) -> "AntiRca":
        return AntiRca(
            z=np.ascontiguousarray(self.z.T),
            year=self.year,
            products=self.countries,
            countries=self.products,
            anti_ubiquity=self.anti_diversification,
            anti_diversification=self.anti_ubiquity,
        )


@dataclass(frozen=True)
class ContinuousRca:
    """Balassa index and its symmetric transform for one year."""

    balassa: np.ndarray   # in [0, inf)
    symmetric: np.ndarray  # (balassa-1)/(balassa+1), in [-1, 1]
    year: int
    products: Registry
    countries: Registry


@dataclass(frozen=True)
class ChangeMatrix:
    """X(to) - X(from): +1 marks an RCA gained, -1 an RCA lost."""

    delta: np.ndarray  # int8 over {-1, 0, +1}
    from_year: int
    to_year: int
    products: Registry
    countries: Registry
    gains: int
    losses: int
    # codes dropped because they were only present in one side's registries
    excluded_products: tuple[str, ...] = ()
    excluded_countries: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return self.to_year - self.from_year


def binary_from_values(x: np.ndarray, year: int, products: Registry,
                       countries: Registry) -> BinaryRca:
    """Wrap a 0/1 array as a BinaryRca with cached marginals."""
    x = np.ascontiguousarray(x, dtype=np.uint8)
    x.setflags(write=False)
    s = x.sum(axis=1, dtype=np.int64)
    s_star = x.sum(axis=0, dtype=np.int64)
    return BinaryRca(
        x=x,
        year=year,
        products=products,
        countries=countries,
        total_rca=int(s.sum()),
        ubiquity=s,
        diversification=s_star,
    )


def compute_rca(
    panel: ExportPanel, year: int, threshold: float = 1.0
) -> tuple[BinaryRca, ContinuousRca]:
    """Per-year RCA on the year's active codes.

    Codes with no positive export value in the year (panel churn, recorded at
    ingestion) are excluded, so row and column totals are strictly positive.
    """
    if year not in panel.values:
        raise YearNotFound(f"year {year} not in panel ({panel.years})")
    if not threshold > 0:
        raise ValueError("threshold must be positive")

    grid = panel.values[year]
    products, countries = panel.products, panel.countries
    dead_p = set(panel.inactive_products[year])
    dead_c = set(panel.inactive_countries[year])
    if dead_p or dead_c:
        keep_p = [i for i, c in enumerate(products.codes) if c not in dead_p]
        keep_c = [j for j, c in enumerate(countries.codes) if c not in dead_c]
        grid = grid[np.ix_(keep_p, keep_c)]
        products = Registry(tuple(products.codes[i] for i in keep_p))
        countries = Registry(tuple(countries.codes[j] for j in keep_c))

    col_tot = grid.sum(axis=0)
    row_tot = grid.sum(axis=1)
    total = grid.sum()
    if not (np.all(col_tot > 0) and np.all(row_tot > 0) and total > 0):
        raise DegenerateTotals(f"zero export total survived validation in {year}")

    balassa = (grid / col_tot[None, :]) / (row_tot[:, None] / total)
    symmetric = (balassa - 1.0) / (balassa + 1.0)
    cont = ContinuousRca(
        balassa=balassa, symmetric=symmetric, year=year,
        products=products, countries=countries,
    )
    binary = binary_from_values(balassa >= threshold, year, products, countries)
    return binary, cont


def compute_anti_rca(x: BinaryRca) -> AntiRca:
    """Complement matrix (ones minus the RCA matrix)."""
    z = np.ascontiguousarray(1 - x.x, dtype=np.uint8)
    z.setflags(write=False)
    n = len(x.countries)
    m = len(x.products)
    return AntiRca(
        z=z,
        year=x.year,
        products=x.products,
        countries=x.countries,
        anti_ubiquity=n - x.ubiquity,
        anti_diversification=m - x.diversification,
    )


def compute_changes(x0: BinaryRca, x1: BinaryRca) -> ChangeMatrix:
    """Change matrix between two years' binary RCA.

    If the two matrices sit on different (reduced) registries, the change is
    computed on the registry intersection and the dropped codes are reported;
    an empty intersection is a RegistryMismatch.
    """
    if x0.year >= x1.year:
        raise NonIncreasingYears(f"{x0.year} !< {x1.year}")

    a0, a1 = x0.x, x1.x
    excluded_p: tuple[str, ...] = ()
    excluded_c: tuple[str, ...] = ()
    if x0.products.codes != x1.products.codes or x0.countries.codes != x1.countries.codes:
        common_p = sorted(set(x0.products.codes) & set(x1.products.codes))
        common_c = sorted(set(x0.countries.codes) & set(x1.countries.codes))
        if not common_p or not common_c:
            raise RegistryMismatch("no common codes between the two years")
        excluded_p = tuple(
            sorted((set(x0.products.codes) | set(x1.products.codes)) - set(common_p))
        )
        excluded_c = tuple(
            sorted((set(x0.countries.codes) | set(x1.countries.codes)) - set(common_c))
        )
        i0 = [x0.products.index(c) for c in common_p]
        j0 = [x0.countries.index(c) for c in common_c]
        i1 = [x1.products.index(c) for c in common_p]
        j1 = [x1.countries.index(c) for c in common_c]
        a0 = a0[np.ix_(i0, j0)]
        a1 = a1[np.ix_(i1, j1)]
        products, countries = Registry(tuple(common_p)), Registry(tuple(common_c))
    else:
        products, countries = x0.products, x0.countries

    delta = a1.astype(np.int8) - a0.astype(np.int8)
    delta.setflags(write=False)
    return ChangeMatrix(
        delta=delta,
        from_year=x0.year,
        to_year=x1.year,
        products=products,
        countries=countries,
        gains=int((delta == 1).sum()),
        losses=int((delta == -1).sum()),
        excluded_products=excluded_p,
        excluded_countries=excluded_c,
    )


def year_pairs(years: Sequence[int] | Iterable[int]) -> dict[int, list[tuple[int, int]]]:
    """All (from, to) pairs with from < to, grouped by period length."""
    ys = sorted(set(int(y) for y in years))
    if len(ys) < 2:
        raise TooFewYears(f"need at least two years, got {ys}")
    grouped: dict[int, list[tuple[int, int]]] = {}
    for a, b in combinations(ys, 2):
        grouped.setdefault(b - a, []).append((a, b))
    return {k: sorted(v) for k, v in sorted(grouped.items())}


def all_year_pairs(years: Sequence[int] | Iterable[int]) -> list[tuple[int, int]]:
    """Flat pair list, ordered by period length then start year."""
    return [p for pairs in year_pairs(years).values() for p in pairs]
