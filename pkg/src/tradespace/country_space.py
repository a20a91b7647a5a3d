"""Country-space counterparts of the product-space objects.

Countries are related through shared specializations; products move
through the country network.  Implemented by delegation: every starred
quantity is the corresponding product-space quantity computed on the
transposed RCA matrix and transposed back, which makes the
product/country duality hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import product_space as ps
from .product_space import ConditionalProbMatrix, IndicatorMatrix
from .rca import AntiRca, BinaryRca


@dataclass(frozen=True)
class CountryIndicators:
    density: IndicatorMatrix
    extended_density: IndicatorMatrix
    total: IndicatorMatrix
    autonomous: IndicatorMatrix
    path_dependent: IndicatorMatrix


def _star(cp: ConditionalProbMatrix, kind: str) -> ConditionalProbMatrix:
    return ConditionalProbMatrix(
        values=cp.values, kind=kind, year=cp.year, zero_rows=cp.zero_rows
    )


def _unstar(cp: ConditionalProbMatrix) -> ConditionalProbMatrix:
    return ConditionalProbMatrix(
        values=cp.values, kind=cp.kind.replace("star", ""), year=cp.year,
        zero_rows=cp.zero_rows,
    )


def country_cooccurrence_prob(x: BinaryRca) -> ConditionalProbMatrix:
    """C*: n x n co-specialization probabilities between countries."""
    return _star(ps.cooccurrence_prob(x.transposed()), "Cstar")


def country_exclusion_prob(x: BinaryRca, z: AntiRca) -> ConditionalProbMatrix:
    """B*: probability a product is held by the column country given it is
    not held by the row country."""
    return _star(ps.exclusion_prob(x.transposed(), z.transposed()), "Bstar")


def _transpose_back(ind: IndicatorMatrix, indicator: str, year: int) -> IndicatorMatrix:
    return IndicatorMatrix(
        values=np.ascontiguousarray(ind.values.T), indicator=indicator, year=year
    )


def country_density(x: BinaryRca, cstar_min: ConditionalProbMatrix) -> IndicatorMatrix:
    d = ps.density(x.transposed(), _unstar(cstar_min))
    return _transpose_back(d, "Dstar", x.year)


def country_extended_density(
    x: BinaryRca,
    z: AntiRca,
    cstar_min: ConditionalProbMatrix,
    bstar_min: ConditionalProbMatrix,
) -> IndicatorMatrix:
    d = ps.extended_density(
        x.transposed(), z.transposed(), _unstar(cstar_min), _unstar(bstar_min)
    )
    return _transpose_back(d, "DtildeStar", x.year)


def country_specialization_prob(
    x: BinaryRca,
    z: AntiRca,
    cstar: ConditionalProbMatrix,
    bstar: ConditionalProbMatrix,
) -> tuple[IndicatorMatrix, IndicatorMatrix, IndicatorMatrix]:
    """(total, autonomous, path_dependent) in country space.

    Columns of the total sum (over products) to country diversification;
    the autonomous part has no product variation.
    """
    total, auto, path = ps.specialization_prob(
        x.transposed(), z.transposed(), _unstar(cstar), _unstar(bstar)
    )
    year = x.year
    return (
        _transpose_back(total, "Estar", year),
        _transpose_back(auto, "E1star", year),
        _transpose_back(path, "E2star", year),
    )


def country_indicators(
    x: BinaryRca,
    z: AntiRca,
    cstar: ConditionalProbMatrix,
    bstar: ConditionalProbMatrix,
) -> CountryIndicators:
    """All five starred indicators from the two starred probability matrices."""
    cstar_min = ps.min_symmetrized(cstar)
    bstar_min = ps.min_symmetrized(bstar)
    total, auto, path = country_specialization_prob(x, z, cstar, bstar)
    return CountryIndicators(
        density=country_density(x, cstar_min),
        extended_density=country_extended_density(x, z, cstar_min, bstar_min),
        total=total,
        autonomous=auto,
        path_dependent=path,
    )
