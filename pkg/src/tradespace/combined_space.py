"""Combined-space indicators: additive aggregation of the product-space and
country-space quantities, normalized by (m + n) and, for the
specialization-probability family, by the total RCA count so that the
whole matrix sums to one."""

from __future__ import annotations

import numpy as np

from .errors import EmptyRcaMatrix, ShapeMismatch
from .product_space import ConditionalProbMatrix, IndicatorMatrix
from .rca import AntiRca, BinaryRca


def _combined_terms(
    x: BinaryRca,
    b: ConditionalProbMatrix,
    k: ConditionalProbMatrix,
    bstar: ConditionalProbMatrix,
    kstar: ConditionalProbMatrix,
) -> tuple[np.ndarray, np.ndarray]:
    m, n = x.shape
    if b.values.shape != (m, m) or k.values.shape != (m, m):
        raise ShapeMismatch("product-side matrices do not match product count")
    if bstar.values.shape != (n, n) or kstar.values.shape != (n, n):
        raise ShapeMismatch("country-side matrices do not match country count")
    xf = x.x.astype(np.float64)
    auto = b.values.sum(axis=0)[:, None] + bstar.values.sum(axis=0)[None, :]
    path = k.values.T @ x.x + xf @ kstar.values
    return auto, path


def combined_specialization_prob(
    x: BinaryRca,
    b: ConditionalProbMatrix,
    k: ConditionalProbMatrix,
    bstar: ConditionalProbMatrix,
    kstar: ConditionalProbMatrix,
) -> tuple[IndicatorMatrix, IndicatorMatrix, IndicatorMatrix]:
    """(total, autonomous, path_dependent), normalized to a grand total of 1.

    The cell (i, j) estimates the probability of landing on product i and
    country j when drawing one RCA at random from the baseline matrix.
    """
    if x.total_rca == 0:
        raise EmptyRcaMatrix("combined indicators need at least one RCA")
    m, n = x.shape
    auto, path = _combined_terms(x, b, k, bstar, kstar)
    scale = (m + n) * x.total_rca
    year = x.year
    return (
        IndicatorMatrix(values=(auto + path) / scale, indicator="Etot", year=year),
        IndicatorMatrix(values=auto / scale, indicator="E1tot", year=year),
        IndicatorMatrix(values=path / scale, indicator="E2tot", year=year),
    )


def combined_specialization_prob_unnorm(
    x: BinaryRca,
    b: ConditionalProbMatrix,
    k: ConditionalProbMatrix,
    bstar: ConditionalProbMatrix,
    kstar: ConditionalProbMatrix,
) -> IndicatorMatrix:
    """Combined total without the RCA-count normalization; sums to that count."""
    m, n = x.shape
    auto, path = _combined_terms(x, b, k, bstar, kstar)
    return IndicatorMatrix(
        values=(auto + path) / (m + n), indicator="EtotUnnorm", year=x.year
    )


def combined_density(
    x: BinaryRca,
    cmin: ConditionalProbMatrix,
    cstar_min: ConditionalProbMatrix,
) -> IndicatorMatrix:
    """Density pooling product-side and country-side proximity mass."""
    m, n = x.shape
    if cmin.values.shape != (m, m) or cstar_min.values.shape != (n, n):
        raise ShapeMismatch("proximity matrices do not match panel shape")
    xf = x.x.astype(np.float64)
    num = cmin.values @ x.x + xf @ cstar_min.values
    den = cmin.values.sum(axis=1)[:, None] + cstar_min.values.sum(axis=0)[None, :]
    values = np.divide(num, den, out=np.zeros_like(num, dtype=np.float64), where=den != 0)
    return IndicatorMatrix(values=values, indicator="Dtot", year=x.year)


def combined_extended_density(
    x: BinaryRca,
    z: AntiRca,
    cmin: ConditionalProbMatrix,
    bmin: ConditionalProbMatrix,
    cstar_min: ConditionalProbMatrix,
    bstar_min: ConditionalProbMatrix,
) -> IndicatorMatrix:
    """Extended density pooling both spaces and both information channels."""
    m, n = x.shape
    if bmin.values.shape != (m, m) or bstar_min.values.shape != (n, n):
        raise ShapeMismatch("proximity matrices do not match panel shape")
    xf = x.x.astype(np.float64)
    zf = z.z.astype(np.float64)
    num = (
        cmin.values @ x.x
        + bmin.values @ z.z
        + xf @ cstar_min.values
        + zf @ bstar_min.values
    )
    den = (
        (cmin.values.sum(axis=1) + bmin.values.sum(axis=1))[:, None]
        + (cstar_min.values.sum(axis=0) + bstar_min.values.sum(axis=0))[None, :]
    )
    values = np.divide(num, den, out=np.zeros_like(num, dtype=np.float64), where=den != 0)
    return IndicatorMatrix(values=values, indicator="DtildeTot", year=x.year)
