"""Product-space relatedness objects.

Conditional co-occurrence probabilities between products, their
exclusion-conditioned counterpart, and the per-(product, country)
indicators built on them: density, extended density, and the
specialization-probability estimate with its autonomous /
path-dependent decomposition.

Conventions for degenerate rows (recorded in matrix metadata):
rows with zero ubiquity (co-occurrence side) or zero anti-ubiquity
(exclusion side) carry no information and are set to zero; density
rows whose weight sum is zero yield zero rather than NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch
from .rca import AntiRca, BinaryRca


@dataclass(frozen=True)
class ConditionalProbMatrix:
    """Square matrix of conditional probabilities between products (or countries).

    ``kind`` is one of C, B, K, Cmin, Bmin and their starred variants;
    rows condition, columns are the target.
    """

    values: np.ndarray
    kind: str
    year: int
    zero_rows: tuple[int, ...] = field(default=(), compare=False)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class IndicatorMatrix:
    """An m x n indicator tagged with its interface id and baseline year."""

    values: np.ndarray
    indicator: str
    year: int


def _ratio_rows(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    """Divide rows of `num` by the vector `den`; zero entries of `den` give zero rows."""
    zero = den == 0
    safe = np.where(zero, 1.0, den)
    out = num / safe[:, None]
    if zero.any():
        out[zero, :] = 0.0
    return out, tuple(np.flatnonzero(zero).tolist())


def cooccurrence_prob(x: BinaryRca) -> ConditionalProbMatrix:
    """C: probability of holding RCA in the column product given RCA in the row product."""
    k = (x.x @ x.x.T).astype(np.float64)  # co-occurrence counts
    values, zero_rows = _ratio_rows(k, x.ubiquity.astype(np.float64))
    return ConditionalProbMatrix(values=values, kind="C", year=x.year, zero_rows=zero_rows)


def exclusion_prob(x: BinaryRca, z: AntiRca) -> ConditionalProbMatrix:
    """B: probability of holding RCA in the column product given NOT holding the row product."""
    zx = (z.z @ x.x.T).astype(np.float64)
    values, zero_rows = _ratio_rows(zx, z.anti_ubiquity.astype(np.float64))
    return ConditionalProbMatrix(values=values, kind="B", year=x.year, zero_rows=zero_rows)


def marginal_prob(c: ConditionalProbMatrix, b: ConditionalProbMatrix) -> ConditionalProbMatrix:
    """K = C - B: excess of co-occurrence over exclusion-conditioned probability."""
    if c.values.shape != b.values.shape:
        raise ShapeMismatch(f"{c.values.shape} vs {b.values.shape}")
    kind = "Kstar" if c.kind.endswith("star") else "K"
    return ConditionalProbMatrix(values=c.values - b.values, kind=kind, year=c.year)


def min_symmetrized(cp: ConditionalProbMatrix) -> ConditionalProbMatrix:
    """Elementwise min(M, M^T): symmetric proximity from asymmetric probabilities."""
    return ConditionalProbMatrix(
        values=np.minimum(cp.values, cp.values.T),
        kind=cp.kind + "min",
        year=cp.year,
        zero_rows=cp.zero_rows,
    )


def density(x: BinaryRca, cmin: ConditionalProbMatrix) -> IndicatorMatrix:
    """Proximity-weighted share of a country's portfolio around each product.

    Row i, column j: sum of symmetrized proximities between i and the
    products held by j, over the total proximity mass of i.  1 for a
    country holding everything, 0 for an empty column.
    """
    if cmin.values.shape != (x.shape[0], x.shape[0]):
        raise ShapeMismatch("proximity matrix does not match product count")
    num = cmin.values @ x.x
    den = cmin.values.sum(axis=1)
    values, _ = _ratio_rows(num, den)
    return IndicatorMatrix(values=values, indicator="D", year=x.year)


def extended_density(
    x: BinaryRca,
    z: AntiRca,
    cmin: ConditionalProbMatrix,
    bmin: ConditionalProbMatrix,
) -> IndicatorMatrix:
    """Density extended with symmetrized exclusion information."""
    num = cmin.values @ x.x + bmin.values @ z.z
    den = cmin.values.sum(axis=1) + bmin.values.sum(axis=1)
    values, _ = _ratio_rows(num, den)
    return IndicatorMatrix(values=values, indicator="Dtilde", year=x.year)


def specialization_prob(
    x: BinaryRca,
    z: AntiRca,
    c: ConditionalProbMatrix,
    b: ConditionalProbMatrix,
) -> tuple[IndicatorMatrix, IndicatorMatrix, IndicatorMatrix]:
    """Probabilistic re-estimate of the RCA matrix from the product space.

    Returns (total, autonomous, path_dependent).  The total averages, per
    cell, the conditional probabilities attached to the country's held and
    missing products; its rows sum (over countries) to product ubiquity.
    The autonomous part has no country variation; the path-dependent part
    carries the portfolio-specific signal.  total = autonomous +
    path_dependent elementwise.
    """
    m = x.shape[0]
    if c.values.shape != (m, m) or b.values.shape != (m, m):
        raise ShapeMismatch("conditional probability matrices do not match product count")
    total = (c.values.T @ x.x + b.values.T @ z.z) / m
    auto = np.repeat(b.values.sum(axis=0)[:, None] / m, x.shape[1], axis=1)
    kt = (c.values - b.values).T
    path = (kt @ x.x) / m
    year = x.year
    return (
        IndicatorMatrix(values=total, indicator="E", year=year),
        IndicatorMatrix(values=auto, indicator="E1", year=year),
        IndicatorMatrix(values=path, indicator="E2", year=year),
    )
