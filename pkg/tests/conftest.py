import numpy as np
import pandas as pd
import pytest

from tradespace.panel import Registry, ingest_exports
from tradespace.rca import BinaryRca, binary_from_values, compute_anti_rca


def make_binary(rows, year=2012) -> BinaryRca:
    """BinaryRca from a nested list / array, with generated registries."""
    arr = np.asarray(rows, dtype=np.uint8)
    m, n = arr.shape
    products = Registry(tuple(f"P{i:04d}" for i in range(m)))
    countries = Registry(tuple(f"C{j:04d}" for j in range(n)))
    return binary_from_values(arr, year, products, countries)


def panel_from_grid(grids: dict[int, np.ndarray], strict: bool = True):
    """ExportPanel from {year: m x n value array} via the long-format ingester."""
    records = []
    for year, grid in grids.items():
        grid = np.asarray(grid, dtype=float)
        m, n = grid.shape
        for i in range(m):
            for j in range(n):
                records.append(
                    {
                        "year": year,
                        "country": f"C{j:04d}",
                        "product": f"P{i:04d}",
                        "value": grid[i, j],
                    }
                )
    return ingest_exports(pd.DataFrame(records), strict=strict)


@pytest.fixture
def toy_x() -> BinaryRca:
    # three products x two countries; the worked example used across modules
    return make_binary([[1, 1], [1, 0], [0, 1]])


@pytest.fixture
def toy_z(toy_x):
    return compute_anti_rca(toy_x)


def random_binary(rng: np.random.Generator, max_m=8, max_n=6) -> np.ndarray:
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    return (rng.random((m, n)) < rng.uniform(0.15, 0.85)).astype(np.uint8)
