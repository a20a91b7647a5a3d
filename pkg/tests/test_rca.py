import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import make_binary, panel_from_grid
from oracles import as_lists, oracle_balassa
from tradespace.errors import NonIncreasingYears, RegistryMismatch, TooFewYears, YearNotFound
from tradespace.panel import Registry
from tradespace.rca import (
    all_year_pairs,
    binary_from_values,
    compute_anti_rca,
    compute_changes,
    compute_rca,
    year_pairs,
)

positive_grids = hnp.arrays(
    dtype=np.float64,
    shape=st.tuples(st.integers(1, 7), st.integers(1, 6)),
    elements=st.floats(min_value=0.01, max_value=1e6, allow_nan=False),
)


def test_diagonal_panel():
    panel = panel_from_grid({2012: [[10, 0], [0, 10]]})
    binary, cont = compute_rca(panel, 2012)
    np.testing.assert_array_equal(binary.x, [[1, 0], [0, 1]])
    np.testing.assert_allclose(cont.balassa, [[2.0, 0.0], [0.0, 2.0]])
    # symmetric transform at the computed points: 2 -> 1/3, 0 -> -1
    np.testing.assert_allclose(cont.symmetric, [[1 / 3, -1.0], [-1.0, 1 / 3]])
    assert binary.total_rca == 2
    np.testing.assert_array_equal(binary.ubiquity, [1, 1])
    np.testing.assert_array_equal(binary.diversification, [1, 1])


def test_symmetric_transform_reference_points():
    # map a few Balassa values through a panel engineered to produce them
    panel = panel_from_grid({2012: [[3, 1], [1, 3]]})
    _, cont = compute_rca(panel, 2012)
    chi = cont.balassa
    rho = cont.symmetric
    np.testing.assert_allclose(rho, (chi - 1) / (chi + 1))
    assert rho.min() >= -1 and rho.max() <= 1
    # chi == 1 maps to exactly zero
    panel_flat = panel_from_grid({2012: [[1, 1], [1, 1]]})
    _, cont_flat = compute_rca(panel_flat, 2012)
    np.testing.assert_array_equal(cont_flat.balassa, np.ones((2, 2)))
    np.testing.assert_array_equal(cont_flat.symmetric, np.zeros((2, 2)))


def test_year_not_found():
    panel = panel_from_grid({2012: [[1.0]]})
    with pytest.raises(YearNotFound):
        compute_rca(panel, 1999)


def test_inactive_codes_are_excluded_from_rca():
    grid = np.array([[5.0, 1.0], [0.0, 0.0], [2.0, 8.0]])
    panel = panel_from_grid(
        {2012: grid.tolist(), 2013: np.ones((3, 2)).tolist()}, strict=False
    )
    binary, cont = compute_rca(panel, 2012)
    assert binary.shape == (2, 2)
    assert "P0001" not in binary.products
    assert binary.products.codes == ("P0000", "P0002")
    full = compute_rca(panel, 2013)[0]
    assert full.shape == (3, 2)


@settings(max_examples=60, deadline=None)
@given(grid=positive_grids)
def test_balassa_matches_counting_oracle(grid):
    panel = panel_from_grid({2012: grid.tolist()})
    _, cont = compute_rca(panel, 2012)
    expected = np.array(oracle_balassa(as_lists(grid)))
    np.testing.assert_allclose(cont.balassa, expected, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(grid=positive_grids)
def test_threshold_consistency_and_reconstruction(grid):
    panel = panel_from_grid({2012: grid.tolist()})
    binary, cont = compute_rca(panel, 2012)
    # binary flag is exactly the sign test on the symmetric transform
    np.testing.assert_array_equal(binary.x, (cont.symmetric >= 0).astype(np.uint8))
    # reconstructing values from chi recovers column totals
    col_tot = grid.sum(axis=0)
    row_share = grid.sum(axis=1) / grid.sum()
    rebuilt = cont.balassa * row_share[:, None] * col_tot[None, :]
    np.testing.assert_allclose(rebuilt.sum(axis=0), col_tot, rtol=1e-9)
    # cached marginals match brute-force recomputation
    assert binary.total_rca == int(binary.x.sum())
    np.testing.assert_array_equal(binary.ubiquity, binary.x.sum(axis=1))
    np.testing.assert_array_equal(binary.diversification, binary.x.sum(axis=0))


def test_anti_rca_examples():
    z1 = compute_anti_rca(make_binary([[1, 0], [0, 1]]))
    np.testing.assert_array_equal(z1.z, [[0, 1], [1, 0]])
    z2 = compute_anti_rca(make_binary(np.ones((2, 3))))
    np.testing.assert_array_equal(z2.z, np.zeros((2, 3)))
    np.testing.assert_array_equal(z2.anti_ubiquity, [0, 0])
    z3 = compute_anti_rca(make_binary([[1, 1], [1, 0], [0, 1]]))
    np.testing.assert_array_equal(z3.anti_ubiquity, [0, 1, 1])


def test_changes_identity_and_counts():
    x0 = make_binary([[0, 1], [1, 1]], year=2012)
    x1 = make_binary([[1, 1], [0, 1]], year=2013)
    delta = compute_changes(x0, x1)
    np.testing.assert_array_equal(delta.delta, [[1, 0], [-1, 0]])
    assert delta.gains == 1 and delta.losses == 1

    same = compute_changes(x0, make_binary([[0, 1], [1, 1]], year=2015))
    assert not same.delta.any()
    assert same.gains == same.losses == 0


def test_changes_rejects_non_increasing_years():
    x0 = make_binary([[1]], year=2013)
    x1 = make_binary([[1]], year=2012)
    with pytest.raises(NonIncreasingYears):
        compute_changes(x0, x1)


def test_changes_on_registry_intersection():
    x0 = binary_from_values(
        np.array([[1, 0], [0, 1]]), 2012, Registry(("p1", "p2")), Registry(("A", "B"))
    )
    x1 = binary_from_values(
        np.array([[0, 1], [1, 1]]), 2013, Registry(("p2", "p3")), Registry(("A", "B"))
    )
    delta = compute_changes(x0, x1)
    assert delta.products.codes == ("p2",)
    assert delta.excluded_products == ("p1", "p3")
    np.testing.assert_array_equal(delta.delta, [[0, 0]])

    disjoint = binary_from_values(
        np.array([[1]]), 2014, Registry(("q9",)), Registry(("A",))
    )
    with pytest.raises(RegistryMismatch):
        compute_changes(x0, disjoint)


def test_year_pairs():
    grouped = year_pairs(range(2012, 2019))
    flat = all_year_pairs(range(2012, 2019))
    assert len(flat) == 21
    assert len(grouped[1]) == 6
    assert grouped[6] == [(2012, 2018)]
    assert all_year_pairs([2000, 2001]) == [(2000, 2001)]
    with pytest.raises(TooFewYears):
        year_pairs([2000])
