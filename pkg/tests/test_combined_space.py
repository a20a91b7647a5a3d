import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import make_binary
from oracles import (
    as_lists,
    oracle_combined_density,
    oracle_combined_extended_density,
    oracle_combined_spec_prob,
    oracle_cooccurrence,
    oracle_country_cooccurrence,
    oracle_country_exclusion,
    oracle_exclusion,
    oracle_min_sym,
)
from tradespace.combined_space import (
    combined_density,
    combined_extended_density,
    combined_specialization_prob,
    combined_specialization_prob_unnorm,
)
from tradespace.country_space import country_cooccurrence_prob, country_exclusion_prob
from tradespace.errors import EmptyRcaMatrix
from tradespace.product_space import (
    cooccurrence_prob,
    exclusion_prob,
    marginal_prob,
    min_symmetrized,
    specialization_prob,
)
from tradespace.country_space import country_specialization_prob
from tradespace.rca import compute_anti_rca

binary_mats = hnp.arrays(
    dtype=np.uint8,
    shape=st.tuples(st.integers(1, 8), st.integers(1, 6)),
    elements=st.integers(0, 1),
)

# frozen from the counting oracles for X = [[1,1],[1,0],[0,1]]
TOY_ETOT = [[0.225, 0.225], [0.225, 0.05], [0.05, 0.225]]
TOY_E1TOT = [[0.15, 0.15], [0.1, 0.1], [0.1, 0.1]]
TOY_E2TOT = [[0.075, 0.075], [0.125, -0.05], [-0.05, 0.125]]
TOY_DTOT = [[6 / 7, 6 / 7], [5 / 6, 1 / 3], [1 / 3, 5 / 6]]
TOY_DTILDETOT = [[2 / 3, 2 / 3], [0.9, 0.2], [0.2, 0.9]]


def _pieces(x):
    z = compute_anti_rca(x)
    c = cooccurrence_prob(x)
    b = exclusion_prob(x, z)
    k = marginal_prob(c, b)
    cstar = country_cooccurrence_prob(x)
    bstar = country_exclusion_prob(x, z)
    kstar = marginal_prob(cstar, bstar)
    return z, c, b, k, cstar, bstar, kstar


def test_toy_combined_values(toy_x):
    z, c, b, k, cstar, bstar, kstar = _pieces(toy_x)
    total, auto, path = combined_specialization_prob(toy_x, b, k, bstar, kstar)
    np.testing.assert_allclose(total.values, TOY_ETOT, atol=1e-12)
    np.testing.assert_allclose(auto.values, TOY_E1TOT, atol=1e-12)
    np.testing.assert_allclose(path.values, TOY_E2TOT, atol=1e-12)
    cmin, cstar_min = min_symmetrized(c), min_symmetrized(cstar)
    bmin, bstar_min = min_symmetrized(b), min_symmetrized(bstar)
    np.testing.assert_allclose(
        combined_density(toy_x, cmin, cstar_min).values, TOY_DTOT, atol=1e-12
    )
    np.testing.assert_allclose(
        combined_extended_density(toy_x, z, cmin, bmin, cstar_min, bstar_min).values,
        TOY_DTILDETOT,
        atol=1e-12,
    )


def test_empty_rca_matrix_rejected():
    x = make_binary(np.zeros((2, 2)))
    z, c, b, k, cstar, bstar, kstar = _pieces(x)
    with pytest.raises(EmptyRcaMatrix):
        combined_specialization_prob(x, b, k, bstar, kstar)


def test_saturated_matrix_boundaries():
    x = make_binary(np.ones((3, 2)))
    z, c, b, k, cstar, bstar, kstar = _pieces(x)
    cmin, cstar_min = min_symmetrized(c), min_symmetrized(cstar)
    bmin, bstar_min = min_symmetrized(b), min_symmetrized(bstar)
    # every B-type matrix vanishes: extended density equals density exactly
    dtot = combined_density(x, cmin, cstar_min).values
    dttot = combined_extended_density(x, z, cmin, bmin, cstar_min, bstar_min).values
    np.testing.assert_array_equal(dtot, dttot)
    np.testing.assert_allclose(dtot, 1.0, atol=1e-12)


def test_zero_column_gives_zero_combined_density():
    rng = np.random.default_rng(3)
    for _ in range(20):
        arr = (rng.random((5, 4)) < 0.5).astype(np.uint8)
        arr[:, 1] = 0
        arr[0, 0] = 1  # keep the matrix non-empty
        x = make_binary(arr)
        z, c, b, k, cstar, bstar, kstar = _pieces(x)
        cmin, cstar_min = min_symmetrized(c), min_symmetrized(cstar)
        dtot = combined_density(x, cmin, cstar_min).values
        np.testing.assert_array_equal(dtot[:, 1], 0.0)


@settings(max_examples=80, deadline=None)
@given(arr=binary_mats)
def test_combined_identities(arr):
    if not arr.any():
        return
    x = make_binary(arr)
    z, c, b, k, cstar, bstar, kstar = _pieces(x)
    m, n = arr.shape
    r = x.total_rca

    total, auto, path = combined_specialization_prob(x, b, k, bstar, kstar)
    unnorm = combined_specialization_prob_unnorm(x, b, k, bstar, kstar)

    # normalization: everything sums to one; unnormalized to the RCA count
    assert abs(total.values.sum() - 1.0) < 1e-10
    assert abs(unnorm.values.sum() - r) < 1e-10 * max(1, r)
    np.testing.assert_allclose(
        total.values, auto.values + path.values, atol=1e-12
    )

    # the combined estimate is the size-weighted average of the two spaces
    e_prod, _, _ = specialization_prob(x, z, c, b)
    e_ctry, _, _ = country_specialization_prob(x, z, cstar, bstar)
    np.testing.assert_allclose(
        (m + n) * unnorm.values,
        m * e_prod.values + n * e_ctry.values,
        atol=1e-10,
    )

    cmin, cstar_min = min_symmetrized(c), min_symmetrized(cstar)
    bmin, bstar_min = min_symmetrized(b), min_symmetrized(bstar)
    dtot = combined_density(x, cmin, cstar_min).values
    dttot = combined_extended_density(x, z, cmin, bmin, cstar_min, bstar_min).values
    assert (dtot >= 0).all() and (dtot <= 1 + 1e-12).all()
    assert (dttot >= 0).all() and (dttot <= 1 + 1e-12).all()


@settings(max_examples=50, deadline=None)
@given(arr=binary_mats)
def test_combined_matches_counting_oracles(arr):
    if not arr.any():
        return
    x = make_binary(arr)
    z, c, b, k, cstar, bstar, kstar = _pieces(x)
    lx = as_lists(arr)
    oc, ob = oracle_cooccurrence(lx), oracle_exclusion(lx)
    ocs, obs = oracle_country_cooccurrence(lx), oracle_country_exclusion(lx)

    total, auto, path = combined_specialization_prob(x, b, k, bstar, kstar)
    oe, oe1, oe2 = oracle_combined_spec_prob(lx, oc, ob, ocs, obs)
    np.testing.assert_allclose(total.values, np.array(oe), atol=1e-12)
    np.testing.assert_allclose(auto.values, np.array(oe1), atol=1e-12)
    np.testing.assert_allclose(path.values, np.array(oe2), atol=1e-12)

    cmin, cstar_min = min_symmetrized(c), min_symmetrized(cstar)
    bmin, bstar_min = min_symmetrized(b), min_symmetrized(bstar)
    np.testing.assert_allclose(
        combined_density(x, cmin, cstar_min).values,
        np.array(oracle_combined_density(lx, oracle_min_sym(oc), oracle_min_sym(ocs))),
        atol=1e-12,
    )
    np.testing.assert_allclose(
        combined_extended_density(x, z, cmin, bmin, cstar_min, bstar_min).values,
        np.array(
            oracle_combined_extended_density(
                lx, oracle_min_sym(oc), oracle_min_sym(ob),
                oracle_min_sym(ocs), oracle_min_sym(obs),
            )
        ),
        atol=1e-12,
    )
