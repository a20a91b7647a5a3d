import numpy as np
import pytest

from conftest import make_binary
from oracles import oracle_exact_pvalue
from tradespace.bootstrap import (
    TestSpec,
    _mc_pvalue,
    _stream,
    expand_specs,
    read_results_csv,
    run_suite,
    run_test,
    write_results_csv,
    format_pvalue,
)
from tradespace.errors import PeriodMismatch, RegistryMismatch, ShapeMismatch
from tradespace.panel import Registry
from tradespace.product_space import IndicatorMatrix
from tradespace.rca import binary_from_values, compute_changes


def _setup(x0_rows, x1_rows, indicator_rows, **spec_kw):
    x0 = make_binary(x0_rows, year=2012)
    x1 = make_binary(x1_rows, year=2013)
    delta = compute_changes(x0, x1)
    ind = IndicatorMatrix(
        values=np.asarray(indicator_rows, dtype=np.float64), indicator="D", year=2012
    )
    defaults = dict(
        indicator="D", direction="gain", scope="pooled",
        from_year=2012, to_year=2013, repetitions=500, min_candidates=2, seed=7,
    )
    defaults.update(spec_kw)
    return TestSpec(**defaults), ind, x0, delta


def test_constant_indicator_gives_p_one_in_both_directions():
    rng = np.random.default_rng(0)
    x0_rows = (rng.random((6, 5)) < 0.5).astype(np.uint8)
    x1_rows = (rng.random((6, 5)) < 0.5).astype(np.uint8)
    const = np.full((6, 5), 0.3721)
    for direction in ("gain", "loss"):
        spec, ind, x0, delta = _setup(x0_rows, x1_rows, const, direction=direction)
        res = run_test(spec, ind, x0, delta)
        if not res.skipped:
            assert res.p_value == 1.0


def test_single_mover_at_unique_maximum():
    # 4x5 grid: all baseline zeros -> N = 20 candidates; one gain at the
    # unique maximum indicator value.  Exact p over single-cell subsets: 1/20.
    x0_rows = np.zeros((4, 5), dtype=np.uint8)
    x1_rows = np.zeros((4, 5), dtype=np.uint8)
    x1_rows[2, 3] = 1
    rng = np.random.default_rng(42)
    ind_rows = rng.random((4, 5))
    ind_rows[2, 3] = 2.0  # unique maximum
    spec, ind, x0, delta = _setup(x0_rows, x1_rows, ind_rows, repetitions=5000)
    res = run_test(spec, ind, x0, delta)
    assert res.n == 20 and res.n1 == 1
    exact = oracle_exact_pvalue(ind_rows.ravel().tolist(), [2 * 5 + 3], "gain")
    assert exact == 1 / 20
    assert abs(res.p_value - exact) <= 0.01
    assert res.observed_mean == 2.0


def test_monte_carlo_close_to_exhaustive_enumeration():
    rng = np.random.default_rng(123)
    bad = 0
    trials = 40
    for t in range(trials):
        n = int(rng.integers(6, 13))
        n1 = int(rng.integers(1, n))
        values = rng.normal(size=n)
        movers = np.zeros(n, dtype=bool)
        movers[rng.choice(n, n1, replace=False)] = True
        direction = "gain" if rng.random() < 0.5 else "loss"
        exact = oracle_exact_pvalue(
            values.tolist(), np.flatnonzero(movers).tolist(), direction
        )
        reps = 4000
        p_hat = _mc_pvalue(
            values, movers, direction, reps, np.random.default_rng(1000 + t)
        )
        tol = 3 * np.sqrt(max(exact * (1 - exact), 1e-12) / reps) + 1e-9
        if abs(p_hat - exact) > tol:
            bad += 1
    assert bad <= 1  # 3-sigma bound allows rare excursions


def test_direction_symmetry_under_shared_stream():
    rng = np.random.default_rng(9)
    values = rng.normal(size=50)
    movers = np.zeros(50, dtype=bool)
    movers[rng.choice(50, 12, replace=False)] = True
    p_gain = _mc_pvalue(values, movers, "gain", 800, np.random.default_rng(55))
    p_loss_neg = _mc_pvalue(-values, movers, "loss", 800, np.random.default_rng(55))
    assert p_gain == p_loss_neg


def test_skip_rules():
    # N below the cutoff
    x0 = np.zeros((3, 5), dtype=np.uint8)
    x1 = np.zeros((3, 5), dtype=np.uint8)
    x1[0, 0] = 1
    spec, ind, b0, delta = _setup(x0, x1, np.random.default_rng(0).random((3, 5)),
                                  min_candidates=16)
    res = run_test(spec, ind, b0, delta)
    assert res.skipped and res.reason == "N <= 15"
    assert res.p_value is None

    # no movers
    spec2, ind2, b2, delta2 = _setup(x0, np.zeros_like(x0), np.ones((3, 5)),
                                     min_candidates=2)
    res2 = run_test(spec2, ind2, b2, delta2)
    assert res2.skipped and res2.reason == "no movers"

    # all candidates moved
    spec3, ind3, b3, delta3 = _setup(x0, np.ones_like(x0), np.ones((3, 5)),
                                     min_candidates=2)
    res3 = run_test(spec3, ind3, b3, delta3)
    assert res3.skipped and res3.reason == "all candidates moved"
    assert res3.n1 == res3.n


def test_candidate_sets_partition_the_grid():
    rng = np.random.default_rng(17)
    x0_rows = (rng.random((7, 4)) < 0.4).astype(np.uint8)
    x1_rows = (rng.random((7, 4)) < 0.4).astype(np.uint8)
    ind_rows = rng.random((7, 4))
    n_by_dir = {}
    for direction in ("gain", "loss"):
        spec, ind, x0, delta = _setup(x0_rows, x1_rows, ind_rows,
                                      direction=direction, min_candidates=2)
        n_by_dir[direction] = run_test(spec, ind, x0, delta).n
    assert n_by_dir["gain"] + n_by_dir["loss"] == 7 * 4


def test_scope_slicing_units():
    rng = np.random.default_rng(3)
    x0_rows = (rng.random((6, 4)) < 0.5).astype(np.uint8)
    x1_rows = (rng.random((6, 4)) < 0.5).astype(np.uint8)
    ind_rows = rng.random((6, 4))
    spec, ind, x0, delta = _setup(x0_rows, x1_rows, ind_rows,
                                  scope="product", unit=2, min_candidates=2)
    res = run_test(spec, ind, x0, delta)
    assert res.unit == x0.products.codes[2]
    assert res.n + (
        run_test(
            TestSpec(**{**spec.__dict__, "direction": "loss"}), ind, x0, delta
        ).n
    ) == 4  # a row has one cell per country

    spec_c = TestSpec(**{**spec.__dict__, "scope": "country", "unit": 1})
    res_c = run_test(spec_c, ind, x0, delta)
    assert res_c.unit == x0.countries.codes[1]


def test_validation_errors():
    rng = np.random.default_rng(0)
    x0_rows = (rng.random((4, 4)) < 0.5).astype(np.uint8)
    x1_rows = (rng.random((4, 4)) < 0.5).astype(np.uint8)
    ind_rows = rng.random((4, 4))
    spec, ind, x0, delta = _setup(x0_rows, x1_rows, ind_rows)

    with pytest.raises(PeriodMismatch):
        run_test(TestSpec(**{**spec.__dict__, "to_year": 2014}), ind, x0, delta)
    bad_ind = IndicatorMatrix(values=ind_rows, indicator="D", year=2013)
    with pytest.raises(PeriodMismatch):
        run_test(spec, bad_ind, x0, delta)
    with pytest.raises(ShapeMismatch):
        run_test(spec, IndicatorMatrix(np.ones((2, 2)), "D", 2012), x0, delta)
    other = binary_from_values(
        x0_rows, 2012, Registry(tuple(f"q{i}" for i in range(4))), x0.countries
    )
    with pytest.raises(RegistryMismatch):
        run_test(spec, ind, other, delta)

    with pytest.raises(ValueError):
        TestSpec(indicator="D", direction="sideways", scope="pooled",
                 from_year=2012, to_year=2013)
    with pytest.raises(ValueError):
        TestSpec(indicator="D", direction="gain", scope="everywhere",
                 from_year=2012, to_year=2013)


def _small_suite_inputs(seed=0, years=range(2012, 2019)):
    rng = np.random.default_rng(seed)
    years = list(years)
    rcas = {}
    prev = (rng.random((6, 5)) < 0.5).astype(np.uint8)
    for y in years:
        flip = rng.random((6, 5)) < 0.25
        prev = np.where(flip, 1 - prev, prev).astype(np.uint8)
        rcas[y] = make_binary(prev, year=y)
    deltas = {}
    for a in years:
        for b in years:
            if a < b:
                deltas[(a, b)] = compute_changes(rcas[a], rcas[b])
    indicators = {}
    for y in years:
        for key in ("D", "Dstar"):
            indicators[(key, y)] = IndicatorMatrix(
                values=rng.random((6, 5)), indicator=key, year=y
            )
    return rcas, deltas, indicators


def test_suite_cartesian_contract():
    rcas, deltas, indicators = _small_suite_inputs()
    periods = [(a, b) for a in range(2012, 2019) for b in range(2012, 2019) if a < b]
    results = run_suite(
        rcas, deltas, indicators,
        indicator_ids=("D", "Dstar"), periods=periods,
        scopes=("pooled",), directions=("gain", "loss"),
        repetitions=50, min_candidates=2, seed=11,
    )
    assert len(results) == 21 * 2 * 2

    empty = run_suite(
        rcas, deltas, indicators,
        indicator_ids=(), periods=periods,
        repetitions=50, min_candidates=2, seed=11,
    )
    assert empty == []

    per_country = run_suite(
        rcas, deltas, indicators,
        indicator_ids=("D",), periods=[(2012, 2013)],
        scopes=("country",), directions=("gain",),
        repetitions=50, min_candidates=2, seed=11,
    )
    assert len(per_country) == 5  # one per country column


def test_suite_deterministic_across_thread_counts():
    rcas, deltas, indicators = _small_suite_inputs(seed=4)
    kwargs = dict(
        indicator_ids=("D", "Dstar"),
        periods=[(2012, 2013), (2012, 2015)],
        scopes=("pooled", "product"),
        directions=("gain", "loss"),
        repetitions=120,
        min_candidates=2,
        seed=99,
    )
    serial = run_suite(rcas, deltas, indicators, threads=1, **kwargs)
    parallel = run_suite(rcas, deltas, indicators, threads=2, **kwargs)
    assert serial == parallel


def test_stream_is_keyed_by_all_test_coordinates():
    base = dict(indicator="D", direction="gain", scope="pooled",
                from_year=2012, to_year=2013, seed=1)
    s0 = _stream(TestSpec(**base))
    s0_again = _stream(TestSpec(**base))
    assert s0.integers(0, 1 << 30, 8).tolist() == s0_again.integers(0, 1 << 30, 8).tolist()
    for change in (
        {"seed": 2}, {"indicator": "Dstar"}, {"direction": "loss"},
        {"to_year": 2014}, {"scope": "product", "unit": 0},
    ):
        other = _stream(TestSpec(**{**base, **change}))
        assert (
            _stream(TestSpec(**base)).integers(0, 1 << 30, 8).tolist()
            != other.integers(0, 1 << 30, 8).tolist()
        )


def test_results_csv_roundtrip(tmp_path):
    rcas, deltas, indicators = _small_suite_inputs(seed=2)
    results = run_suite(
        rcas, deltas, indicators,
        indicator_ids=("D",), periods=[(2012, 2014)],
        scopes=("pooled", "product"), directions=("gain", "loss"),
        repetitions=80, min_candidates=4, seed=5,
    )
    path = tmp_path / "res.csv"
    write_results_csv(results, path)
    assert read_results_csv(path) == results


def test_format_pvalue():
    assert format_pvalue(0.0, 5000) == "< 0.0002"
    assert format_pvalue(0.0314, 5000) == "0.0314"
    assert format_pvalue(None, 5000) == ""


def test_expand_specs_order_is_stable():
    specs = expand_specs(
        indicator_ids=("D",), periods=[(2012, 2013)], scopes=("product",),
        directions=("gain",), shape=(3, 2), seed=0,
    )
    assert [s.unit for s in specs] == [0, 1, 2]


def test_product_scope_invariant_to_per_row_constant_shift():
    """Indicators that differ by a per-row constant (the autonomous part)
    produce identical product-scope decisions when the stream is shared."""
    rng = np.random.default_rng(77)
    values = rng.random(30)
    movers = np.zeros(30, dtype=bool)
    movers[rng.choice(30, 8, replace=False)] = True
    shifted = values + 0.4375  # binary-friendly constant keeps ties exact
    p_base = _mc_pvalue(values, movers, "gain", 600, np.random.default_rng(5))
    p_shift = _mc_pvalue(shifted, movers, "gain", 600, np.random.default_rng(5))
    assert p_base == p_shift


def test_run_test_aligns_to_intersected_change_matrix():
    """Panel churn: the change matrix sits on intersected registries and the
    baseline/indicator are restricted to its cells."""
    x0 = binary_from_values(
        np.array([[0, 1], [1, 0], [0, 0]]), 2012,
        Registry(("p1", "p2", "p3")), Registry(("A", "B")),
    )
    x1 = binary_from_values(
        np.array([[1, 1], [0, 0]]), 2013, Registry(("p1", "p2")), Registry(("A", "B"))
    )
    delta = compute_changes(x0, x1)
    assert delta.products.codes == ("p1", "p2")
    ind = IndicatorMatrix(values=np.arange(6, dtype=float).reshape(3, 2),
                          indicator="D", year=2012)
    spec = TestSpec(indicator="D", direction="gain", scope="pooled",
                    from_year=2012, to_year=2013, repetitions=50,
                    min_candidates=2, seed=0)
    res = run_test(spec, ind, x0, delta)
    assert res.n == 2  # zeros of the restricted 2x2 baseline
    assert not res.skipped
