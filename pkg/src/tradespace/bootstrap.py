"""Monte Carlo permutation test of indicator predictive power.

For one (indicator, period, direction, scope slice): the candidate cells are
the baseline zeros (gains) or ones (losses); the observed statistic is the
indicator mean over the cells that actually moved.  Each of the `repetitions`
resamples draws a uniformly random subset of the same size from the candidates
WITHOUT replacement and the p-value is the fraction of resample means at least
as extreme as the observed one (>= for gains, <= for losses, so ties count
and the estimate is conservative).

Every test derives its own RNG stream from (master seed, indicator, scope,
unit, period, direction), so results are bit-identical regardless of worker
count or execution order.
"""

from __future__ import annotations

import csv
import hashlib
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import PeriodMismatch, RegistryMismatch, ShapeMismatch
from .product_space import IndicatorMatrix
from .rca import BinaryRca, ChangeMatrix

DIRECTIONS = ("gain", "loss")
SCOPES = ("pooled", "product", "country")

RESULT_COLUMNS = (
    "scope", "unit", "indicator", "direction", "from", "to",
    "N", "N1", "observed_mean", "p_value", "skipped", "reason",
)


@dataclass(frozen=True)
class TestSpec:
    """One test to run.  `unit` is a row index (product scope) or column
    index (country scope); None for pooled."""

    __test__ = False  # keep pytest from collecting this as a test class

    indicator: str
    direction: str
    scope: str
    from_year: int
    to_year: int
    unit: int | None = None
    repetitions: int = 5000
    min_candidates: int = 16  # smallest candidate count tested (N > 15)
    seed: int = 0

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.min_candidates < 2:
            raise ValueError("min_candidates must be >= 2")


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    scope: str
    unit: str  # product/country code, "" for pooled
    indicator: str
    direction: str
    from_year: int
    to_year: int
    n: int
    n1: int
    observed_mean: float | None
    p_value: float | None
    skipped: bool
    reason: str = ""

    @property
    def length(self) -> int:
        return self.to_year - self.from_year


def _stream(spec: TestSpec) -> np.random.Generator:
    """Per-test RNG stream, stable across platforms and processes."""
    unit = "-" if spec.unit is None else str(spec.unit)
    key = (
        f"{spec.seed}|{spec.indicator}|{spec.scope}|{unit}"
        f"|{spec.from_year}|{spec.to_year}|{spec.direction}"
    )
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    entropy = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _mc_pvalue(
    values: np.ndarray,
    movers: np.ndarray,
    direction: str,
    repetitions: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo p-value for the subset-mean statistic.

    `values` are the candidate indicator values, `movers` a boolean mask of
    the observed subset.  Sampling draws whichever of the subset and its
    complement is smaller; the observed statistic is computed through the
    identical arithmetic so that exact ties (e.g. a constant indicator)
    compare as equal.
    """
    n = values.size
    n1 = int(movers.sum())
    if not 0 < n1 < n:
        raise ValueError("movers must be a proper non-empty subset")
    use_complement = n1 > n - n1
    k = n - n1 if use_complement else n1
    total = values.sum() if use_complement else 0.0
    if use_complement:
        observed = total - values[~movers].sum()
    else:
        observed = values[movers].sum()

    # indices are sorted before summing so a re-drawn subset accumulates in
    # the same order as the observed one and exact ties stay exact
    hits = 0
    if direction == "gain":
        for _ in range(repetitions):
            idx = rng.choice(n, k, replace=False, shuffle=False)
            idx.sort()
            stat = total - values[idx].sum() if use_complement else values[idx].sum()
            if stat >= observed:
                hits += 1
    else:
        for _ in range(repetitions):
            idx = rng.choice(n, k, replace=False, shuffle=False)
            idx.sort()
            stat = total - values[idx].sum() if use_complement else values[idx].sum()
            if stat <= observed:
                hits += 1
    return hits / repetitions


def _scope_slices(
    spec: TestSpec,
    indicator: IndicatorMatrix,
    x0: BinaryRca,
    delta: ChangeMatrix,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    if indicator.values.shape != x0.x.shape:
        raise ShapeMismatch("indicator shape does not match baseline RCA")
    if (delta.from_year, delta.to_year) != (spec.from_year, spec.to_year):
        raise PeriodMismatch(
            f"spec period {spec.from_year}-{spec.to_year} vs "
            f"delta {delta.from_year}-{delta.to_year}"
        )
    if indicator.year != spec.from_year:
        raise PeriodMismatch(
            f"indicator baseline {indicator.year} is not the period start "
            f"{spec.from_year}"
        )
    xv, iv = x0.x, indicator.values
    products, countries = x0.products, x0.countries
    if x0.products.codes != delta.products.codes or x0.countries.codes != delta.countries.codes:
        # a change matrix on intersected registries (panel churn): restrict
        # the baseline and indicator to the cells the change matrix covers
        try:
            pi = [x0.products.index(c) for c in delta.products.codes]
            ci = [x0.countries.index(c) for c in delta.countries.codes]
        except KeyError as missing:
            raise RegistryMismatch(
                f"change matrix code {missing} not in the baseline registries"
            ) from None
        xv = xv[np.ix_(pi, ci)]
        iv = iv[np.ix_(pi, ci)]
        products, countries = delta.products, delta.countries
    if spec.scope == "pooled":
        return iv.ravel(), xv.ravel(), delta.delta.ravel(), ""
    if spec.unit is None:
        raise ValueError(f"scope {spec.scope!r} requires a unit index")
    u = spec.unit
    if spec.scope == "product":
        return iv[u, :], xv[u, :], delta.delta[u, :], products.codes[u]
    return iv[:, u], xv[:, u], delta.delta[:, u], countries.codes[u]


def run_test(
    spec: TestSpec,
    indicator: IndicatorMatrix,
    x0: BinaryRca,
    delta: ChangeMatrix,
) -> TestResult:
    """Run one test; degenerate cases come back flagged as skipped.

    A change matrix on intersected registries (panel churn) restricts the
    baseline and indicator to its cells; unit indices then refer to the
    intersected grid.
    """
    vals, x0v, dv, unit_code = _scope_slices(spec, indicator, x0, delta)
    if spec.direction == "gain":
        candidates = x0v == 0
        moved = dv == 1
    else:
        candidates = x0v == 1
        moved = dv == -1

    n = int(candidates.sum())
    n1 = int(moved.sum())
    base = dict(
        scope=spec.scope,
        unit=unit_code,
        indicator=spec.indicator,
        direction=spec.direction,
        from_year=spec.from_year,
        to_year=spec.to_year,
        n=n,
        n1=n1,
    )
    if n < spec.min_candidates:
        return TestResult(
            **base, observed_mean=None, p_value=None,
            skipped=True, reason=f"N <= {spec.min_candidates - 1}",
        )
    if n1 == 0:
        return TestResult(
            **base, observed_mean=None, p_value=None, skipped=True, reason="no movers"
        )
    if n1 == n:
        return TestResult(
            **base,
            observed_mean=float(vals[candidates].mean()),
            p_value=None, skipped=True, reason="all candidates moved",
        )

    cand_vals = np.ascontiguousarray(vals[candidates], dtype=np.float64)
    mover_mask = moved[candidates]
    p = _mc_pvalue(cand_vals, mover_mask, spec.direction, spec.repetitions, _stream(spec))
    return TestResult(
        **base,
        observed_mean=float(cand_vals[mover_mask].mean()),
        p_value=p,
        skipped=False,
    )


# --- suites -------------------------------------------------------------------

def expand_specs(
    *,
    indicator_ids: Sequence[str],
    periods: Sequence[tuple[int, int]],
    scopes: Sequence[str],
    directions: Sequence[str],
    shape: tuple[int, int],
    repetitions: int = 5000,
    min_candidates: int = 16,
    seed: int = 0,
) -> list[TestSpec]:
    """Cartesian task list in a fixed, reproducible order."""
    m, n = shape
    specs: list[TestSpec] = []
    for from_year, to_year in periods:
        for indicator in indicator_ids:
            for scope in scopes:
                units: Iterable[int | None]
                if scope == "pooled":
                    units = (None,)
                elif scope == "product":
                    units = range(m)
                else:
                    units = range(n)
                for direction in directions:
                    for unit in units:
                        specs.append(
                            TestSpec(
                                indicator=indicator,
                                direction=direction,
                                scope=scope,
                                from_year=from_year,
                                to_year=to_year,
                                unit=unit,
                                repetitions=repetitions,
                                min_candidates=min_candidates,
                                seed=seed,
                            )
                        )
    return specs


_CTX: dict = {}


def _run_indexed(i: int) -> TestResult:
    specs, rcas, deltas, indicators = (
        _CTX["specs"], _CTX["rcas"], _CTX["deltas"], _CTX["indicators"]
    )
    spec = specs[i]
    return run_test(
        spec,
        indicators[(spec.indicator, spec.from_year)],
        rcas[spec.from_year],
        deltas[(spec.from_year, spec.to_year)],
    )


def run_tests(
    specs: Sequence[TestSpec],
    rcas: Mapping[int, BinaryRca],
    deltas: Mapping[tuple[int, int], ChangeMatrix],
    indicators: Mapping[tuple[str, int], IndicatorMatrix],
    threads: int = 1,
) -> list[TestResult]:
    """Run a task list; results come back in task order whatever the
    worker count, so output files are byte-identical across --threads."""
    global _CTX
    _CTX = {"specs": list(specs), "rcas": rcas, "deltas": deltas, "indicators": indicators}
    try:
        if threads <= 1 or len(specs) < 2:
            return [_run_indexed(i) for i in range(len(specs))]
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:  # platforms without fork: stay correct, lose parallelism
            return [_run_indexed(i) for i in range(len(specs))]
        chunk = max(1, len(specs) // (threads * 8))
        with ctx.Pool(processes=threads) as pool:
            return pool.map(_run_indexed, range(len(specs)), chunksize=chunk)
    finally:
        _CTX = {}


def run_suite(
    rcas: Mapping[int, BinaryRca],
    deltas: Mapping[tuple[int, int], ChangeMatrix],
    indicators: Mapping[tuple[str, int], IndicatorMatrix],
    *,
    indicator_ids: Sequence[str],
    periods: Sequence[tuple[int, int]],
    scopes: Sequence[str] = ("pooled",),
    directions: Sequence[str] = DIRECTIONS,
    repetitions: int = 5000,
    min_candidates: int = 16,
    seed: int = 0,
    threads: int = 1,
) -> list[TestResult]:
    """Cartesian suite over periods x indicators x scopes x directions."""
    shape = next(iter(rcas.values())).shape if rcas else (0, 0)
    specs = expand_specs(
        indicator_ids=indicator_ids,
        periods=periods,
        scopes=scopes,
        directions=directions,
        shape=shape,
        repetitions=repetitions,
        min_candidates=min_candidates,
        seed=seed,
    )
    return run_tests(specs, rcas, deltas, indicators, threads=threads)


# --- persistence ---------------------------------------------------------------

def format_pvalue(p: float | None, repetitions: int) -> str:
    """Human-readable p: zero renders as '< 1/repetitions'."""
    if p is None:
        return ""
    if p == 0.0:
        return f"< {1.0 / repetitions:g}"
    return f"{p:g}"


def write_results_csv(results: Iterable[TestResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(RESULT_COLUMNS)
        for r in results:
            out.writerow(
                [
                    r.scope,
                    r.unit,
                    r.indicator,
                    r.direction,
                    r.from_year,
                    r.to_year,
                    r.n,
                    r.n1,
                    "" if r.observed_mean is None else repr(r.observed_mean),
                    "" if r.p_value is None else repr(r.p_value),
                    "true" if r.skipped else "false",
                    r.reason,
                ]
            )


def read_results_csv(path: str | Path) -> list[TestResult]:
    results: list[TestResult] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            results.append(
                TestResult(
                    scope=row["scope"],
                    unit=row["unit"],
                    indicator=row["indicator"],
                    direction=row["direction"],
                    from_year=int(row["from"]),
                    to_year=int(row["to"]),
                    n=int(row["N"]),
                    n1=int(row["N1"]),
                    observed_mean=float(row["observed_mean"]) if row["observed_mean"] else None,
                    p_value=float(row["p_value"]) if row["p_value"] else None,
                    skipped=row["skipped"] == "true",
                    reason=row["reason"],
                )
            )
    return results
