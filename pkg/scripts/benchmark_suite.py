#!/usr/bin/env python3
"""Benchmark the pooled bootstrap suite on the full-size synthetic panel
(5,197 products x 155 countries, seven years): one pooled test, then the
504-test pooled sweep (21 periods x 12 indicators x 2 directions).

Example:
    python scripts/benchmark_suite.py --threads 8
"""

import argparse
import os
import time

from tradespace.bootstrap import TestSpec, run_suite, run_test
from tradespace.pipeline import HEADLINE_IDS, compute_indicators
from tradespace.rca import all_year_pairs, compute_changes, compute_rca
from tradespace.synthetic import synthetic_panel


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--products", type=int, default=5197)
    parser.add_argument("--countries", type=int, default=155)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--reps", type=int, default=5000)
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--skip-full-suite", action="store_true")
    args = parser.parse_args()

    t0 = time.perf_counter()
    panel = synthetic_panel(
        args.products, args.countries, range(2012, 2019), seed=args.seed
    )
    years = list(panel.years)
    rcas = {y: compute_rca(panel, y)[0] for y in years}
    deltas = {(a, b): compute_changes(rcas[a], rcas[b]) for a, b in all_year_pairs(years)}
    print(f"panel + rca + deltas: {time.perf_counter() - t0:.1f}s "
          f"(density {rcas[2012].total_rca / (args.products * args.countries):.4f})")

    t0 = time.perf_counter()
    indicators = {}
    for year in sorted({a for a, _ in all_year_pairs(years)}):
        for key, mat in compute_indicators(rcas[year], HEADLINE_IDS).items():
            indicators[(key, year)] = mat
    print(f"indicator sets for {len(years) - 1} baselines: {time.perf_counter() - t0:.1f}s")

    spec = TestSpec(indicator="D", direction="gain", scope="pooled",
                    from_year=years[0], to_year=years[1],
                    repetitions=args.reps, seed=1)
    t0 = time.perf_counter()
    result = run_test(spec, indicators[("D", years[0])], rcas[years[0]],
                      deltas[(years[0], years[1])])
    print(f"one pooled test (N={result.n}, N1={result.n1}): "
          f"{time.perf_counter() - t0:.1f}s, p={result.p_value}")

    if args.skip_full_suite:
        return 0
    t0 = time.perf_counter()
    results = run_suite(
        rcas, deltas, indicators,
        indicator_ids=HEADLINE_IDS, periods=all_year_pairs(years),
        scopes=("pooled",), directions=("gain", "loss"),
        repetitions=args.reps, seed=7, threads=args.threads,
    )
    elapsed = time.perf_counter() - t0
    print(f"{len(results)} pooled tests: {elapsed:.0f}s "
          f"({elapsed / len(results):.2f}s/test on {args.threads} workers)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
