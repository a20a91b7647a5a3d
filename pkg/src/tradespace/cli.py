"""Subcommand CLI wiring the pipeline stages to a workspace directory.

Stages communicate through files only (grid CSVs plus JSON manifests), so
any stage can be re-run in isolation; re-running with unchanged inputs and
seed produces byte-identical outputs.  Exit codes: 0 ok, 1 invalid input,
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from . import bootstrap, report
from .errors import BadFlag, MissingUpstream, TradespaceError, ValidationError
from .gridcsv import read_grid, write_grid
from .product_space import IndicatorMatrix
from .panel import Registry, ingest_exports, ingest_lall, load_panel, save_panel
from .pipeline import compute_indicators, parse_indicator_ids
from .rca import (
    BinaryRca,
    ChangeMatrix,
    ContinuousRca,
    binary_from_values,
    all_year_pairs,
    compute_changes,
    compute_rca,
    year_pairs,
)

RCA_FILE = "rca_{year}.csv"
BALASSA_FILE = "balassa_{year}.csv"
RSCA_FILE = "rsca_{year}.csv"
DELTA_FILE = "delta_{from_year}_{to_year}.csv"
INDICATOR_FILE = "indicator_{id}_{year}.csv"
RESULTS_FILE = "test_results.csv"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad flags are validation errors (exit 1), not crashes
        raise BadFlag(message)


def _read_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    config: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BadFlag(f"config line without '=': {line!r}")
        key, value = line.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def _resolve(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Defaults < config file < explicit flags."""
    config = _read_config(getattr(args, "config", None))
    for key, default in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config:
            raw = config[key]
            caster = type(default) if default is not None else str
            if caster is bool:
                setattr(args, key, raw.lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, caster(raw))
        else:
            setattr(args, key, default)
    unknown = set(config) - set(defaults)
    if unknown:
        raise BadFlag(f"unknown config key(s): {sorted(unknown)}")
    return args


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_rca_grid(out: Path, year: int) -> BinaryRca:
    path = out / RCA_FILE.format(year=year)
    if not path.exists():
        raise MissingUpstream(f"missing {path.name}; run the rca stage first")
    rows, cols, values = read_grid(path, dtype=np.uint8)
    return binary_from_values(values, year, Registry(rows), Registry(cols))


def _load_delta_grid(out: Path, from_year: int, to_year: int) -> ChangeMatrix:
    path = out / DELTA_FILE.format(from_year=from_year, to_year=to_year)
    if not path.exists():
        raise MissingUpstream(f"missing {path.name}; run the rca stage first")
    rows, cols, values = read_grid(path, dtype=np.int8)
    return ChangeMatrix(
        delta=values,
        from_year=from_year,
        to_year=to_year,
        products=Registry(rows),
        countries=Registry(cols),
        gains=int((values == 1).sum()),
        losses=int((values == -1).sum()),
    )


def _load_continuous_grid(out: Path, year: int) -> ContinuousRca:
    bal_path = out / BALASSA_FILE.format(year=year)
    rsca_path = out / RSCA_FILE.format(year=year)
    for path in (bal_path, rsca_path):
        if not path.exists():
            raise MissingUpstream(f"missing {path.name}; run the rca stage first")
    rows, cols, balassa = read_grid(bal_path)
    _, _, symmetric = read_grid(rsca_path)
    return ContinuousRca(
        balassa=balassa, symmetric=symmetric, year=year,
        products=Registry(rows), countries=Registry(cols),
    )


def _rca_years(out: Path) -> list[int]:
    years = sorted(
        int(p.stem.split("_")[1])
        for p in out.glob("rca_*.csv")
        if p.stem.split("_")[1].isdigit()
    )
    if not years:
        raise MissingUpstream(f"no rca_<year>.csv in {out}; run the rca stage first")
    return years


def _parse_periods(spec: str, years: list[int]) -> list[tuple[int, int]]:
    if spec == "all":
        return all_year_pairs(years)
    if spec.startswith("length="):
        try:
            length = int(spec.split("=", 1)[1])
        except ValueError:
            raise BadFlag(f"bad period length: {spec!r}") from None
        grouped = year_pairs(years)
        if length not in grouped:
            raise BadFlag(f"no {length}-year pairs in {years}")
        return grouped[length]
    pairs = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split("-")
        if len(parts) != 2:
            raise BadFlag(f"bad period {token!r}; expected FROM-TO")
        a, b = int(parts[0]), int(parts[1])
        if a not in years or b not in years:
            raise BadFlag(f"period {token!r} outside panel years {years}")
        if a >= b:
            raise BadFlag(f"period {token!r} is not increasing")
        pairs.append((a, b))
    if not pairs:
        raise BadFlag("empty period list")
    return pairs


def _parse_directions(spec: str) -> tuple[str, ...]:
    out = tuple(s for s in spec.split(",") if s)
    for d in out:
        if d not in bootstrap.DIRECTIONS:
            raise BadFlag(f"unknown direction {d!r}")
    if not out:
        raise BadFlag("empty direction list")
    return out


# --- stages ------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    args = _resolve(args, dict(sum_duplicates=False, allow_inactive=False))
    out = _out_dir(args)
    panel = ingest_exports(
        args.exports, sum_duplicates=args.sum_duplicates, strict=not args.allow_inactive
    )
    save_panel(panel, out)
    unmapped: tuple[str, ...] = ()
    if args.lall:
        concordance = ingest_lall(args.lall)
        unmapped = concordance.unmapped(panel.products.codes)
        frame = pd.DataFrame(
            {
                "product": list(concordance.groups),
                "group_id": list(concordance.groups.values()),
                "group_name": [concordance.names[g] for g in concordance.groups.values()],
            }
        )
        frame.to_csv(out / "lall.csv", index=False)
    report.write_manifest(
        out / "ingest_manifest.json",
        {
            "stage": "ingest",
            "version": __version__,
            "years": list(panel.years),
            "products": len(panel.products),
            "countries": len(panel.countries),
            "sum_duplicates": args.sum_duplicates,
            "allow_inactive": args.allow_inactive,
            "inactive_products": {str(y): list(v) for y, v in panel.inactive_products.items()},
            "inactive_countries": {str(y): list(v) for y, v in panel.inactive_countries.items()},
            "lall_unmapped_products": list(unmapped),
        },
    )
    print(f"ingested {len(panel.products)} products x {len(panel.countries)} countries "
          f"over {len(panel.years)} years -> {out}")
    if unmapped:
        print(f"warning: {len(unmapped)} panel products missing from the concordance")
    return 0


def cmd_rca(args) -> int:
    args = _resolve(args, dict(rca_threshold=1.0))
    out = _out_dir(args)
    panel = load_panel(out, strict=False)
    rcas: dict[int, BinaryRca] = {}
    counts = {}
    for year in panel.years:
        binary, cont = compute_rca(panel, year, threshold=args.rca_threshold)
        rcas[year] = binary
        counts[str(year)] = binary.total_rca
        codes = (binary.products.codes, binary.countries.codes)
        write_grid(out / RCA_FILE.format(year=year), *codes, binary.x)
        write_grid(out / BALASSA_FILE.format(year=year), *codes, cont.balassa)
        write_grid(out / RSCA_FILE.format(year=year), *codes, cont.symmetric)
    pair_list = all_year_pairs(panel.years) if len(panel.years) > 1 else []
    for a, b in pair_list:
        delta = compute_changes(rcas[a], rcas[b])
        write_grid(
            out / DELTA_FILE.format(from_year=a, to_year=b),
            delta.products.codes, delta.countries.codes, delta.delta,
        )
    report.write_manifest(
        out / "rca_manifest.json",
        {
            "stage": "rca",
            "version": __version__,
            "threshold": args.rca_threshold,
            "rca_counts": counts,
            "periods": [list(p) for p in pair_list],
        },
    )
    print(f"rca matrices for {len(panel.years)} years, {len(pair_list)} change matrices -> {out}")
    return 0


def cmd_indicators(args) -> int:
    args = _resolve(args, dict(ids="all", years="all"))
    out = _out_dir(args)
    years = _rca_years(out)
    if args.years != "all":
        requested = [int(y) for y in args.years.split(",") if y]
        missing = [y for y in requested if y not in years]
        if missing:
            raise MissingUpstream(f"no rca grid for year(s) {missing}")
        years = requested
    ids = parse_indicator_ids(args.ids)
    written = 0
    for year in years:
        x = _load_rca_grid(out, year)
        for key, mat in compute_indicators(x, ids).items():
            write_grid(
                out / INDICATOR_FILE.format(id=key, year=year),
                x.products.codes, x.countries.codes, mat.values,
            )
            written += 1
    report.write_manifest(
        out / "indicators_manifest.json",
        {
            "stage": "indicators",
            "version": __version__,
            "ids": list(ids),
            "years": years,
            "files_written": written,
        },
    )
    print(f"{written} indicator matrices ({len(ids)} ids x {len(years)} years) -> {out}")
    return 0


def cmd_test(args) -> int:
    args = _resolve(
        args,
        dict(
            indicators="headline",
            scope="pooled",
            directions="gain,loss",
            periods="all",
            reps=5000,
            min_candidates=16,
            threads=1,
        ),
    )
    if args.seed is None:
        raise BadFlag("--seed is required for the test stage")
    out = _out_dir(args)
    years = _rca_years(out)
    periods = _parse_periods(args.periods, years)
    directions = _parse_directions(args.directions)
    if args.scope not in bootstrap.SCOPES:
        raise BadFlag(f"unknown scope {args.scope!r}")
    ids = parse_indicator_ids(args.indicators)

    baselines = sorted({a for a, _ in periods})
    rcas = {y: _load_rca_grid(out, y) for y in sorted({y for p in periods for y in p})}
    deltas = {(a, b): _load_delta_grid(out, a, b) for a, b in periods}
    indicators = {}
    for year in baselines:
        for key in ids:
            path = out / INDICATOR_FILE.format(id=key, year=year)
            if not path.exists():
                raise MissingUpstream(
                    f"missing {path.name}; run the indicators stage for year {year}"
                )
            rows, cols, values = read_grid(path)
            indicators[(key, year)] = IndicatorMatrix(values=values, indicator=key, year=year)

    results = bootstrap.run_suite(
        rcas,
        deltas,
        indicators,
        indicator_ids=ids,
        periods=periods,
        scopes=(args.scope,),
        directions=directions,
        repetitions=args.reps,
        min_candidates=args.min_candidates,
        seed=args.seed,
        threads=args.threads,
    )
    bootstrap.write_results_csv(results, out / RESULTS_FILE)
    skipped = sum(1 for r in results if r.skipped)
    report.write_manifest(
        out / "test_manifest.json",
        {
            "stage": "test",
            "version": __version__,
            "seed": args.seed,
            "repetitions": args.reps,
            "min_candidates": args.min_candidates,
            "scope": args.scope,
            "directions": list(directions),
            "indicators": list(ids),
            "periods": [list(p) for p in periods],
            "results": len(results),
            "skipped": skipped,
        },
    )
    print(f"{len(results)} test results ({skipped} skipped) -> {out / RESULTS_FILE}")
    return 0


def cmd_report(args) -> int:
    args = _resolve(args, dict(cutoffs="0.01,0.05,0.1", baseline_year=0))
    out = _out_dir(args)
    years = _rca_years(out)
    cutoffs = tuple(float(c) for c in args.cutoffs.split(",") if c)
    results_path = out / RESULTS_FILE
    if not results_path.exists():
        raise MissingUpstream(f"missing {results_path.name}; run the test stage first")
    results = bootstrap.read_results_csv(results_path)
    manifest_path = out / "test_manifest.json"
    reps = 5000
    if manifest_path.exists():
        reps = json.loads(manifest_path.read_text()).get("repetitions", reps)

    rcas = {y: _load_rca_grid(out, y) for y in years}
    report.rca_count_table(list(rcas.values())).to_csv(out / "table_rca_counts.csv", index=False)

    deltas = [
        _load_delta_grid(out, a, b) for a, b in (all_year_pairs(years) if len(years) > 1 else [])
    ]
    if deltas:
        report.change_stats_table(deltas).to_csv(out / "table_change_stats.csv", index=False)

    group_cols = ("scope", "direction", "indicator")
    report.pvalue_cdf(results, group_cols, repetitions=reps).to_csv(
        out / "pvalue_cdf.csv", index=False
    )
    report.threshold_summary(results, cutoffs, group_cols).to_csv(
        out / "threshold_summary.csv", index=False
    )

    unmapped: tuple[str, ...] = ()
    lall_path = args.lall or (out / "lall.csv" if (out / "lall.csv").exists() else None)
    if lall_path:
        concordance = ingest_lall(lall_path)
        table, unmapped = report.lall_breakdown(results, concordance, cutoffs)
        table.to_csv(out / "lall_summary.csv", index=False)

    baseline = args.baseline_year or years[0]
    if baseline not in years:
        raise MissingUpstream(f"no rca grid for baseline year {baseline}")
    x = rcas[baseline]
    decomposition_ids = ("E", "E1", "E2", "Estar", "E1star", "E2star")
    mats = compute_indicators(x, decomposition_ids)
    diag = report.decomposition_diagnostics(mats, x.ubiquity, x.diversification)
    diag.product_scatter.to_csv(out / "decomposition_scatter_product.csv", index=False)
    diag.country_scatter.to_csv(out / "decomposition_scatter_country.csv", index=False)
    pd.DataFrame(
        [
            {"space": "product", "slope": diag.product_fit.slope,
             "intercept": diag.product_fit.intercept, "r_squared": diag.product_fit.r_squared},
            {"space": "country", "slope": diag.country_fit.slope,
             "intercept": diag.country_fit.intercept, "r_squared": diag.country_fit.r_squared},
        ]
    ).to_csv(out / "decomposition_fits.csv", index=False)
    for key, kd in diag.densities.items():
        report.density_frame(kd).to_csv(
            out / f"density_elements_{key}_{baseline}.csv", index=False
        )

    density_files = 0
    if len(years) > 1:
        grouped = year_pairs(years)
        conts = {y: _load_continuous_grid(out, y) for y in years}
        for length, pairs in grouped.items():
            triples = [
                (conts[a], conts[b], _load_delta_grid(out, a, b)) for a, b in pairs
            ]
            for direction in bootstrap.DIRECTIONS:
                try:
                    kd = report.rca_change_density(
                        triples, direction, label=f"{direction} {length}y"
                    )
                except TradespaceError:
                    continue  # no cells moved in this direction at this length
                report.density_frame(kd).to_csv(
                    out / f"density_change_{direction}_{length}.csv", index=False
                )
                density_files += 1

    with open(out / "summary.txt", "w", encoding="utf-8") as fh:
        fh.write(report.render_results_preview(results, reps))
        if unmapped:
            fh.write(f"\nproducts without Lall group: {', '.join(unmapped)}\n")

    report.write_manifest(
        out / "report_manifest.json",
        {
            "stage": "report",
            "version": __version__,
            "cutoffs": list(cutoffs),
            "baseline_year": baseline,
            "results": len(results),
            "skipped": sum(1 for r in results if r.skipped),
            "repetitions": reps,
            "lall_unmapped_products": list(unmapped),
            "change_density_files": density_files,
        },
    )
    print(f"report tables -> {out}")
    return 0


# --- entry point ----------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="tradespace", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="workspace directory")
        p.add_argument("--config", help="key=value file; flags override it")

    p_ingest = sub.add_parser("ingest", help="read long-format export CSV into per-year grids")
    common(p_ingest)
    p_ingest.add_argument("--exports", required=True, help="CSV with year,country,product,value")
    p_ingest.add_argument("--lall", help="optional concordance CSV with product,group_id")
    p_ingest.add_argument("--sum-duplicates", action="store_const", const=True, default=None,
                          help="sum duplicate (year,country,product) rows instead of erroring")
    p_ingest.add_argument("--allow-inactive", action="store_const", const=True, default=None,
                          help="accept codes with no positive value in some year")
    p_ingest.set_defaults(func=cmd_ingest)

    p_rca = sub.add_parser("rca", help="binary/continuous RCA per year and change matrices")
    common(p_rca)
    p_rca.add_argument("--rca-threshold", type=float, default=None)
    p_rca.set_defaults(func=cmd_rca)

    p_ind = sub.add_parser("indicators", help="indicator matrices for baseline years")
    common(p_ind)
    p_ind.add_argument("--ids", default=None,
                       help="comma list, 'headline' (12) or 'all' (15)")
    p_ind.add_argument("--years", default=None, help="comma list or 'all'")
    p_ind.set_defaults(func=cmd_indicators)

    p_test = sub.add_parser("test", help="bootstrap predictive-power tests")
    common(p_test)
    p_test.add_argument("--seed", type=int, default=None, help="master seed (required)")
    p_test.add_argument("--indicators", default=None)
    p_test.add_argument("--scope", default=None, choices=bootstrap.SCOPES)
    p_test.add_argument("--directions", default=None)
    p_test.add_argument("--periods", default=None,
                        help="'all', 'length=K', or comma list of FROM-TO")
    p_test.add_argument("--reps", type=int, default=None)
    p_test.add_argument("--min-candidates", type=int, default=None,
                        help="smallest candidate count tested (16 means N > 15)")
    p_test.add_argument("--threads", type=int, default=None)
    p_test.set_defaults(func=cmd_test)

    p_rep = sub.add_parser("report", help="summary tables and plot data")
    common(p_rep)
    p_rep.add_argument("--lall", default=None)
    p_rep.add_argument("--cutoffs", default=None)
    p_rep.add_argument("--baseline-year", type=int, default=None)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TradespaceError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
