#!/usr/bin/env python3
"""Generate a synthetic export panel (long-format CSV) plus a random
technology-group concordance, ready for the `tradespace ingest` stage.

Example:
    python scripts/make_synthetic_panel.py --products 200 --countries 30 \
        --first-year 2012 --last-year 2018 --seed 7 --out data/
"""

import argparse
from pathlib import Path

from tradespace.panel import panel_to_frame
from tradespace.synthetic import lall_frame, synthetic_lall, synthetic_panel


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--products", type=int, default=200)
    parser.add_argument("--countries", type=int, default=30)
    parser.add_argument("--first-year", type=int, default=2012)
    parser.add_argument("--last-year", type=int, default=2018)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--noise-sd", type=float, default=3.65,
                        help="idiosyncratic log-noise scale (drives RCA density)")
    parser.add_argument("--persistence", type=float, default=0.98,
                        help="year-to-year AR(1) coefficient (drives churn)")
    parser.add_argument("--out", type=Path, default=Path("data"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    panel = synthetic_panel(
        args.products,
        args.countries,
        range(args.first_year, args.last_year + 1),
        seed=args.seed,
        noise_sd=args.noise_sd,
        persistence=args.persistence,
    )
    exports = args.out / "exports.csv"
    panel_to_frame(panel).to_csv(exports, index=False)
    lall = args.out / "lall.csv"
    lall_frame(synthetic_lall(panel.products, seed=args.seed + 1)).to_csv(lall, index=False)
    print(f"wrote {exports} and {lall}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
