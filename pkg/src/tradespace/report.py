"""Descriptive tables, p-value summaries, and kernel densities.

All tables are plain pandas DataFrames; persisted CSVs regenerate the same
table when read back through the TestResult CSV round trip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .bootstrap import TestResult, format_pvalue
from .errors import EmptySample, ShapeMismatch
from .panel import LallConcordance
from .pipeline import SPACE_FAMILY
from .product_space import IndicatorMatrix
from .rca import BinaryRca, ChangeMatrix, ContinuousRca

DEFAULT_CUTOFFS = (0.01, 0.05, 0.10)


def cutoff_column(cutoff: float) -> str:
    return f"frac_le_{cutoff:g}"


# --- kernel densities ----------------------------------------------------------

@dataclass(frozen=True)
class KernelDensity:
    """Gaussian KDE evaluated on a uniform grid.

    The density is renormalized on the grid (truncation correction for
    bounded supports); `raw_integral` keeps the pre-correction mass.
    """

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    sample_size: int
    label: str
    raw_integral: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5)."""
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.size
    if n < 2:
        return 1.0
    sd = samples.std(ddof=1)
    q25, q75 = np.percentile(samples, [25, 75])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    if spread <= 0:
        # degenerate sample (all values equal): any tiny positive width works
        spread = max(abs(samples[0]), 1.0) * 1e-6
    return float(0.9 * spread * n ** (-0.2))


def kernel_density(
    samples: np.ndarray,
    *,
    label: str = "",
    grid_range: tuple[float, float] | None = None,
    grid_size: int = 512,
    bandwidth: float | None = None,
) -> KernelDensity:
    """Gaussian KDE on a uniform grid; auto range pads by 4 bandwidths."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size == 0:
        raise EmptySample(f"no samples for kernel density {label!r}")
    h = silverman_bandwidth(samples) if bandwidth is None else float(bandwidth)
    if grid_range is None:
        lo, hi = samples.min() - 4 * h, samples.max() + 4 * h
    else:
        lo, hi = grid_range
    grid = np.linspace(lo, hi, grid_size)

    dens = np.zeros(grid_size, dtype=np.float64)
    chunk = max(1, 2_000_000 // grid_size)
    for start in range(0, samples.size, chunk):
        part = samples[start : start + chunk]
        u = (grid[:, None] - part[None, :]) / h
        dens += np.exp(-0.5 * u * u).sum(axis=1)
    dens /= samples.size * h * np.sqrt(2.0 * np.pi)

    raw = float(np.trapezoid(dens, grid))
    if raw > 0:
        dens = dens / raw
    return KernelDensity(
        grid=grid, density=dens, bandwidth=h, sample_size=int(samples.size),
        label=label, raw_integral=raw,
    )


def rca_change_density(
    pairs: Sequence[tuple[ContinuousRca, ContinuousRca, ChangeMatrix]],
    direction: str,
    *,
    label: str = "",
    grid_size: int = 512,
    grid_range: tuple[float, float] = (-2.0, 2.0),
    bandwidth: float | None = None,
) -> KernelDensity:
    """Density of symmetric-RCA changes over cells that gained (+1) or lost (-1).

    Pass all period pairs of one length to pool them; changes live in
    [-2, 2] by construction of the symmetric transform.
    """
    want = 1 if direction == "gain" else -1
    chunks = []
    for cont0, cont1, delta in pairs:
        if cont0.symmetric.shape != delta.delta.shape or cont1.symmetric.shape != delta.delta.shape:
            raise ShapeMismatch("continuous RCA and change matrix shapes differ")
        mask = delta.delta == want
        if mask.any():
            chunks.append((cont1.symmetric - cont0.symmetric)[mask])
    if not chunks:
        raise EmptySample(f"no {direction} cells in the supplied pairs")
    samples = np.concatenate(chunks)
    return kernel_density(
        samples, label=label or direction, grid_range=grid_range,
        grid_size=grid_size, bandwidth=bandwidth,
    )


# --- descriptive tables ----------------------------------------------------------

def rca_count_table(rcas: Sequence[BinaryRca]) -> pd.DataFrame:
    """Yearly RCA counts and their fraction of the grid, plus an average row."""
    rows = []
    for x in sorted(rcas, key=lambda r: r.year):
        m, n = x.shape
        rows.append(
            {
                "year": str(x.year),
                "rca_count": float(x.total_rca),
                "fraction": x.total_rca / (m * n),
            }
        )
    frame = pd.DataFrame(rows)
    avg = {
        "year": "average",
        "rca_count": frame["rca_count"].mean(),
        "fraction": frame["fraction"].mean(),
    }
    return pd.concat([frame, pd.DataFrame([avg])], ignore_index=True)


def change_stats_table(deltas: Sequence[ChangeMatrix]) -> pd.DataFrame:
    """Per period pair: total gains/losses and per-country / per-product
    means with sample standard deviations, ordered by period length."""
    rows = []
    for d in sorted(deltas, key=lambda d: (d.length, d.from_year)):
        gains = d.delta == 1
        losses = d.delta == -1
        per_country_g = gains.sum(axis=0)
        per_country_l = losses.sum(axis=0)
        per_product_g = gains.sum(axis=1)
        per_product_l = losses.sum(axis=1)
        rows.append(
            {
                "from": d.from_year,
                "to": d.to_year,
                "length": d.length,
                "gains": d.gains,
                "losses": d.losses,
                "avg_gains_per_country": per_country_g.mean(),
                "sd_gains_per_country": per_country_g.std(ddof=1),
                "avg_losses_per_country": per_country_l.mean(),
                "sd_losses_per_country": per_country_l.std(ddof=1),
                "avg_gains_per_product": per_product_g.mean(),
                "sd_gains_per_product": per_product_g.std(ddof=1),
                "avg_losses_per_product": per_product_l.mean(),
                "sd_losses_per_product": per_product_l.std(ddof=1),
            }
        )
    return pd.DataFrame(rows)


# --- p-value summaries ------------------------------------------------------------

def results_frame(results: Iterable[TestResult]) -> pd.DataFrame:
    """Tidy view of test results with period length and space family."""
    rows = []
    for r in results:
        rows.append(
            {
                "scope": r.scope,
                "unit": r.unit,
                "indicator": r.indicator,
                "space": SPACE_FAMILY.get(r.indicator, "other"),
                "direction": r.direction,
                "from": r.from_year,
                "to": r.to_year,
                "length": r.length,
                "N": r.n,
                "N1": r.n1,
                "observed_mean": r.observed_mean,
                "p_value": r.p_value,
                "skipped": r.skipped,
                "reason": r.reason,
            }
        )
    return pd.DataFrame(rows)


def pvalue_cdf(
    results: Iterable[TestResult],
    group_cols: Sequence[str] = ("indicator", "direction"),
    repetitions: int = 5000,
) -> pd.DataFrame:
    """Step-function data of the p-value distribution per group.

    Two cumulative fractions are emitted: over non-skipped tests and over
    all tests including skipped ones (the skipped share is implicit in the
    n_tested / n_total columns).  p = 0 cannot sit on a log axis, so a
    plot coordinate of 1/(10*repetitions) is emitted alongside, flagged.
    """
    frame = results_frame(results)
    if frame.empty:
        return pd.DataFrame(
            columns=[*group_cols, "p_value", "p_plot", "zero_p",
                     "cum_frac_tested", "cum_frac_all", "n_tested", "n_total"]
        )
    out = []
    for key, grp in frame.groupby(list(group_cols), sort=True):
        key = key if isinstance(key, tuple) else (key,)
        tested = grp[~grp["skipped"]].sort_values("p_value", kind="mergesort")
        n_total = len(grp)
        n_tested = len(tested)
        if n_tested == 0:
            continue
        ps = tested["p_value"].to_numpy()
        for p in np.unique(ps):
            cum = int((ps <= p).sum())
            out.append(
                {
                    **dict(zip(group_cols, key)),
                    "p_value": p,
                    "p_plot": p if p > 0 else 1.0 / (10 * repetitions),
                    "zero_p": bool(p == 0),
                    "cum_frac_tested": cum / n_tested,
                    "cum_frac_all": cum / n_total,
                    "n_tested": n_tested,
                    "n_total": n_total,
                }
            )
    return pd.DataFrame(out)


def threshold_summary(
    results: Iterable[TestResult],
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
    group_cols: Sequence[str] = ("scope", "direction", "indicator"),
    mark_maxima: bool = True,
) -> pd.DataFrame:
    """Fractions of non-skipped tests with p below each cutoff, per group.

    When the grouping includes the indicator, the best value per cutoff is
    flagged within its category (all indicators with the same remaining
    keys) and within its subcategory (same keys plus space family).
    """
    frame = results_frame(results)
    cols = [cutoff_column(c) for c in cutoffs]
    rows = []
    if frame.empty:
        return pd.DataFrame(columns=[*group_cols, *cols, "n_tested", "n_total"])
    for key, grp in frame.groupby(list(group_cols), sort=True):
        key = key if isinstance(key, tuple) else (key,)
        tested = grp[~grp["skipped"]]
        row = dict(zip(group_cols, key))
        for c, col in zip(cutoffs, cols):
            row[col] = (
                float((tested["p_value"] <= c).sum() / len(tested)) if len(tested) else np.nan
            )
        row["n_tested"] = len(tested)
        row["n_total"] = len(grp)
        if "indicator" in group_cols:
            row["space"] = SPACE_FAMILY.get(row["indicator"], "other")
        rows.append(row)
    table = pd.DataFrame(rows)

    if mark_maxima and "indicator" in group_cols and not table.empty:
        category_keys = [c for c in group_cols if c != "indicator"]
        for c, col in zip(cutoffs, cols):
            if category_keys:
                cat_max = table.groupby(category_keys)[col].transform("max")
                sub_max = table.groupby(category_keys + ["space"])[col].transform("max")
            else:
                cat_max = table[col].max()
                sub_max = table.groupby(["space"])[col].transform("max")
            table[f"max_in_category_{c:g}"] = table[col] == cat_max
            table[f"max_in_space_{c:g}"] = table[col] == sub_max
    return table


def lall_breakdown(
    results: Iterable[TestResult],
    concordance: LallConcordance,
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
) -> tuple[pd.DataFrame, tuple[str, ...]]:
    """Per-product test summary by Lall group.

    Only product-scope results enter; products missing from the concordance
    are excluded from the table and returned for reporting.
    """
    frame = results_frame(results)
    frame = frame[frame["scope"] == "product"].copy()
    if frame.empty:
        return pd.DataFrame(), ()
    frame["group_id"] = frame["unit"].map(concordance.groups)
    unmapped = tuple(sorted(frame.loc[frame["group_id"].isna(), "unit"].unique()))
    frame = frame[~frame["group_id"].isna()].copy()
    frame["group_id"] = frame["group_id"].astype(int)

    cols = [cutoff_column(c) for c in cutoffs]
    rows = []
    for key, grp in frame.groupby(["space", "indicator", "direction", "group_id"], sort=True):
        tested = grp[~grp["skipped"]]
        row = dict(zip(("space", "indicator", "direction", "group_id"), key))
        row["group_name"] = concordance.names.get(int(key[3]), f"group {key[3]}")
        for c, col in zip(cutoffs, cols):
            row[col] = (
                float((tested["p_value"] <= c).sum() / len(tested)) if len(tested) else np.nan
            )
        row["n_tested"] = len(tested)
        row["n_total"] = len(grp)
        rows.append(row)
    return pd.DataFrame(rows), unmapped


# --- decomposition diagnostics -----------------------------------------------------

@dataclass(frozen=True)
class FitLine:
    slope: float
    intercept: float
    r_squared: float


def ols_line(x: np.ndarray, y: np.ndarray) -> FitLine:
    """Ordinary least squares with intercept."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    if sxx == 0:
        return FitLine(slope=np.nan, intercept=ym, r_squared=np.nan)
    slope = ((x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    syy = ((y - ym) ** 2).sum()
    r2 = 1.0 - resid @ resid / syy if syy > 0 else np.nan
    return FitLine(slope=float(slope), intercept=float(intercept), r_squared=float(r2))


@dataclass(frozen=True)
class DecompositionDiagnostics:
    product_scatter: pd.DataFrame   # autonomous probability vs product ubiquity
    product_fit: FitLine            # slope close to the country count on real data
    country_scatter: pd.DataFrame   # autonomous probability vs country diversification
    country_fit: FitLine            # slope close to the product count
    densities: Mapping[str, KernelDensity]  # element distributions of E-type matrices


def decomposition_diagnostics(
    indicators: Mapping[str, IndicatorMatrix],
    ubiquity: np.ndarray,
    diversification: np.ndarray,
    *,
    grid_size: int = 512,
) -> DecompositionDiagnostics:
    """Scatter + OLS of counts on autonomous probabilities, and element KDEs
    contrasting the full specialization probability with its path-dependent part."""
    needed = {"E", "E1", "E2", "Estar", "E1star", "E2star"}
    missing = needed - set(indicators)
    if missing:
        raise KeyError(f"missing indicator matrices: {sorted(missing)}")
    auto_p = indicators["E1"].values[:, 0]          # no country variation
    auto_c = indicators["E1star"].values[0, :]      # no product variation
    product_scatter = pd.DataFrame(
        {"autonomous_probability": auto_p, "ubiquity": np.asarray(ubiquity, dtype=float)}
    )
    country_scatter = pd.DataFrame(
        {
            "autonomous_probability": auto_c,
            "diversification": np.asarray(diversification, dtype=float),
        }
    )
    densities = {
        key: kernel_density(indicators[key].values, label=key, grid_size=grid_size)
        for key in ("E", "E2", "Estar", "E2star")
    }
    return DecompositionDiagnostics(
        product_scatter=product_scatter,
        product_fit=ols_line(auto_p, ubiquity),
        country_scatter=country_scatter,
        country_fit=ols_line(auto_c, diversification),
        densities=densities,
    )


# --- rendering and manifests ---------------------------------------------------------

def render_results_preview(
    results: Sequence[TestResult], repetitions: int, limit: int = 20
) -> str:
    """Plain-text preview with human-readable p-values ('< 1/reps' for zero)."""
    lines = ["scope unit indicator direction period N N1 p"]
    for r in results[:limit]:
        p = format_pvalue(r.p_value, repetitions) if not r.skipped else f"skipped ({r.reason})"
        unit = r.unit or "-"
        lines.append(
            f"{r.scope} {unit} {r.indicator} {r.direction} "
            f"{r.from_year}-{r.to_year} {r.n} {r.n1} {p}"
        )
    if len(results) > limit:
        lines.append(f"... {len(results) - limit} more rows")
    return "\n".join(lines) + "\n"


def density_frame(kd: KernelDensity) -> pd.DataFrame:
    return pd.DataFrame({"x": kd.grid, "density": kd.density, "label": kd.label})


def write_manifest(path: str | Path, payload: dict) -> None:
    """Deterministic JSON manifest (sorted keys, no timestamps)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
